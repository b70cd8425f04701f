"""Gains and error rates per basis and intensity pair, with uncertainty bands.

The relay's singlet announcements are aggregated over the photon-number
inputs (Poissonian, truncated at three photons by default) and over the
uniform choice of prepared states within a basis.  "Wrong" announcements are
those where both parties sent the same logical state; the error rate is the
wrong fraction of all announcements.

The conditional probabilities are quadratic polynomials in the per-bin noise
probability, so a :class:`GainModel` precomputes their coefficients once per
configuration and then evaluates gains for arbitrary intensities and channel
transmissions at negligible cost.  Uncertainty bands are min/max envelopes
over uniform parameter draws.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from . import bsm
from .detector import DetectorParams, GateLoad, noise_per_bin
from .states import Basis, PulseState, StateLabel, StateSet

SUPPORTED_DISTRIBUTIONS = ("poissonian",)


@dataclass(frozen=True)
class GainErrorPoint:
    """Gain (announcements per emitted pulse pair) and error rate for one basis."""

    basis: Basis
    gain: float
    error_rate: float
    degenerate: bool = False


@dataclass(frozen=True)
class SystemConfig:
    """Full parameter set of one link: sources, channels, relay detectors.

    ``phase_offset_x`` is an extra differential phase applied to every
    interfering x-basis pair; the uncertainty sampler uses it to inject the
    laser-frequency drift bound.
    """

    alice: StateSet
    bob: StateSet
    mu: float
    sigma: float
    t_alice: float
    t_bob: float
    detector: DetectorParams
    visibility: float
    background_gate_alice: float = 0.0
    background_gate_bob: float = 0.0
    phase_offset_x: float = 0.0
    max_photons: int = 3
    number_distribution: str = "poissonian"

    def __post_init__(self) -> None:
        if self.mu < 0.0 or self.sigma < 0.0:
            raise ValueError("mean photon numbers must be >= 0")
        if not 0.0 <= self.t_alice <= 1.0 or not 0.0 <= self.t_bob <= 1.0:
            raise ValueError("channel transmissions must lie in [0, 1]")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must lie in [0, 1]")
        if self.background_gate_alice < 0.0 or self.background_gate_bob < 0.0:
            raise ValueError("per-gate backgrounds must be >= 0")
        if not 0 <= self.max_photons <= 3:
            raise ValueError("the analytic model is truncated at three photons")
        if self.number_distribution not in SUPPORTED_DISTRIBUTIONS:
            raise ValueError(f"unsupported photon number distribution {self.number_distribution!r}")


def transmissions_from_total_loss(loss_db: float) -> tuple[float, float]:
    """Split a total link loss evenly between the two arms (t_a = t_b)."""
    t = 10.0 ** (-loss_db / 20.0)
    return t, t


def basis_pairs(
    alice: StateSet, bob: StateSet, basis: Basis
) -> list[tuple[PulseState, PulseState, bool]]:
    """The four equally likely state choices in a basis; flag marks identical sends.

    A singlet announcement from identical states yields an erroneous key bit,
    from orthogonal states a correct one.
    """
    a0, a1 = alice.pair_choices(basis)
    b0, b1 = bob.pair_choices(basis)
    return [
        (a0, b0, True),
        (a0, b1, False),
        (a1, b0, False),
        (a1, b1, True),
    ]


def poisson_pn(n: int, mean: float) -> float:
    """Probability of exactly ``n`` photons in a Poissonian pulse of the given mean."""
    if mean < 0.0:
        raise ValueError("mean photon number must be >= 0")
    if mean == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(-mean) * mean**n / math.factorial(n)


def occurrence_probs(
    mu: float, sigma: float, t_alice: float, t_bob: float, max_photons: int = 3
) -> list[tuple[int, int, float]]:
    """Occurrence probabilities of the photon-number inputs at the splitter.

    Lists every ``(n_from_alice, n_from_bob)`` with a nonzero Poissonian
    product weight and total photon number up to ``max_photons``.
    """
    mean_a, mean_b = mu * t_alice, sigma * t_bob
    out: list[tuple[int, int, float]] = []
    for total in range(max_photons + 1):
        for n_a in range(total, -1, -1):
            n_b = total - n_a
            w = poisson_pn(n_a, mean_a) * poisson_pn(n_b, mean_b)
            if w > 0.0:
                out.append((n_a, n_b, w))
    return out


def noise_for(config: SystemConfig) -> float:
    """Per-bin noise probability (dark counts plus afterpulsing) at this load."""
    load = GateLoad.from_intensities(
        config.mu,
        config.sigma,
        config.t_alice,
        config.t_bob,
        config.background_gate_alice,
        config.background_gate_bob,
    )
    return noise_per_bin(config.detector, load)


def _pair_quad(
    n_a: int,
    n_b: int,
    state_a: PulseState,
    state_b: PulseState,
    delta_phi: float,
    visibility: float,
    eta: float,
    deadtime_free: bool,
) -> bsm.NoiseQuad:
    if n_a == 0 and n_b == 0:
        return bsm.quad_0_photons()
    if n_a + n_b == 1:
        return bsm.quad_1_photon(eta)
    if n_a + n_b == 2:
        if n_b == 0:
            return bsm.quad_same_pulse(state_a, 2, eta, deadtime_free)
        if n_a == 0:
            return bsm.quad_same_pulse(state_b, 2, eta, deadtime_free)
        return bsm.quad_2photons_visibility(state_a, state_b, delta_phi, visibility, eta, deadtime_free)
    return bsm.quad_3photons(
        [state_a] * n_a, [state_b] * n_b, delta_phi, visibility, eta, deadtime_free
    )


class GainModel:
    """Conditional singlet probabilities of one configuration, precomputed.

    The tables depend only on the prepared states, visibility and detector
    efficiency, so one model instance evaluates gains for any combination of
    intensities and channel transmissions (the optimizer sweeps both).
    """

    def __init__(self, config: SystemConfig):
        self.config = config
        eta = config.detector.eta
        deadtime_free = config.detector.deadtime_free
        self._cases: dict[Basis, list[tuple[int, int, bsm.NoiseQuad, bsm.NoiseQuad]]] = {}
        for basis in (Basis.Z, Basis.X):
            offset = config.phase_offset_x if basis is Basis.X else 0.0
            table = []
            for total in range(config.max_photons + 1):
                for n_a in range(total, -1, -1):
                    n_b = total - n_a
                    wrong = correct = (0.0, 0.0, 0.0)
                    for state_a, state_b, is_wrong in basis_pairs(config.alice, config.bob, basis):
                        quad = _pair_quad(
                            n_a,
                            n_b,
                            state_a,
                            state_b,
                            state_a.phi - state_b.phi + offset,
                            config.visibility,
                            eta,
                            deadtime_free,
                        )
                        quad = bsm._scale(0.25, quad)
                        if is_wrong:
                            wrong = bsm._add(wrong, quad)
                        else:
                            correct = bsm._add(correct, quad)
                    table.append((n_a, n_b, wrong, correct))
            self._cases[basis] = table

    def noise(self, mu: float, sigma: float, t_alice: float, t_bob: float) -> float:
        load = GateLoad.from_intensities(
            mu,
            sigma,
            t_alice,
            t_bob,
            self.config.background_gate_alice,
            self.config.background_gate_bob,
        )
        return noise_per_bin(self.config.detector, load)

    def _accumulate(
        self, basis: Basis, mu: float, sigma: float, t_alice: float, t_bob: float
    ) -> tuple[float, float]:
        noise = self.noise(mu, sigma, t_alice, t_bob)
        mean_a, mean_b = mu * t_alice, sigma * t_bob
        wrong = correct = 0.0
        for n_a, n_b, wrong_quad, correct_quad in self._cases[basis]:
            w = poisson_pn(n_a, mean_a) * poisson_pn(n_b, mean_b)
            if w == 0.0:
                continue
            wrong += w * bsm.eval_quad(wrong_quad, noise)
            correct += w * bsm.eval_quad(correct_quad, noise)
        return wrong, correct

    @staticmethod
    def _to_point(basis: Basis, wrong: float, correct: float) -> GainErrorPoint:
        gain = wrong + correct
        if gain <= 0.0:
            return GainErrorPoint(basis=basis, gain=0.0, error_rate=0.5, degenerate=True)
        return GainErrorPoint(basis=basis, gain=gain, error_rate=wrong / gain)

    def evaluate(
        self, mu: float, sigma: float, t_alice: float, t_bob: float, basis: Basis
    ) -> GainErrorPoint:
        wrong, correct = self._accumulate(basis, mu, sigma, t_alice, t_bob)
        return self._to_point(basis, wrong, correct)

    def single_photon(
        self, mu: float, sigma: float, t_alice: float, t_bob: float, basis: Basis
    ) -> GainErrorPoint:
        """Gain and error restricted to the one-photon-from-each-party input."""
        noise = self.noise(mu, sigma, t_alice, t_bob)
        weight = poisson_pn(1, mu * t_alice) * poisson_pn(1, sigma * t_bob)
        for n_a, n_b, wrong_quad, correct_quad in self._cases[basis]:
            if (n_a, n_b) == (1, 1):
                wrong = weight * bsm.eval_quad(wrong_quad, noise)
                correct = weight * bsm.eval_quad(correct_quad, noise)
                return self._to_point(basis, wrong, correct)
        raise RuntimeError("model truncated below two photons has no (1,1) input")


def gain_and_error(config: SystemConfig, basis: Basis) -> GainErrorPoint:
    """Gain and error rate for one basis at the configured intensities."""
    return GainModel(config).evaluate(config.mu, config.sigma, config.t_alice, config.t_bob, basis)


def q11_e11_direct(config: SystemConfig, basis: Basis) -> GainErrorPoint:
    """Model-internal single-photon gain and error (perfect decoy knowledge)."""
    return GainModel(config).single_photon(
        config.mu, config.sigma, config.t_alice, config.t_bob, basis
    )


# ---------------------------------------------------------------------------
# Uncertainty propagation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterBand:
    """A characterized value with a uniform half-width uncertainty."""

    central: float
    half_width: float = 0.0

    def __post_init__(self) -> None:
        if self.half_width < 0.0:
            raise ValueError("half-width must be >= 0")

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.central - self.half_width, self.central + self.half_width))


@dataclass(frozen=True)
class StateBand:
    """Uncertain preparation parameters of one pulse state."""

    m: ParameterBand
    b: ParameterBand
    phi: ParameterBand
    basis: Basis
    label: StateLabel

    def central(self) -> PulseState:
        return PulseState(self.m.central, self.b.central, self.phi.central, self.basis, self.label)

    def sample(self, rng: np.random.Generator, clamps: list[int]) -> PulseState:
        m = _clamp(self.m.sample(rng), 0.0, 1.0, clamps)
        b = _clamp(self.b.sample(rng), 0.0, math.inf, clamps)
        return PulseState(m, b, self.phi.sample(rng), self.basis, self.label)


@dataclass(frozen=True)
class StateSetBands:
    z0: StateBand
    z1: StateBand
    x_plus: StateBand
    x_minus: StateBand

    def __iter__(self) -> Iterator[StateBand]:
        return iter((self.z0, self.z1, self.x_plus, self.x_minus))

    def central(self) -> StateSet:
        return StateSet(*(s.central() for s in self))

    def sample(self, rng: np.random.Generator, clamps: list[int]) -> StateSet:
        return StateSet(*(s.sample(rng, clamps) for s in self))


def _clamp(value: float, lo: float, hi: float, clamps: list[int]) -> float:
    if value < lo:
        clamps[0] += 1
        return lo
    if value > hi:
        clamps[0] += 1
        return hi
    return value


@dataclass(frozen=True)
class UncertainSystemConfig:
    """A system configuration whose characterized parameters carry uncertainties.

    Uniform half-widths are attached to the state preparations, the
    intensities, the visibility and the dark count level; the frequency
    drift bound feeds an extra uniform phase on interfering x-basis pairs.
    """

    alice: StateSetBands
    bob: StateSetBands
    mu: ParameterBand
    sigma: ParameterBand
    t_alice: float
    t_bob: float
    visibility: ParameterBand
    p_dark_bin: ParameterBand
    phase_drift_bound: float
    detector: DetectorParams
    background_gate_alice: float = 0.0
    background_gate_bob: float = 0.0
    max_photons: int = 3

    def _build(
        self,
        alice: StateSet,
        bob: StateSet,
        mu: float,
        sigma: float,
        visibility: float,
        p_dark_bin: float,
        phase_offset_x: float,
    ) -> SystemConfig:
        return SystemConfig(
            alice=alice,
            bob=bob,
            mu=mu,
            sigma=sigma,
            t_alice=self.t_alice,
            t_bob=self.t_bob,
            detector=replace(self.detector, p_dark_bin=p_dark_bin),
            visibility=visibility,
            background_gate_alice=self.background_gate_alice,
            background_gate_bob=self.background_gate_bob,
            phase_offset_x=phase_offset_x,
            max_photons=self.max_photons,
        )

    def central(self) -> SystemConfig:
        return self._build(
            self.alice.central(),
            self.bob.central(),
            self.mu.central,
            self.sigma.central,
            self.visibility.central,
            self.p_dark_bin.central,
            0.0,
        )

    def sample(self, rng: np.random.Generator) -> tuple[SystemConfig, int]:
        """One uniform draw of every uncertain parameter; clamped where needed."""
        clamps = [0]
        alice = self.alice.sample(rng, clamps)
        bob = self.bob.sample(rng, clamps)
        mu = _clamp(self.mu.sample(rng), 0.0, math.inf, clamps)
        sigma = _clamp(self.sigma.sample(rng), 0.0, math.inf, clamps)
        visibility = _clamp(self.visibility.sample(rng), 0.0, 1.0, clamps)
        p_dark = _clamp(self.p_dark_bin.sample(rng), 0.0, math.inf, clamps)
        drift = float(rng.uniform(-self.phase_drift_bound, self.phase_drift_bound))
        return self._build(alice, bob, mu, sigma, visibility, p_dark, drift), clamps[0]

    def with_point(
        self, mu: ParameterBand, sigma: ParameterBand, t_alice: float, t_bob: float
    ) -> "UncertainSystemConfig":
        return replace(self, mu=mu, sigma=sigma, t_alice=t_alice, t_bob=t_bob)


BAND_KEYS = ("gain_z", "error_z", "gain_x", "error_x")


@dataclass(frozen=True)
class PredictionBand:
    """Envelope of model predictions under the configured uncertainties."""

    central: dict[str, float]
    low: dict[str, float]
    high: dict[str, float]
    n_samples: int
    seed: int
    clamped_draws: int

    def contains(self, key: str, value: float, widen: float = 0.0) -> bool:
        return self.low[key] - widen <= value <= self.high[key] + widen


def _observables(config: SystemConfig) -> dict[str, float]:
    model = GainModel(config)
    out: dict[str, float] = {}
    for basis, gkey, ekey in ((Basis.Z, "gain_z", "error_z"), (Basis.X, "gain_x", "error_x")):
        point = model.evaluate(config.mu, config.sigma, config.t_alice, config.t_bob, basis)
        out[gkey] = point.gain
        out[ekey] = point.error_rate
    return out


def prediction_band(
    uncertain: UncertainSystemConfig, n_samples: int, seed: int
) -> PredictionBand:
    """Min/max envelope of the four observables over uniform parameter draws.

    Deterministic for a fixed seed: the draw order is part of the contract.
    Samples needing a clamp back into the physical domain are kept and
    counted; a warning summarizes them.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    central = _observables(uncertain.central())
    low = dict(central)
    high = dict(central)
    clamped = 0
    for _ in range(n_samples):
        config, n_clamped = uncertain.sample(rng)
        clamped += n_clamped
        values = _observables(config)
        for key, value in values.items():
            if value < low[key]:
                low[key] = value
            if value > high[key]:
                high[key] = value
    if clamped:
        warnings.warn(
            f"{clamped} parameter draw(s) were clamped back into their physical domain",
            stacklevel=2,
        )
    return PredictionBand(
        central=central, low=low, high=high, n_samples=n_samples, seed=seed, clamped_draws=clamped
    )
