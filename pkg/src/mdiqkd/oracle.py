"""Exact Fock-space reference for the singlet-announcement probabilities.

This module is the independent brute-force check on every analytic
conditional probability: it expands the input creation-operator polynomial
through the 50/50 splitter exactly, keeps complex amplitudes per output
occupancy, and enumerates every detection outcome.  Distinguishable photons
occupy orthogonal auxiliary sectors of the output modes, so partial
indistinguishability is realized as a classical mixture of an interfering
and a non-interfering evolution.

The detector enumeration uses the same linearized-noise convention as the
analytic model (spurious clicks complete patterns but never veto them), so
agreement is expected at the level of float roundoff.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import comb, factorial
from typing import Mapping, Sequence

from .link import GainErrorPoint, SystemConfig, basis_pairs, noise_for, occurrence_probs
from .states import Basis, PulseState

# An output mode is (port, bin, sector); an occupancy is a sorted tuple of
# ((port, bin, sector), count) pairs.
Mode = tuple[int, int, int]
OccKey = tuple[tuple[Mode, int], ...]

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

DEFAULT_TRUNCATION = 5


@dataclass(frozen=True)
class PhotonGroup:
    """``count`` identical photons entering one input port.

    ``amp_early`` / ``amp_late`` are the (complex) temporal-mode amplitudes
    of each photon; ``sector`` tags the distinguishability class.
    """

    input_port: int
    count: int
    amp_early: complex
    amp_late: complex
    sector: int = 0


@dataclass(frozen=True)
class FockInput:
    """Photon-number occupancies at the two input ports.

    Each port carries four modes: early/late temporal mode crossed with the
    interfering (0) and non-interfering (1) distinguishability sector, in the
    order ``(early, late, early_aux, late_aux)``.
    """

    port_a: tuple[int, int, int, int] = (0, 0, 0, 0)
    port_b: tuple[int, int, int, int] = (0, 0, 0, 0)

    def __post_init__(self) -> None:
        if any(n < 0 for n in self.port_a + self.port_b):
            raise ValueError("occupancies must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.port_a) + sum(self.port_b)

    def groups(self) -> list[PhotonGroup]:
        out = []
        for port, occ in ((0, self.port_a), (1, self.port_b)):
            for mode_idx, n in enumerate(occ):
                if n == 0:
                    continue
                amp_early, amp_late = (1.0, 0.0) if mode_idx % 2 == 0 else (0.0, 1.0)
                out.append(PhotonGroup(port, n, amp_early, amp_late, sector=mode_idx // 2))
        return out


def _splitter_images(group: PhotonGroup) -> list[tuple[Mode, complex]]:
    # Port a maps to (out0 + out1)/sqrt(2), port b to (-out0 + out1)/sqrt(2).
    sign = 1.0 if group.input_port == 0 else -1.0
    images: list[tuple[Mode, complex]] = []
    for tbin, amp in ((0, group.amp_early), (1, group.amp_late)):
        if amp == 0:
            continue
        images.append(((0, tbin, group.sector), sign * amp * _INV_SQRT2))
        images.append(((1, tbin, group.sector), amp * _INV_SQRT2))
    return images


def _bump(occ: OccKey, mode: Mode) -> OccKey:
    items = dict(occ)
    items[mode] = items.get(mode, 0) + 1
    return tuple(sorted(items.items()))


def evolve_groups(groups: Sequence[PhotonGroup]) -> dict[OccKey, complex]:
    """Exact output amplitudes over occupancies for the given input photons."""
    poly: dict[OccKey, complex] = {(): 1.0 + 0.0j}
    norm = 1.0
    for group in groups:
        norm *= factorial(group.count)
        images = _splitter_images(group)
        for _ in range(group.count):
            nxt: dict[OccKey, complex] = {}
            for occ, coeff in poly.items():
                for mode, amp in images:
                    key = _bump(occ, mode)
                    nxt[key] = nxt.get(key, 0.0) + coeff * amp
            poly = nxt
    inv_sqrt_norm = 1.0 / math.sqrt(norm)
    amps: dict[OccKey, complex] = {}
    for occ, coeff in poly.items():
        weight = math.sqrt(math.prod(factorial(c) for _, c in occ))
        amp = coeff * weight * inv_sqrt_norm
        if amp != 0:
            amps[occ] = amp
    return amps


def evolve(fock: FockInput, truncation: int = DEFAULT_TRUNCATION) -> dict[OccKey, complex]:
    """Evolve a Fock-basis input through the splitter; amplitudes per occupancy."""
    if fock.total > truncation:
        raise ValueError(f"{fock.total} photons exceed the configured truncation {truncation}")
    return evolve_groups(fock.groups())


def output_probabilities(amps: Mapping[OccKey, complex]) -> dict[OccKey, float]:
    return {occ: abs(a) ** 2 for occ, a in amps.items()}


# ---------------------------------------------------------------------------
# Detection
# ---------------------------------------------------------------------------

# A joint outcome is ((early, late) click flags for detector 0, same for 1).
Outcome = tuple[tuple[bool, bool], tuple[bool, bool]]


@dataclass(frozen=True)
class OracleDistribution:
    """Exact joint click/no-click probabilities for the two gated detectors."""

    outcomes: Mapping[Outcome, float]

    @property
    def total(self) -> float:
        return sum(self.outcomes.values())

    @property
    def psi_minus(self) -> float:
        return self.outcomes.get(((True, False), (False, True)), 0.0) + self.outcomes.get(
            ((False, True), (True, False)), 0.0
        )


def _detector_outcomes(
    n_early: int, n_late: int, eta: float, noise: float, deadtime_free: bool
) -> dict[tuple[bool, bool], float]:
    acc = {(False, False): 0.0, (True, False): 0.0, (False, True): 0.0, (True, True): 0.0}
    for j_early in range(n_early + 1):
        w_early = comb(n_early, j_early) * eta**j_early * (1.0 - eta) ** (n_early - j_early)
        for j_late in range(n_late + 1):
            w = w_early * comb(n_late, j_late) * eta**j_late * (1.0 - eta) ** (n_late - j_late)
            saw_early, saw_late = j_early > 0, j_late > 0
            if deadtime_free:
                key = (saw_early, saw_late)
            elif saw_early:
                key = (True, False)
            elif saw_late:
                key = (False, True)
            else:
                key = (False, False)
            acc[key] += w
    # Spurious clicks complete a silent detector; the no-click mass absorbs
    # the remainder so the distribution stays normalized.
    silent = acc[(False, False)]
    acc[(True, False)] += silent * noise
    acc[(False, True)] += silent * noise
    acc[(False, False)] = silent * (1.0 - 2.0 * noise)
    return acc


def detect(
    outputs: Mapping[OccKey, float] | Mapping[OccKey, complex],
    eta: float,
    noise: float,
    deadtime_free: bool = False,
) -> OracleDistribution:
    """Exhaustively enumerate detector outcomes for a splitter output.

    ``outputs`` maps occupancies either to probabilities or to amplitudes
    (amplitudes are squared).  Sectors collapse: a detector cannot tell which
    distinguishability class a photon belonged to.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if not 0.0 <= noise <= 0.5:
        raise ValueError("per-bin noise probability must lie in [0, 0.5]")
    joint: dict[Outcome, float] = {}
    for occ, value in outputs.items():
        prob = abs(value) ** 2 if isinstance(value, complex) else float(value)
        if prob == 0.0:
            continue
        counts = [[0, 0], [0, 0]]
        for (port, tbin, _sector), n in occ:
            counts[port][tbin] += n
        det0 = _detector_outcomes(counts[0][0], counts[0][1], eta, noise, deadtime_free)
        det1 = _detector_outcomes(counts[1][0], counts[1][1], eta, noise, deadtime_free)
        for k0, w0 in det0.items():
            if w0 == 0.0:
                continue
            for k1, w1 in det1.items():
                if w1 == 0.0:
                    continue
                key = (k0, k1)
                joint[key] = joint.get(key, 0.0) + prob * w0 * w1
    return OracleDistribution(outcomes=joint)


def psi_minus_probability(
    groups: Sequence[PhotonGroup], eta: float, noise: float, deadtime_free: bool = False
) -> float:
    return detect(output_probabilities(evolve_groups(groups)), eta, noise, deadtime_free).psi_minus


# ---------------------------------------------------------------------------
# End-to-end gain / error reference
# ---------------------------------------------------------------------------


def _state_amplitudes(state: PulseState, extra_phase: float = 0.0) -> tuple[complex, complex]:
    denom = 1.0 + 2.0 * state.b
    amp_early = math.sqrt((state.m + state.b) / denom)
    amp_late = math.sqrt((1.0 - state.m + state.b) / denom) * cmath.exp(1j * (state.phi + extra_phase))
    return amp_early, amp_late


def _case_probability(
    n_a: int,
    n_b: int,
    state_a: PulseState,
    state_b: PulseState,
    extra_phase_a: float,
    visibility: float,
    eta: float,
    noise: float,
    deadtime_free: bool,
) -> float:
    amps_a = _state_amplitudes(state_a, extra_phase_a)
    amps_b = _state_amplitudes(state_b)
    groups_interf = []
    if n_a:
        groups_interf.append(PhotonGroup(0, n_a, *amps_a, sector=0))
    if n_b:
        groups_interf.append(PhotonGroup(1, n_b, *amps_b, sector=0))
    if n_a and n_b and visibility < 1.0:
        groups_distinct = [
            PhotonGroup(0, n_a, *amps_a, sector=0),
            PhotonGroup(1, n_b, *amps_b, sector=1),
        ]
        return visibility * psi_minus_probability(groups_interf, eta, noise, deadtime_free) + (
            1.0 - visibility
        ) * psi_minus_probability(groups_distinct, eta, noise, deadtime_free)
    return psi_minus_probability(groups_interf, eta, noise, deadtime_free)


def oracle_gain_and_error(
    config: SystemConfig, basis: Basis, max_photons: int | None = None
) -> GainErrorPoint:
    """Gain and error rate by exact enumeration, mirroring the model's aggregation.

    Photon-number inputs are weighted by the Poissonian occurrence
    probabilities; the visibility enters as a classical mixture of the
    interfering and non-interfering evolutions for cross-port inputs.
    """
    n_max = config.max_photons if max_photons is None else max_photons
    noise = noise_for(config)
    extra = config.phase_offset_x if basis is Basis.X else 0.0
    deadtime_free = config.detector.deadtime_free
    eta = config.detector.eta
    wrong = correct = 0.0
    cases = occurrence_probs(config.mu, config.sigma, config.t_alice, config.t_bob, n_max)
    pairs = basis_pairs(config.alice, config.bob, basis)
    for n_a, n_b, weight in cases:
        for state_a, state_b, is_wrong in pairs:
            p = _case_probability(
                n_a, n_b, state_a, state_b, extra, config.visibility, eta, noise, deadtime_free
            )
            if is_wrong:
                wrong += 0.25 * weight * p
            else:
                correct += 0.25 * weight * p
    gain = wrong + correct
    if gain <= 0.0:
        return GainErrorPoint(basis=basis, gain=0.0, error_rate=0.5, degenerate=True)
    return GainErrorPoint(basis=basis, gain=gain, error_rate=wrong / gain)
