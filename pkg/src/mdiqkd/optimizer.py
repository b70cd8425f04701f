"""Exhaustive signal/decoy intensity optimization versus channel loss.

For each loss point the model supplies every intensity-pair gain the
three-intensity protocol needs, the decoy bounds turn those into a key rate,
and an exhaustive grid search picks the intensity pair maximizing it.
Component-improvement scenarios rerun the search on a modified
configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

from .decoy import DecoyKeyRateResult, IntensityTriple, key_rate_from_cells, secret_key_rate
from .link import GainModel, SystemConfig
from .states import Basis, PulseState, StateLabel, StateSet

# Below this total loss the neglected four-photon inputs start to matter;
# optima there are flagged rather than trusted.
LOW_LOSS_WARNING_DB = 10.0


@dataclass(frozen=True)
class OptimizationGrid:
    """Search grid over decoy/signal intensities and link distance."""

    decoy_min: float = 0.01
    decoy_max: float = 0.98
    signal_max: float = 1.0
    intensity_step: float = 0.01
    distance_min_km: float = 2.0
    distance_max_km: float = 200.0
    distance_step_km: float = 2.0
    db_per_km: float = 0.2
    error_correction_efficiency: float = 1.14

    def __post_init__(self) -> None:
        if self.intensity_step <= 0.0 or self.distance_step_km <= 0.0:
            raise ValueError("grid steps must be positive")
        if not 0.0 < self.decoy_min <= self.decoy_max < self.signal_max:
            raise ValueError("need 0 < decoy_min <= decoy_max < signal_max")
        if self.distance_min_km > self.distance_max_km:
            raise ValueError("distance range is reversed")
        if self.db_per_km <= 0.0:
            raise ValueError("fiber attenuation must be positive")
        if self.error_correction_efficiency < 1.0:
            raise ValueError("error correction efficiency must be >= 1")

    def _steps(self, start: float, stop: float, step: float) -> list[float]:
        n = int(math.floor((stop - start) / step + 1e-9))
        return [round(start + i * step, 9) for i in range(n + 1)]

    def decoy_values(self) -> list[float]:
        return self._steps(self.decoy_min, self.decoy_max, self.intensity_step)

    def signal_values(self) -> list[float]:
        return self._steps(
            self.decoy_min + self.intensity_step, self.signal_max, self.intensity_step
        )

    def distances_km(self) -> list[float]:
        return self._steps(self.distance_min_km, self.distance_max_km, self.distance_step_km)

    def loss_points(self) -> list[tuple[float, float]]:
        """(distance_km, total_loss_db) pairs over the configured range."""
        return [(d, round(d * self.db_per_km, 9)) for d in self.distances_km()]


@dataclass(frozen=True)
class OptimizationRow:
    loss_db: float
    distance_km: float
    tau_s: float
    tau_d: float  # nan in perfect-decoy mode, which needs no decoy intensity
    secret_rate: float  # clamped at zero for ranking
    raw_rate: float
    truncation_warning: bool


@dataclass(frozen=True)
class OptimizationResult:
    mode: str
    scenario: str
    grid: OptimizationGrid
    rows: list[OptimizationRow]

    def max_positive_loss_db(self) -> float | None:
        losses = [row.loss_db for row in self.rows if row.secret_rate > 0.0]
        return max(losses) if losses else None


def model_cells(
    model: GainModel, triple: IntensityTriple, t_alice: float, t_bob: float
) -> dict[tuple[str, str, Basis], tuple[float, float]]:
    """Every intensity-pair (gain, error) cell the decoy analysis consumes."""
    cells: dict[tuple[str, str, Basis], tuple[float, float]] = {}
    for role_a, role_b in (
        ("s", "s"),
        ("d", "d"),
        ("v", "d"),
        ("d", "v"),
        ("v", "s"),
        ("s", "v"),
        ("v", "v"),
    ):
        mu, sigma = triple.value(role_a), triple.value(role_b)
        for basis in (Basis.Z, Basis.X):
            point = model.evaluate(mu, sigma, t_alice, t_bob, basis)
            cells[(role_a, role_b, basis)] = (point.gain, point.error_rate)
    return cells


def evaluate_key_rate(
    config: SystemConfig, triple: IntensityTriple, f: float, model: GainModel | None = None
) -> DecoyKeyRateResult:
    """Decoy-bound key rate of one configuration at one intensity triple."""
    model = model or GainModel(config)
    cells = model_cells(model, triple, config.t_alice, config.t_bob)
    return key_rate_from_cells(cells, triple, f)


class _CellCache:
    """Per-loss cache of the model cells, keyed by a single intensity value.

    The seven decoy cells factor into three families: (v, v), (v, x)/(x, v)
    and (x, x), each depending on one intensity only, so a full
    (signal, decoy) sweep reuses them heavily.
    """

    def __init__(self, model: GainModel, t: float):
        self.model = model
        self.t = t
        self._pairs: dict[tuple[float, float], dict[Basis, tuple[float, float]]] = {}

    def pair(self, mu: float, sigma: float) -> dict[Basis, tuple[float, float]]:
        key = (mu, sigma)
        found = self._pairs.get(key)
        if found is None:
            found = {}
            for basis in (Basis.Z, Basis.X):
                point = self.model.evaluate(mu, sigma, self.t, self.t, basis)
                found[basis] = (point.gain, point.error_rate)
            self._pairs[key] = found
        return found

    def cells(self, triple: IntensityTriple) -> dict[tuple[str, str, Basis], tuple[float, float]]:
        out: dict[tuple[str, str, Basis], tuple[float, float]] = {}
        for role_a, role_b in (
            ("s", "s"),
            ("d", "d"),
            ("v", "d"),
            ("d", "v"),
            ("v", "s"),
            ("s", "v"),
            ("v", "v"),
        ):
            pair = self.pair(triple.value(role_a), triple.value(role_b))
            for basis in (Basis.Z, Basis.X):
                out[(role_a, role_b, basis)] = pair[basis]
        return out


def _best_row(
    candidates: list[tuple[float, float, float, float]],
    loss_db: float,
    distance_km: float,
) -> OptimizationRow:
    # candidates: (clamped_rate, tau_s, tau_d, raw_rate); ties break toward
    # the smaller signal then decoy intensity so the search is deterministic.
    best = None
    for rate, tau_s, tau_d, raw in candidates:
        if best is None or rate > best[0] or (rate == best[0] and (tau_s, tau_d) < best[1:3]):
            best = (rate, tau_s, tau_d, raw)
    assert best is not None
    return OptimizationRow(
        loss_db=loss_db,
        distance_km=distance_km,
        tau_s=best[1],
        tau_d=best[2] if not math.isnan(best[2]) else math.nan,
        secret_rate=best[0],
        raw_rate=best[3],
        truncation_warning=loss_db < LOW_LOSS_WARNING_DB,
    )


def optimize(config: SystemConfig, grid: OptimizationGrid, mode: str = "bounds") -> OptimizationResult:
    """Exhaustive search for the best (signal, decoy) intensities per loss point.

    ``mode="bounds"`` scores each cell with the three-intensity decoy
    bounds; ``mode="perfect"`` uses the model's own single-photon gain and
    error instead (no decoy intensity involved).  The reported rate is
    clamped at zero; the raw value is kept for diagnostics.
    """
    if mode not in ("bounds", "perfect"):
        raise ValueError(f"unknown mode {mode!r}; expected 'bounds' or 'perfect'")
    model = GainModel(config)
    f = grid.error_correction_efficiency
    signal_values = grid.signal_values()
    decoy_values = grid.decoy_values()
    rows = []
    for distance_km, loss_db in grid.loss_points():
        t = 10.0 ** (-loss_db / 20.0)  # both arms share one transmission
        candidates: list[tuple[float, float, float, float]] = []
        if mode == "perfect":
            for tau_s in signal_values:
                z11 = model.single_photon(tau_s, tau_s, t, t, Basis.Z)
                x11 = model.single_photon(tau_s, tau_s, t, t, Basis.X)
                zss = model.evaluate(tau_s, tau_s, t, t, Basis.Z)
                raw = secret_key_rate(z11.gain, x11.error_rate, zss.gain, zss.error_rate, f)
                candidates.append((max(0.0, raw), tau_s, math.nan, raw))
        else:
            cache = _CellCache(model, t)
            for tau_d in decoy_values:
                for tau_s in signal_values:
                    if tau_s <= tau_d:
                        continue
                    triple = IntensityTriple(signal=tau_s, decoy=tau_d)
                    result = key_rate_from_cells(cache.cells(triple), triple, f)
                    candidates.append((max(0.0, result.secret_rate), tau_s, tau_d, result.secret_rate))
        rows.append(_best_row(candidates, loss_db, distance_km))
    return OptimizationResult(mode=mode, scenario="identity", grid=grid, rows=rows)


# ---------------------------------------------------------------------------
# Component-improvement scenarios
# ---------------------------------------------------------------------------

_IDEAL_M = {
    StateLabel.KET0: 1.0,
    StateLabel.KET1: 0.0,
    StateLabel.KET_PLUS: 0.5,
    StateLabel.KET_MINUS: 0.5,
}


@dataclass(frozen=True)
class Scenario:
    """Parameter overrides modeling a component upgrade.

    ``background_suppression_db`` attenuates the modulator leakage entering
    both the state backgrounds and the per-gate background load;
    ``ringing_reduction`` divides the deviation of every mode weight from its
    ideal value.
    """

    name: str
    description: str = ""
    eta: float | None = None
    eta_gate: float | None = None
    dark_scale: float | None = None
    disable_afterpulse: bool = False
    background_suppression_db: float = 0.0
    ringing_reduction: float = 1.0

    def __post_init__(self) -> None:
        if self.background_suppression_db < 0.0:
            raise ValueError("background suppression must be >= 0 dB")
        if self.ringing_reduction < 1.0:
            raise ValueError("ringing reduction factor must be >= 1")
        if self.dark_scale is not None and self.dark_scale <= 0.0:
            raise ValueError("dark count scale must be positive")

    def _state(self, state: PulseState, b_factor: float) -> PulseState:
        ideal = _IDEAL_M[state.label]
        m = ideal + (state.m - ideal) / self.ringing_reduction
        return replace(state, m=m, b=state.b * b_factor)

    def apply(self, config: SystemConfig) -> SystemConfig:
        b_factor = 10.0 ** (-self.background_suppression_db / 10.0)
        detector = replace(
            config.detector,
            eta=self.eta if self.eta is not None else config.detector.eta,
            eta_gate=self.eta_gate if self.eta_gate is not None else config.detector.eta_gate,
            p_dark_bin=config.detector.p_dark_bin
            * (self.dark_scale if self.dark_scale is not None else 1.0),
            alpha=0.0 if self.disable_afterpulse else config.detector.alpha,
        )
        return replace(
            config,
            alice=StateSet(*(self._state(s, b_factor) for s in _states(config.alice))),
            bob=StateSet(*(self._state(s, b_factor) for s in _states(config.bob))),
            detector=detector,
            background_gate_alice=config.background_gate_alice * b_factor,
            background_gate_bob=config.background_gate_bob * b_factor,
        )


def _states(state_set: StateSet) -> tuple[PulseState, PulseState, PulseState, PulseState]:
    return (state_set.z0, state_set.z1, state_set.x_plus, state_set.x_minus)


SCENARIOS: Mapping[str, Scenario] = {
    "identity": Scenario(name="identity", description="baseline configuration, no changes"),
    "sspd": Scenario(
        name="sspd",
        description="superconducting detectors: 93% efficiency, dark counts "
        "down two orders of magnitude, no afterpulsing",
        eta=0.93,
        eta_gate=0.93,
        dark_scale=1e-2,
        disable_afterpulse=True,
    ),
    "im": Scenario(
        name="im",
        description="state-of-the-art intensity modulation: 15 dB extra "
        "background suppression, pulse ringing reduced five-fold",
        background_suppression_db=15.0,
        ringing_reduction=5.0,
    ),
    "sspd_im": Scenario(
        name="sspd_im",
        description="superconducting detectors plus improved intensity modulation",
        eta=0.93,
        eta_gate=0.93,
        dark_scale=1e-2,
        disable_afterpulse=True,
        background_suppression_db=15.0,
        ringing_reduction=5.0,
    ),
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        available = ", ".join(sorted(SCENARIOS))
        raise KeyError(f"unknown scenario {name!r}; available: {available}") from None


def run_scenario(
    config: SystemConfig, scenario: Scenario, grid: OptimizationGrid, mode: str = "bounds"
) -> OptimizationResult:
    """Optimize the configuration with the scenario's overrides applied."""
    result = optimize(scenario.apply(config), grid, mode)
    return replace(result, scenario=scenario.name)
