"""Single-photon detector noise model: dark counts and gated afterpulsing.

Afterpulses decay geometrically over the gates following a detection event.
The per-detection afterpulse probability sums this decay from the end of the
deadtime onward, weighting each gate by the probability that no photon,
dark count or earlier afterpulse fired first.  Converting to a per-time-bin
probability uses the measured ratio of bin to gate dark-count rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

# Absolute tolerance on the neglected geometric tail of the afterpulse sum.
# Far below every experimental uncertainty in the characterization data.
SERIES_TAIL_TOL = 1e-12


class NonPhysicalAfterpulseError(ValueError):
    """Afterpulse parameters imply a per-detection probability >= 1."""


class AfterpulseFitError(RuntimeError):
    """Afterpulse fit did not converge; carries the final residual."""

    def __init__(self, message: str, residual_rms: float):
        super().__init__(message)
        self.residual_rms = residual_rms


@dataclass(frozen=True)
class DetectorParams:
    """Characterized properties of one of the relay's two detectors.

    ``eta`` is the probability of detecting a photon that falls inside a
    time-bin, ``eta_gate`` the (larger) probability of detecting it anywhere
    within the gate.  ``bin_gate_ratio`` is the measured ratio of the dark
    count probability per time-bin to the one per gate; the per-gate value is
    derived from it.  ``alpha`` and ``p_geo`` parameterize the geometric
    afterpulse decay and ``k_dead`` is the deadtime in gates.
    """

    eta: float
    eta_gate: float
    p_dark_bin: float
    bin_gate_ratio: float
    alpha: float
    p_geo: float
    k_dead: int
    deadtime_free: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0 or not 0.0 <= self.eta_gate <= 1.0:
            raise ValueError("detection efficiencies must lie in [0, 1]")
        if self.eta > self.eta_gate:
            raise ValueError(
                f"eta={self.eta} exceeds eta_gate={self.eta_gate}; a time-bin is a sub-window of a gate"
            )
        if self.p_dark_bin < 0.0:
            raise ValueError("dark count probability must be >= 0")
        if not 0.0 < self.bin_gate_ratio <= 1.0:
            raise ValueError("bin_gate_ratio must lie in (0, 1]")
        if self.alpha < 0.0:
            raise ValueError("afterpulse amplitude must be >= 0")
        if not 0.0 < self.p_geo < 1.0:
            raise ValueError("geometric decay parameter must lie in (0, 1)")
        if self.k_dead < 0:
            raise ValueError("deadtime must be a non-negative number of gates")
        # The per-gate afterpulse probability alpha*p*(1-p)^k peaks at k=0.
        if self.alpha * self.p_geo >= 1.0:
            raise ValueError("alpha * p_geo must be < 1 for a valid per-gate probability")
        if self.p_dark_gate >= 1.0:
            raise ValueError("derived per-gate dark count probability must be < 1")

    @property
    def p_dark_gate(self) -> float:
        return self.p_dark_bin / self.bin_gate_ratio


@dataclass(frozen=True)
class GateLoad:
    """Mean optical load on one detector, per gate.

    ``mu_avg`` is the average number of photons reaching the detector per
    gate; the source backgrounds are recorded for provenance.
    """

    mu_avg: float
    background_alice: float = 0.0
    background_bob: float = 0.0

    @classmethod
    def from_intensities(
        cls,
        mu: float,
        sigma: float,
        t_alice: float,
        t_bob: float,
        background_alice: float = 0.0,
        background_bob: float = 0.0,
    ) -> "GateLoad":
        return cls(
            mu_avg=mean_photons_per_gate(mu, sigma, t_alice, t_bob, background_alice, background_bob),
            background_alice=background_alice,
            background_bob=background_bob,
        )


def mean_photons_per_gate(
    mu: float,
    sigma: float,
    t_alice: float,
    t_bob: float,
    background_alice: float = 0.0,
    background_bob: float = 0.0,
) -> float:
    """Average photons per detector per gate; the 1/2 is the beam splitter."""
    if min(mu, sigma, t_alice, t_bob, background_alice, background_bob) < 0.0:
        raise ValueError("intensities, transmissions and backgrounds must be >= 0")
    if max(t_alice, t_bob) > 1.0:
        raise ValueError("transmissions must be <= 1")
    return ((mu + background_alice) * t_alice + (sigma + background_bob) * t_bob) / 2.0


def _series_last_gate(alpha: float, p_geo: float) -> int:
    # Largest k whose remaining tail alpha*(1-p)^(k+1) still exceeds the tolerance.
    if alpha <= SERIES_TAIL_TOL:
        return -1
    return int(math.ceil(math.log(SERIES_TAIL_TOL / alpha) / math.log1p(-p_geo))) - 1


def _per_detection_raw(
    mu_avg: float, eta_gate: float, p_dark_gate: float, alpha: float, p_geo: float, k_dead: int
) -> float:
    k_end = _series_last_gate(alpha, p_geo)
    if k_end < k_dead:
        return 0.0
    # Optical and dark-count survival per live gate; clamp for unphysically
    # bright illumination (a detection then happens in every gate).
    g_opt = max(0.0, 1.0 - mu_avg * eta_gate)
    g_dark = 1.0 - p_dark_gate
    ks = np.arange(k_dead, k_end + 1, dtype=float)
    p_k = alpha * p_geo * (1.0 - p_geo) ** ks
    survival = (g_opt * g_dark) ** (ks - k_dead)
    no_prior_afterpulse = np.empty_like(p_k)
    no_prior_afterpulse[0] = 1.0
    np.cumprod(1.0 - p_k[:-1], out=no_prior_afterpulse[1:])
    return float(np.sum(survival * no_prior_afterpulse * p_k))


def _per_bin_raw(
    mu_avg: float,
    eta_gate: float,
    p_dark_gate: float,
    bin_gate_ratio: float,
    alpha: float,
    p_geo: float,
    k_dead: int,
) -> float:
    p_det = _per_detection_raw(mu_avg, eta_gate, p_dark_gate, alpha, p_geo, k_dead)
    if p_det >= 1.0:
        raise NonPhysicalAfterpulseError(
            f"afterpulse probability per detection {p_det} >= 1; fit parameters are non-physical"
        )
    p_gate = (mu_avg * eta_gate + p_dark_gate) * p_det / (1.0 - p_det)
    return p_gate * bin_gate_ratio


def afterpulse_per_detection(params: DetectorParams, load: GateLoad) -> float:
    """Probability that a given detection event later causes an afterpulse.

    Sums the geometric afterpulse decay over the gates following the
    deadtime, weighting gate ``k`` by the probability that no optical
    detection, dark count or earlier afterpulse occurred in any live gate
    before it.  The sum is truncated once the remaining geometric envelope
    drops below ``SERIES_TAIL_TOL``.
    """
    return _per_detection_raw(
        load.mu_avg, params.eta_gate, params.p_dark_gate, params.alpha, params.p_geo, params.k_dead
    )


def afterpulse_per_bin(params: DetectorParams, load: GateLoad) -> float:
    """Afterpulse probability per time-bin for the given optical load.

    The per-gate rate accounts for afterpulses retriggering further
    afterpulses; the measured bin/gate dark-count ratio converts it to a
    per-bin probability.
    """
    return _per_bin_raw(
        load.mu_avg,
        params.eta_gate,
        params.p_dark_gate,
        params.bin_gate_ratio,
        params.alpha,
        params.p_geo,
        params.k_dead,
    )


def noise_per_bin(params: DetectorParams, load: GateLoad) -> float:
    """Total spurious-click probability per time-bin: dark counts plus afterpulsing."""
    return params.p_dark_bin + afterpulse_per_bin(params, load)


@dataclass(frozen=True)
class AfterpulseFit:
    alpha: float
    p_geo: float
    bin_gate_ratio: float
    residual_rms: float
    n_points: int


def fit_afterpulse(
    data: Sequence[tuple[float, float]],
    *,
    eta_gate: float,
    p_dark_bin: float,
    k_dead: int,
    x0: tuple[float, float, float] = (0.1, 0.05, 0.05),
) -> AfterpulseFit:
    """Fit (alpha, p_geo, bin_gate_ratio) to measured per-bin afterpulse rates.

    ``data`` holds ``(mu_avg, p_afterpulse_bin)`` points.  The deadtime and
    the dark-count level are fixed at their characterized values; only the
    three afterpulse parameters are free.  Residuals are relative, so the
    fit is insensitive to the order of magnitude of the measured values.
    """
    points = [(float(m), float(v)) for m, v in data]
    if len(points) < 3:
        raise ValueError(f"need at least 3 data points to fit 3 parameters, got {len(points)}")
    if any(v <= 0.0 for _, v in points):
        raise ValueError("measured afterpulse probabilities must be positive")

    measured = np.array([v for _, v in points])
    mu_avgs = [m for m, _ in points]

    def residuals(theta: np.ndarray) -> np.ndarray:
        alpha, p_geo, ratio = theta
        p_dark_gate = p_dark_bin / ratio
        try:
            predicted = np.array(
                [_per_bin_raw(m, eta_gate, p_dark_gate, ratio, alpha, p_geo, k_dead) for m in mu_avgs]
            )
        except NonPhysicalAfterpulseError:
            return np.full(len(points), 1e6)
        return predicted / measured - 1.0

    result = least_squares(
        residuals,
        x0=np.asarray(x0, dtype=float),
        bounds=([1e-8, 1e-6, 1e-8], [50.0, 0.999, 1.0]),
        xtol=1e-12,
        ftol=1e-12,
        gtol=1e-12,
    )
    rms = float(np.sqrt(np.mean(result.fun**2)))
    if not result.success:
        raise AfterpulseFitError(f"afterpulse fit failed to converge: {result.message}", rms)
    alpha, p_geo, ratio = (float(v) for v in result.x)
    return AfterpulseFit(
        alpha=alpha,
        p_geo=p_geo,
        bin_gate_ratio=ratio,
        residual_rms=rms,
        n_points=len(points),
    )
