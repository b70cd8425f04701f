"""Three-intensity decoy-state bounds and the secret key rate.

From gains measured (or modeled) at the signal, decoy and vacuum
intensities, the protocol bounds the yield and error rate of the events
where both parties emitted exactly one photon.  Both channels are assumed to
share one transmission, so both parties use the same three intensities.

``q11_lower`` returns a lower bound on the single-photon *yield* (the
occurrence weight is divided out); to enter the key-rate formula it is
multiplied back by the probability that both signal pulses carried one
photon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

from .link import poisson_pn
from .states import Basis

# Gains/errors are keyed by the (alice, bob) intensity roles:
# "s" signal, "d" decoy, "v" vacuum.
IntensityKey = tuple[str, str]

Q11_KEYS = (("s", "s"), ("d", "d"), ("v", "d"), ("d", "v"), ("v", "s"), ("s", "v"), ("v", "v"))
E11_KEYS = (("d", "d"), ("v", "d"), ("d", "v"), ("v", "v"))


class MissingGainCellError(KeyError):
    """A required intensity-pair cell is absent from the supplied gains."""


class DegenerateBoundError(ValueError):
    """The single-photon yield bound vanished, so no error bound exists."""


@dataclass(frozen=True)
class IntensityTriple:
    """Signal, decoy and vacuum mean photon numbers (vacuum is exactly zero)."""

    signal: float
    decoy: float
    vacuum: float = 0.0

    def __post_init__(self) -> None:
        if self.vacuum != 0.0:
            raise ValueError("the vacuum intensity is zero by definition in this protocol")
        if not 0.0 == self.vacuum < self.decoy < self.signal:
            raise ValueError(
                f"intensities must satisfy 0 = vacuum < decoy < signal, got {self}"
            )

    def value(self, key: str) -> float:
        return {"s": self.signal, "d": self.decoy, "v": self.vacuum}[key]


def binary_entropy(x: float) -> float:
    """Binary entropy in bits, continuous at the endpoints."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def _require(cells: Mapping[IntensityKey, float], keys: tuple[IntensityKey, ...]) -> None:
    missing = [k for k in keys if k not in cells]
    if missing:
        raise MissingGainCellError(f"missing intensity cells: {missing}")


def q11_lower(
    gains: Mapping[IntensityKey, float],
    triple: IntensityTriple,
    distribution: Callable[[int, float], float] = poisson_pn,
) -> float:
    """Lower bound on the single-photon yield from the three-intensity gains.

    ``gains`` holds the basis's measured gain per intensity pair.  The bound
    removes the zero-photon contributions from the decoy-decoy and
    signal-signal gains and combines them so every multi-photon term enters
    with a non-positive weight.  Negative results clamp to zero.
    """
    _require(gains, Q11_KEYS)
    tau_s, tau_d = triple.signal, triple.decoy
    d1s, d2s = distribution(1, tau_s), distribution(2, tau_s)
    d1d, d2d = distribution(1, tau_d), distribution(2, tau_d)
    d0s, d0d = distribution(0, tau_s), distribution(0, tau_d)
    denominator = d1s * d1d * (d1d * d2s - d1s * d2d)
    if denominator <= 0.0:
        raise ValueError(
            "decoy bound denominator is not positive; the photon-number "
            "distribution does not satisfy the bound's weight ordering"
        )
    q0_decoy = d0d * gains[("v", "d")] + d0d * gains[("d", "v")] - d0d**2 * gains[("v", "v")]
    q0_signal = d0s * gains[("v", "s")] + d0s * gains[("s", "v")] - d0s**2 * gains[("v", "v")]
    numerator = d1s * d2s * (gains[("d", "d")] - q0_decoy) - d1d * d2d * (
        gains[("s", "s")] - q0_signal
    )
    return max(0.0, numerator / denominator)


def e11x_upper(
    gains_x: Mapping[IntensityKey, float],
    errors_x: Mapping[IntensityKey, float],
    triple: IntensityTriple,
    q11x_lower: float,
    distribution: Callable[[int, float], float] = poisson_pn,
) -> float:
    """Upper bound on the single-photon x-basis error rate.

    Attributes every error among the decoy-decoy announcements (after
    removing zero-photon cells) to the one-photon-each events; using a lower
    bound for the single-photon yield keeps the result an upper bound.
    """
    _require(gains_x, E11_KEYS)
    _require(errors_x, E11_KEYS)
    if q11x_lower <= 0.0:
        raise DegenerateBoundError("single-photon yield bound is zero; error bound undefined")
    d0d, d1d = distribution(0, triple.decoy), distribution(1, triple.decoy)

    def ew(key: IntensityKey) -> float:
        return errors_x[key] * gains_x[key]

    numerator = ew(("d", "d")) - d0d * ew(("v", "d")) - d0d * ew(("d", "v")) + d0d**2 * ew(("v", "v"))
    return max(0.0, numerator / (d1d**2 * q11x_lower))


def secret_key_rate(
    q11z: float, e11x: float, gain_z_signal: float, error_z_signal: float, f: float
) -> float:
    """Secret key bits per pulse pair; raw value, not clamped at zero.

    ``q11z`` is the single-photon gain in the key basis, ``e11x`` the
    single-photon error rate in the check basis, and the last two terms pay
    for error correction at efficiency ``f`` on the signal-signal key.
    """
    if f < 1.0:
        raise ValueError("error correction efficiency must be >= 1")
    for name, value in (("q11z", q11z), ("gain_z_signal", gain_z_signal), ("error_z_signal", error_z_signal)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name}={value} outside [0, 1]")
    if e11x < 0.0:
        raise ValueError(f"e11x={e11x} must be >= 0")
    # An error bound at or beyond 1/2 certifies nothing: no privacy
    # amplification credit, rather than the (meaningless) algebraic value.
    secure = q11z * (1.0 - binary_entropy(e11x)) if e11x < 0.5 else 0.0
    return secure - gain_z_signal * f * binary_entropy(error_z_signal)


@dataclass(frozen=True)
class DecoyKeyRateResult:
    """Bounds and key rate derived from one set of intensity-pair cells."""

    q11_lower_z: float
    q11_lower_x: float
    e11x_upper: float
    secret_rate: float
    cells: Mapping[tuple[str, str, Basis], tuple[float, float]]


def key_rate_from_cells(
    cells: Mapping[tuple[str, str, Basis], tuple[float, float]],
    triple: IntensityTriple,
    f: float,
    distribution: Callable[[int, float], float] = poisson_pn,
) -> DecoyKeyRateResult:
    """Compose the decoy bounds and key rate from per-cell (gain, error) data.

    ``cells`` maps ``(alice_role, bob_role, basis)`` to the measured or
    modeled gain and error rate for that intensity pair.
    """
    gains_z = {(a, b): ge[0] for (a, b, basis), ge in cells.items() if basis is Basis.Z}
    gains_x = {(a, b): ge[0] for (a, b, basis), ge in cells.items() if basis is Basis.X}
    errors_x = {(a, b): ge[1] for (a, b, basis), ge in cells.items() if basis is Basis.X}
    y11z = q11_lower(gains_z, triple, distribution)
    y11x = q11_lower(gains_x, triple, distribution)
    if y11x > 0.0:
        e11x = e11x_upper(gains_x, errors_x, triple, y11x, distribution)
    else:
        e11x = 1.0  # certifies nothing
    q11z_gain = distribution(1, triple.signal) ** 2 * y11z
    gain_zss, error_zss = cells[("s", "s", Basis.Z)]
    rate = secret_key_rate(q11z_gain, e11x, gain_zss, error_zss, f)
    return DecoyKeyRateResult(
        q11_lower_z=y11z,
        q11_lower_x=y11x,
        e11x_upper=e11x,
        secret_rate=rate,
        cells=dict(cells),
    )
