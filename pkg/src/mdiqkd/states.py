"""Prepared time-bin pulse states and the pairwise beam-splitter mode algebra.

A source emits weak pulses whose single-photon component occupies a
superposition of an early and a late temporal mode.  The preparation is
parameterized by a mode weight ``m`` (1 = all early, 0 = all late), a
background weight ``b`` for light leaking through the intensity modulator,
and a relative phase ``phi``.  Everything downstream (interference
coefficients, gains, error rates) is a pure function of these parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Basis(Enum):
    Z = "z"
    X = "x"


class StateLabel(Enum):
    KET0 = "z0"
    KET1 = "z1"
    KET_PLUS = "x_plus"
    KET_MINUS = "x_minus"


@dataclass(frozen=True)
class PulseState:
    """One party's prepared time-bin state.

    ``m`` is the dimensionless mode weight in [0, 1], ``b`` the non-negative
    background weight and ``phi`` the relative phase between the early and
    late temporal modes, in radians.
    """

    m: float
    b: float
    phi: float
    basis: Basis
    label: StateLabel

    def __post_init__(self) -> None:
        if not 0.0 <= self.m <= 1.0:
            raise ValueError(f"mode weight m={self.m} outside [0, 1]")
        if self.b < 0.0:
            raise ValueError(f"background weight b={self.b} must be >= 0")


def amplitude_probabilities(state: PulseState) -> tuple[float, float]:
    """Probabilities of finding the photon in the early / late temporal mode.

    Returns ``((m + b) / (1 + 2b), (1 - m + b) / (1 + 2b))``; the two always
    sum to one.
    """
    denom = 1.0 + 2.0 * state.b
    return (state.m + state.b) / denom, (1.0 - state.m + state.b) / denom


@dataclass(frozen=True)
class ModeJointProbs:
    """Unnormalized joint temporal-mode weights for a photon pair.

    ``p_ij`` is proportional to finding photon one in temporal mode ``i``
    and photon two in mode ``j`` (0 = early, 1 = late).  The four weights
    sum exactly to the normalization factor ``norm``.
    """

    p00: float
    p01: float
    p10: float
    p11: float
    norm: float


def joint_mode_probs(s1: PulseState, s2: PulseState) -> ModeJointProbs:
    """Joint early/late weights of two prepared photons, before the splitter."""
    e1, l1 = s1.m + s1.b, 1.0 - s1.m + s1.b
    e2, l2 = s2.m + s2.b, 1.0 - s2.m + s2.b
    norm = (1.0 + 2.0 * s1.b) * (1.0 + 2.0 * s2.b)
    return ModeJointProbs(p00=e1 * e2, p01=e1 * l2, p10=l1 * e2, p11=l1 * l2, norm=norm)


@dataclass(frozen=True)
class InterferenceCoeffs:
    """Output-case weights for a photon pair on the 50/50 beam splitter.

    For a non-interfering (distinguishable) pair the photons leave through a
    single output port with weight exactly 1/2; ``distinct_same_bin`` and
    ``distinct_cross_bin`` split the remaining half between coincidences in
    the same and in different time bins.  For an interfering
    (indistinguishable) pair, same-bin coincidences are impossible:
    ``bunched`` is the weight for both photons exiting one port and
    ``coincident`` the weight for a cross-port, cross-bin coincidence.
    """

    distinct_same_bin: float
    distinct_cross_bin: float
    bunched: float
    coincident: float


def interference_coeffs(s1: PulseState, s2: PulseState, delta_phi: float) -> InterferenceCoeffs:
    """Beam-splitter output-case weights for the pair ``(s1, s2)``.

    ``delta_phi`` is the relative preparation phase ``phi1 - phi2`` plus any
    additional differential phase (e.g. a laser frequency drift draw); it is
    passed explicitly rather than read from the states so such perturbations
    can be injected.
    """
    jp = joint_mode_probs(s1, s2)
    same = (jp.p00 + jp.p11) / (2.0 * jp.norm)
    cross = (jp.p01 + jp.p10) / (2.0 * jp.norm)
    hom = math.sqrt(jp.p01 * jp.p10) * math.cos(delta_phi) / jp.norm
    bunched = (jp.p00 + jp.p11 + 0.5 * (jp.p01 + jp.p10)) / jp.norm + hom
    coincident = 0.5 * (jp.p01 + jp.p10) / jp.norm - hom
    return InterferenceCoeffs(
        distinct_same_bin=same,
        distinct_cross_bin=cross,
        bunched=bunched,
        coincident=coincident,
    )


@dataclass(frozen=True)
class StateSet:
    """The four prepared states of one party: two per basis."""

    z0: PulseState
    z1: PulseState
    x_plus: PulseState
    x_minus: PulseState

    def pair_choices(self, basis: Basis) -> tuple[PulseState, PulseState]:
        if basis is Basis.Z:
            return self.z0, self.z1
        return self.x_plus, self.x_minus


def ideal_states() -> StateSet:
    """Perfectly prepared BB84 state set (no background, no ringing)."""
    return StateSet(
        z0=PulseState(1.0, 0.0, 0.0, Basis.Z, StateLabel.KET0),
        z1=PulseState(0.0, 0.0, 0.0, Basis.Z, StateLabel.KET1),
        x_plus=PulseState(0.5, 0.0, 0.0, Basis.X, StateLabel.KET_PLUS),
        x_minus=PulseState(0.5, 0.0, math.pi, Basis.X, StateLabel.KET_MINUS),
    )
