"""Conditional probabilities of the relay announcing a singlet projection.

The relay announces a singlet whenever one detector clicks in the early
time-bin and the other in the late one.  This module gives that probability
conditioned on every beam-splitter input with up to three photons, for
arbitrary prepared states, detector efficiency ``eta`` and per-bin noise
probability ``noise``.

Conventions follow the regime of heavily attenuated pulses: spurious clicks
only ever complete a pattern (no-noise survival factors of order
``1 - noise`` are dropped), and a gated detector reports at most one click
per gate, in the earliest time-bin where something fired.  Every conditional
probability is therefore an exact quadratic polynomial in ``noise``, which
the gain aggregation exploits.

Two-photon inputs use closed-form case weights; three-photon inputs are
computed by evolving the input through the 50/50 splitter and enumerating
the output occupancies.  Both routes are validated against the exact
Fock-space oracle.
"""

from __future__ import annotations

from enum import Enum
from math import cos, sqrt
from typing import Iterable, Mapping, Sequence

from .states import PulseState, amplitude_probabilities, interference_coeffs

# A conditional probability as coefficients (a, b, c): value = a + b*Pn + c*Pn**2.
NoiseQuad = tuple[float, float, float]

# Output occupancy (n_early, n_late) per detector, detector 1 first.
Occupancy = tuple[int, int, int, int]


class TwoPhotonOutput(Enum):
    """Beam-splitter output cases for a two-photon input."""

    SAME_PORT = "same_port"
    TWO_PORTS_SAME_BIN = "two_ports_same_bin"
    TWO_PORTS_DIFF_BINS = "two_ports_diff_bins"


def eval_quad(quad: NoiseQuad, noise: float) -> float:
    a, b, c = quad
    return a + noise * (b + noise * c)


# ---------------------------------------------------------------------------
# Detector response for a fixed output occupancy
# ---------------------------------------------------------------------------


def _report_probs(n_early: int, n_late: int, eta: float, deadtime_free: bool) -> tuple[float, float, float]:
    """Per-detector probabilities of a photon-driven early / late report.

    Returns ``(early, late, silent)`` where ``silent`` is the probability
    that no photon was detected at all.  A gated detector reports the
    earliest bin containing a detected photon; in the deadtime-free variant
    an early-only report additionally requires every late photon to be
    missed.
    """
    miss = 1.0 - eta
    silent = miss ** (n_early + n_late)
    some_early = 1.0 - miss**n_early
    late = miss**n_early * (1.0 - miss**n_late)
    if deadtime_free:
        early = some_early * miss**n_late
    else:
        early = some_early
    return early, late, silent


def pattern_quad(occ: Occupancy, eta: float, deadtime_free: bool = False) -> NoiseQuad:
    """Singlet-pattern probability for one output occupancy, as a noise polynomial.

    A silent detector is completed by a spurious click in whichever bin the
    pattern requires, with probability ``noise`` per bin.
    """
    e1, l1, s1 = _report_probs(occ[0], occ[1], eta, deadtime_free)
    e2, l2, s2 = _report_probs(occ[2], occ[3], eta, deadtime_free)
    return (
        e1 * l2 + l1 * e2,
        e1 * s2 + s1 * l2 + l1 * s2 + s1 * e2,
        2.0 * s1 * s2,
    )


def quad_from_occupancies(
    occ_probs: Mapping[Occupancy, float] | Iterable[tuple[Occupancy, float]],
    eta: float,
    deadtime_free: bool = False,
) -> NoiseQuad:
    items = occ_probs.items() if isinstance(occ_probs, Mapping) else occ_probs
    a = b = c = 0.0
    for occ, w in items:
        qa, qb, qc = pattern_quad(occ, eta, deadtime_free)
        a += w * qa
        b += w * qb
        c += w * qc
    return a, b, c


# ---------------------------------------------------------------------------
# Output occupancy distributions
# ---------------------------------------------------------------------------


def routing_occupancies(bin_probs: Sequence[tuple[float, float]]) -> dict[Occupancy, float]:
    """Occupancy distribution when every photon routes independently.

    Each photon exits through either port with probability 1/2 and lands in
    a bin according to its own ``(p_early, p_late)``.  This is exact for
    photons that do not interfere with each other, and also for any number
    of identical photons entering through a single port.
    """
    occs: dict[Occupancy, float] = {(0, 0, 0, 0): 1.0}
    for p_early, p_late in bin_probs:
        cell_weights = (0.5 * p_early, 0.5 * p_late, 0.5 * p_early, 0.5 * p_late)
        nxt: dict[Occupancy, float] = {}
        for occ, w in occs.items():
            for cell, cw in enumerate(cell_weights):
                if cw == 0.0:
                    continue
                new = list(occ)
                new[cell] += 1
                key = tuple(new)
                nxt[key] = nxt.get(key, 0.0) + w * cw
        occs = nxt
    return occs


def interfering_pair_occupancies(
    bins1: tuple[float, float], bins2: tuple[float, float], cos_dphi: float
) -> dict[Occupancy, float]:
    """Output occupancies for one indistinguishable photon per input port.

    Same-bin coincidences vanish; the phase-sensitive terms carry
    ``cos(delta_phi)`` between the two preparations.
    """
    p, q = bins1
    r, s = bins2
    g = sqrt(p * q * r * s) * cos_dphi
    plus = (p * s + q * r + 2.0 * g) / 4.0
    minus = (p * s + q * r - 2.0 * g) / 4.0
    return {
        (2, 0, 0, 0): p * r / 2.0,
        (0, 2, 0, 0): q * s / 2.0,
        (0, 0, 2, 0): p * r / 2.0,
        (0, 0, 0, 2): q * s / 2.0,
        (1, 1, 0, 0): plus,
        (0, 0, 1, 1): plus,
        (1, 0, 0, 1): minus,
        (0, 1, 1, 0): minus,
    }


def pair_plus_one_occupancies(
    pair_bins: tuple[float, float], single_bins: tuple[float, float], cos_dphi: float
) -> dict[Occupancy, float]:
    """Output occupancies for two identical photons in one port and an
    indistinguishable third photon in the other.

    Derived by evolving the three-photon input through the 50/50 unitary and
    collecting the squared amplitudes per occupancy.  ``cos_dphi`` carries
    the relative preparation phase between the pair and the lone photon; the
    distribution is symmetric under exchanging the two output ports.
    """
    p, q = pair_bins
    r, s = single_bins
    g = sqrt(p * q * r * s) * cos_dphi
    # Mixed-bin weights within the heavy port interfere with the lone photon.
    heavy_ee = (4.0 * p * q * r + p * p * s + 4.0 * p * g) / 8.0
    heavy_ll = (q * q * r + 4.0 * p * q * s + 4.0 * q * g) / 8.0
    anti_ee = (4.0 * p * q * r + p * p * s - 4.0 * p * g) / 8.0
    anti_ll = (q * q * r + 4.0 * p * q * s - 4.0 * q * g) / 8.0
    return {
        # All three photons in one port.
        (3, 0, 0, 0): 3.0 * p * p * r / 8.0,
        (0, 3, 0, 0): 3.0 * q * q * s / 8.0,
        (0, 0, 3, 0): 3.0 * p * p * r / 8.0,
        (0, 0, 0, 3): 3.0 * q * q * s / 8.0,
        (2, 1, 0, 0): heavy_ee,
        (1, 2, 0, 0): heavy_ll,
        (0, 0, 2, 1): heavy_ee,
        (0, 0, 1, 2): heavy_ll,
        # Two photons one port, one in the other, same bin throughout.
        (2, 0, 1, 0): p * p * r / 8.0,
        (1, 0, 2, 0): p * p * r / 8.0,
        (0, 2, 0, 1): q * q * s / 8.0,
        (0, 1, 0, 2): q * q * s / 8.0,
        # Split across ports with mixed bins: phase-sensitive.
        (2, 0, 0, 1): anti_ee,
        (0, 1, 2, 0): anti_ee,
        (1, 0, 0, 2): anti_ll,
        (0, 2, 1, 0): anti_ll,
        # One bin per port pair: destructive cross terms cancel the phase.
        (1, 1, 1, 0): p * p * s / 4.0,
        (1, 0, 1, 1): p * p * s / 4.0,
        (1, 1, 0, 1): q * q * r / 4.0,
        (0, 1, 1, 1): q * q * r / 4.0,
    }


# ---------------------------------------------------------------------------
# Conditional singlet probabilities, zero to two photons
# ---------------------------------------------------------------------------


def quad_0_photons() -> NoiseQuad:
    return (0.0, 0.0, 2.0)


def quad_1_photon(eta: float) -> NoiseQuad:
    return (0.0, eta, 2.0 * (1.0 - eta))


def quad_out_2photons(case: TwoPhotonOutput, eta: float) -> NoiseQuad:
    miss2 = (1.0 - eta) ** 2
    if case is TwoPhotonOutput.SAME_PORT:
        return (0.0, 1.0 - miss2, 2.0 * miss2)
    if case is TwoPhotonOutput.TWO_PORTS_SAME_BIN:
        return (0.0, 2.0 * eta * (1.0 - eta), 2.0 * miss2)
    return (eta * eta, 2.0 * eta * (1.0 - eta), 2.0 * miss2)


def _add(*quads: NoiseQuad) -> NoiseQuad:
    return (
        sum(q[0] for q in quads),
        sum(q[1] for q in quads),
        sum(q[2] for q in quads),
    )


def _scale(w: float, quad: NoiseQuad) -> NoiseQuad:
    return (w * quad[0], w * quad[1], w * quad[2])


def quad_2photons_noninterfering(
    s1: PulseState, s2: PulseState, eta: float, deadtime_free: bool = False
) -> NoiseQuad:
    if deadtime_free:
        occs = routing_occupancies([amplitude_probabilities(s1), amplitude_probabilities(s2)])
        return quad_from_occupancies(occs, eta, deadtime_free=True)
    coeffs = interference_coeffs(s1, s2, 0.0)
    return _add(
        _scale(0.5, quad_out_2photons(TwoPhotonOutput.SAME_PORT, eta)),
        _scale(coeffs.distinct_same_bin, quad_out_2photons(TwoPhotonOutput.TWO_PORTS_SAME_BIN, eta)),
        _scale(coeffs.distinct_cross_bin, quad_out_2photons(TwoPhotonOutput.TWO_PORTS_DIFF_BINS, eta)),
    )


def quad_2photons_interfering(
    s1: PulseState, s2: PulseState, delta_phi: float, eta: float, deadtime_free: bool = False
) -> NoiseQuad:
    if deadtime_free:
        occs = interfering_pair_occupancies(
            amplitude_probabilities(s1), amplitude_probabilities(s2), cos(delta_phi)
        )
        return quad_from_occupancies(occs, eta, deadtime_free=True)
    coeffs = interference_coeffs(s1, s2, delta_phi)
    return _add(
        _scale(coeffs.bunched, quad_out_2photons(TwoPhotonOutput.SAME_PORT, eta)),
        _scale(coeffs.coincident, quad_out_2photons(TwoPhotonOutput.TWO_PORTS_DIFF_BINS, eta)),
    )


def quad_2photons_visibility(
    s1: PulseState,
    s2: PulseState,
    delta_phi: float,
    visibility: float,
    eta: float,
    deadtime_free: bool = False,
) -> NoiseQuad:
    interf = quad_2photons_interfering(s1, s2, delta_phi, eta, deadtime_free)
    distinct = quad_2photons_noninterfering(s1, s2, eta, deadtime_free)
    return _add(_scale(visibility, interf), _scale(1.0 - visibility, distinct))


def quad_same_pulse(state: PulseState, n: int, eta: float, deadtime_free: bool = False) -> NoiseQuad:
    """n identical photons from one pulse entering through a single port."""
    occs = routing_occupancies([amplitude_probabilities(state)] * n)
    return quad_from_occupancies(occs, eta, deadtime_free)


def quad_3photons(
    port_a_states: Sequence[PulseState],
    port_b_states: Sequence[PulseState],
    delta_phi: float,
    visibility: float,
    eta: float,
    deadtime_free: bool = False,
) -> NoiseQuad:
    """Three photons split across the two input ports.

    Photons sharing a port come from one pulse and must be identically
    prepared; the visibility mixes the branch where the lone cross-port
    photon interferes with the pair against the branch where it is fully
    distinguishable.  ``delta_phi`` is the port-a minus port-b preparation
    phase.
    """
    na, nb = len(port_a_states), len(port_b_states)
    if na + nb != 3 or (na, nb) not in ((3, 0), (2, 1), (1, 2), (0, 3)):
        raise ValueError(f"unsupported photon split ({na}, {nb}); need three photons over two ports")
    for group in (port_a_states, port_b_states):
        if any(s != group[0] for s in group[1:]):
            raise ValueError("photons sharing an input port come from one pulse and must be identical")

    if nb == 0:
        return quad_same_pulse(port_a_states[0], 3, eta, deadtime_free)
    if na == 0:
        return quad_same_pulse(port_b_states[0], 3, eta, deadtime_free)

    # cos is even, so which port holds the pair only swaps its two bin
    # weights into the first argument slot.
    if na == 2:
        pair, single = port_a_states[0], port_b_states[0]
    else:
        pair, single = port_b_states[0], port_a_states[0]
    pair_bins, single_bins = amplitude_probabilities(pair), amplitude_probabilities(single)

    interf = quad_from_occupancies(
        pair_plus_one_occupancies(pair_bins, single_bins, cos(delta_phi)), eta, deadtime_free
    )
    distinct = quad_from_occupancies(
        routing_occupancies([pair_bins, pair_bins, single_bins]), eta, deadtime_free
    )
    return _add(_scale(visibility, interf), _scale(1.0 - visibility, distinct))


# ---------------------------------------------------------------------------
# Public probability operations
# ---------------------------------------------------------------------------


def p_psiminus_given_0_photons(noise: float) -> float:
    """Singlet pattern from noise alone: two spurious clicks."""
    return eval_quad(quad_0_photons(), noise)


def p_psiminus_given_1_photon(eta: float, noise: float) -> float:
    """One photon at the splitter: its click plus one complementary noise click."""
    return eval_quad(quad_1_photon(eta), noise)


def p_psiminus_out_2photons(case: TwoPhotonOutput, eta: float, noise: float) -> float:
    """Singlet probability for each two-photon output case of the splitter."""
    return eval_quad(quad_out_2photons(case, eta), noise)


def p_psiminus_2photons_noninterfering(
    s1: PulseState, s2: PulseState, eta: float, noise: float, deadtime_free: bool = False
) -> float:
    """Two distinguishable photons (or two from the same pulse)."""
    return eval_quad(quad_2photons_noninterfering(s1, s2, eta, deadtime_free), noise)


def p_psiminus_2photons_interfering(
    s1: PulseState, s2: PulseState, delta_phi: float, eta: float, noise: float, deadtime_free: bool = False
) -> float:
    """One indistinguishable photon per port; bunching suppresses same-bin coincidences."""
    return eval_quad(quad_2photons_interfering(s1, s2, delta_phi, eta, deadtime_free), noise)


def p_psiminus_2photons_visibility(
    s1: PulseState,
    s2: PulseState,
    delta_phi: float,
    visibility: float,
    eta: float,
    noise: float,
    deadtime_free: bool = False,
) -> float:
    """Partial indistinguishability: linear mix of the two-photon branches."""
    return eval_quad(quad_2photons_visibility(s1, s2, delta_phi, visibility, eta, deadtime_free), noise)


def p_psiminus_3photons(
    port_a_states: Sequence[PulseState],
    port_b_states: Sequence[PulseState],
    delta_phi: float,
    visibility: float,
    eta: float,
    noise: float,
    deadtime_free: bool = False,
) -> float:
    """Three photons at the splitter, split (3,0), (2,1), (1,2) or (0,3)."""
    return eval_quad(
        quad_3photons(port_a_states, port_b_states, delta_phi, visibility, eta, deadtime_free), noise
    )
