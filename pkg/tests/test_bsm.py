import cmath
import math

import numpy as np
import pytest

from mdiqkd import bsm
from mdiqkd.bsm import TwoPhotonOutput
from mdiqkd.oracle import PhotonGroup, psi_minus_probability
from mdiqkd.states import Basis, PulseState, StateLabel, ideal_states

from conftest import random_pulse_state


def group_amps(state: PulseState, extra_phase: float = 0.0):
    denom = 1.0 + 2.0 * state.b
    return (
        math.sqrt((state.m + state.b) / denom),
        math.sqrt((1.0 - state.m + state.b) / denom) * cmath.exp(1j * (state.phi + extra_phase)),
    )


class TestSmallPhotonNumbers:
    def test_zero_photons(self):
        assert bsm.p_psiminus_given_0_photons(0.0) == 0.0
        assert bsm.p_psiminus_given_0_photons(0.5) == 0.5
        assert bsm.p_psiminus_given_0_photons(1.83e-5) == pytest.approx(6.7e-10, rel=1e-3)

    def test_one_photon(self):
        assert bsm.p_psiminus_given_1_photon(0.3, 0.0) == 0.0
        # With a blind detector the photon is irrelevant.
        assert bsm.p_psiminus_given_1_photon(0.0, 1e-3) == bsm.p_psiminus_given_0_photons(1e-3)
        value = bsm.p_psiminus_given_1_photon(0.145, 2e-5)
        assert value == pytest.approx(0.145 * 2e-5 + 2 * (1 - 0.145) * (2e-5) ** 2, rel=1e-12)
        assert value == pytest.approx(2.9007e-6, rel=1e-3)

    def test_two_photon_output_cases(self):
        assert bsm.p_psiminus_out_2photons(TwoPhotonOutput.TWO_PORTS_DIFF_BINS, 1.0, 0.0) == 1.0
        assert bsm.p_psiminus_out_2photons(TwoPhotonOutput.SAME_PORT, 1.0, 0.0) == 0.0
        assert bsm.p_psiminus_out_2photons(TwoPhotonOutput.TWO_PORTS_SAME_BIN, 1.0, 0.0) == 0.0
        # Hand expansion at eta=0.145, Pn=1e-4.
        eta, pn = 0.145, 1e-4
        miss2 = (1 - eta) ** 2
        assert bsm.p_psiminus_out_2photons(TwoPhotonOutput.SAME_PORT, eta, pn) == pytest.approx(
            (1 - miss2) * pn + miss2 * 2 * pn**2, rel=1e-14
        )
        assert bsm.p_psiminus_out_2photons(TwoPhotonOutput.TWO_PORTS_DIFF_BINS, eta, pn) == pytest.approx(
            eta**2 + 2 * eta * (1 - eta) * pn + miss2 * 2 * pn**2, rel=1e-14
        )


class TestTwoPhotonInputs:
    def test_noninterfering_orthogonal_z(self):
        states = ideal_states()
        assert bsm.p_psiminus_2photons_noninterfering(states.z0, states.z1, 1.0, 0.0) == pytest.approx(0.5)

    def test_noninterfering_identical_x(self):
        states = ideal_states()
        value = bsm.p_psiminus_2photons_noninterfering(states.x_plus, states.x_plus, 1.0, 0.0)
        assert value == pytest.approx(0.25)

    def test_noninterfering_dead_port(self):
        states = ideal_states()
        assert bsm.p_psiminus_2photons_noninterfering(states.x_plus, states.x_minus, 0.0, 0.0) == 0.0

    def test_interfering_bunching_forbids_pattern(self):
        states = ideal_states()
        assert bsm.p_psiminus_2photons_interfering(states.x_plus, states.x_plus, 0.0, 1.0, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_interfering_opposite_x(self):
        states = ideal_states()
        value = bsm.p_psiminus_2photons_interfering(states.x_plus, states.x_minus, math.pi, 1.0, 0.0)
        assert value == pytest.approx(0.5)

    def test_interfering_orthogonal_z(self):
        states = ideal_states()
        assert bsm.p_psiminus_2photons_interfering(states.z0, states.z1, 0.0, 1.0, 0.0) == pytest.approx(0.5)

    def test_visibility_endpoints_and_linearity(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            s1, s2 = random_pulse_state(rng), random_pulse_state(rng)
            dphi, eta, pn = rng.uniform(0, 7), rng.uniform(0, 1), rng.uniform(0, 0.3)
            interf = bsm.p_psiminus_2photons_interfering(s1, s2, dphi, eta, pn)
            distinct = bsm.p_psiminus_2photons_noninterfering(s1, s2, eta, pn)
            assert bsm.p_psiminus_2photons_visibility(s1, s2, dphi, 1.0, eta, pn) == pytest.approx(interf, rel=1e-12)
            assert bsm.p_psiminus_2photons_visibility(s1, s2, dphi, 0.0, eta, pn) == pytest.approx(distinct, rel=1e-12)
            v = float(rng.uniform(0, 1))
            assert bsm.p_psiminus_2photons_visibility(s1, s2, dphi, v, eta, pn) == pytest.approx(
                v * interf + (1 - v) * distinct, rel=1e-12
            )

    def test_partial_visibility_hom_floor(self):
        # Identical ideal x states at V=0.94: only the distinguishable branch
        # contributes, 0.06 * 0.25.
        states = ideal_states()
        value = bsm.p_psiminus_2photons_visibility(states.x_plus, states.x_plus, 0.0, 0.94, 1.0, 0.0)
        assert value == pytest.approx(0.06 * 0.25, rel=1e-12)


class TestThreePhotonInputs:
    def test_rejects_bad_splits(self):
        states = ideal_states()
        with pytest.raises(ValueError, match="split"):
            bsm.p_psiminus_3photons([states.z0] * 2, [states.z0] * 2, 0.0, 1.0, 0.5, 0.0)
        with pytest.raises(ValueError, match="split"):
            bsm.p_psiminus_3photons([states.z0], [], 0.0, 1.0, 0.5, 0.0)

    def test_rejects_mixed_states_in_one_pulse(self):
        states = ideal_states()
        with pytest.raises(ValueError, match="identical"):
            bsm.p_psiminus_3photons([states.z0, states.z1], [states.z0], 0.0, 1.0, 0.5, 0.0)

    def test_blind_detectors_reduce_to_noise_case(self):
        states = ideal_states()
        assert bsm.p_psiminus_3photons([states.x_plus] * 2, [states.x_plus], 0.0, 1.0, 0.0, 0.0) == 0.0

    def test_single_temporal_mode_cannot_form_pattern(self):
        states = ideal_states()
        assert bsm.p_psiminus_3photons([states.z0] * 3, [], 0.0, 1.0, 1.0, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_three_identical_ideal_x_photons(self):
        # Frozen from the exact enumeration: 8 of 64 amplitude-weighted
        # occupancies complete the pattern.
        states = ideal_states()
        value = bsm.p_psiminus_3photons([states.x_plus] * 2, [states.x_plus], 0.0, 1.0, 1.0, 0.0)
        assert value == pytest.approx(0.125, abs=1e-14)


class TestOracleEquivalence:
    """Every analytic case must match the exact Fock enumeration."""

    @pytest.mark.parametrize("deadtime_free", [False, True])
    def test_all_photon_splits_randomized(self, deadtime_free):
        rng = np.random.default_rng(7)
        for _ in range(60):
            s1, s2 = random_pulse_state(rng), random_pulse_state(rng)
            eta = float(rng.uniform(0.0, 1.0))
            pn = float(rng.uniform(0.0, 0.4))
            v = float(rng.uniform(0.0, 1.0))
            dphi = s1.phi - s2.phi

            def oracle(n_a, n_b, sector_b):
                groups = []
                if n_a:
                    groups.append(PhotonGroup(0, n_a, *group_amps(s1)))
                if n_b:
                    groups.append(PhotonGroup(1, n_b, *group_amps(s2), sector=sector_b))
                return psi_minus_probability(groups, eta, pn, deadtime_free)

            def mixed(n_a, n_b):
                return v * oracle(n_a, n_b, 0) + (1 - v) * oracle(n_a, n_b, 1)

            checks = [
                (bsm.eval_quad(bsm.quad_0_photons(), pn), oracle(0, 0, 0)),
                (bsm.eval_quad(bsm.quad_1_photon(eta), pn), oracle(1, 0, 0)),
                (bsm.eval_quad(bsm.quad_1_photon(eta), pn), oracle(0, 1, 0)),
                (bsm.eval_quad(bsm.quad_same_pulse(s1, 2, eta, deadtime_free), pn), oracle(2, 0, 0)),
                (bsm.eval_quad(bsm.quad_same_pulse(s2, 3, eta, deadtime_free), pn), oracle(0, 3, 0)),
                (bsm.p_psiminus_2photons_visibility(s1, s2, dphi, v, eta, pn, deadtime_free), mixed(1, 1)),
                (bsm.p_psiminus_3photons([s1] * 2, [s2], dphi, v, eta, pn, deadtime_free), mixed(2, 1)),
                (bsm.p_psiminus_3photons([s1], [s2] * 2, dphi, v, eta, pn, deadtime_free), mixed(1, 2)),
            ]
            for analytic, exact in checks:
                assert analytic == pytest.approx(exact, rel=1e-9, abs=1e-15)


class TestGlobalProperties:
    def test_values_stay_in_unit_interval(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            s1, s2 = random_pulse_state(rng), random_pulse_state(rng)
            eta, pn, v = rng.uniform(0, 1), rng.uniform(0, 0.5), rng.uniform(0, 1)
            dphi = float(rng.uniform(-5, 5))
            values = [
                bsm.p_psiminus_given_0_photons(pn),
                bsm.p_psiminus_given_1_photon(eta, pn),
                bsm.p_psiminus_2photons_visibility(s1, s2, dphi, v, eta, pn),
                bsm.p_psiminus_3photons([s1] * 2, [s2], dphi, v, eta, pn),
                bsm.p_psiminus_3photons([s2] * 3, [], dphi, v, eta, pn),
            ]
            for value in values:
                assert -1e-12 <= value <= 1.0 + 1e-12

    def test_interference_irrelevant_for_orthogonal_temporal_modes(self):
        # With no same-bin coincidence weight the interfering and
        # non-interfering branches describe the same physics, for any
        # efficiency and noise level.
        rng = np.random.default_rng(10)
        s_early = PulseState(1.0, 0.0, 0.0, Basis.Z, StateLabel.KET0)
        s_late = PulseState(0.0, 0.0, 0.0, Basis.Z, StateLabel.KET1)
        for _ in range(50):
            eta, pn = float(rng.uniform(0, 1)), float(rng.uniform(0, 0.4))
            dphi = float(rng.uniform(-5, 5))
            interf = bsm.p_psiminus_2photons_interfering(s_early, s_late, dphi, eta, pn)
            distinct = bsm.p_psiminus_2photons_noninterfering(s_early, s_late, eta, pn)
            assert interf == pytest.approx(distinct, rel=1e-12, abs=1e-15)

    def test_blind_detector_reduces_every_case_to_noise(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            s1, s2 = random_pulse_state(rng), random_pulse_state(rng)
            pn = float(rng.uniform(0, 0.4))
            noise_only = bsm.p_psiminus_given_0_photons(pn)
            assert bsm.p_psiminus_given_1_photon(0.0, pn) == pytest.approx(noise_only, rel=1e-12)
            assert bsm.p_psiminus_2photons_visibility(s1, s2, 0.3, 0.7, 0.0, pn) == pytest.approx(noise_only, rel=1e-12)
            assert bsm.p_psiminus_3photons([s1] * 2, [s2], 0.3, 0.7, 0.0, pn) == pytest.approx(noise_only, rel=1e-12)
