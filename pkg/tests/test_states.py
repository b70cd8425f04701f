import math

import numpy as np
import pytest

from mdiqkd.states import (
    Basis,
    PulseState,
    StateLabel,
    amplitude_probabilities,
    ideal_states,
    interference_coeffs,
    joint_mode_probs,
)

from conftest import random_pulse_state


def _state(m, b, phi=0.0, basis=Basis.X):
    return PulseState(m=m, b=b, phi=phi, basis=basis, label=StateLabel.KET_PLUS)


class TestAmplitudeProbabilities:
    def test_pure_early_mode(self):
        assert amplitude_probabilities(_state(1.0, 0.0)) == (1.0, 0.0)

    def test_balanced_superposition(self):
        assert amplitude_probabilities(_state(0.5, 0.0)) == (0.5, 0.5)

    def test_characterized_early_state(self):
        # m=0.9944, b=7.12e-3: expected values from independent hand arithmetic.
        early, late = amplitude_probabilities(_state(0.9944, 7.12e-3))
        assert early == pytest.approx(0.9874585896829152, abs=1e-12)
        assert late == pytest.approx(0.0125414103170848, abs=1e-12)
        assert round(early, 5) == 0.98746
        assert round(late, 5) == 0.01254

    def test_sums_to_one_randomized(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            early, late = amplitude_probabilities(random_pulse_state(rng))
            assert early + late == pytest.approx(1.0, abs=1e-12)
            assert early >= 0.0 and late >= 0.0

    @pytest.mark.parametrize("m,b", [(-0.1, 0.0), (1.1, 0.0), (0.5, -1e-9)])
    def test_invalid_parameters_rejected(self, m, b):
        with pytest.raises(ValueError):
            _state(m, b)


class TestJointModeProbs:
    def test_symmetric_x_states(self):
        jp = joint_mode_probs(_state(0.5, 0.0), _state(0.5, 0.0))
        assert (jp.p00, jp.p01, jp.p10, jp.p11) == (0.25, 0.25, 0.25, 0.25)
        assert jp.norm == 1.0

    def test_orthogonal_z_states(self):
        jp = joint_mode_probs(_state(1.0, 0.0, basis=Basis.Z), _state(0.0, 0.0, basis=Basis.Z))
        assert (jp.p00, jp.p01, jp.p10, jp.p11) == (0.0, 1.0, 0.0, 0.0)
        assert jp.norm == 1.0

    def test_characterized_pair_expansion(self):
        # Alice ket+ x Bob ket+; expectations from a separate brute-force
        # expansion of the defining products.
        jp = joint_mode_probs(_state(0.4972, 5.45e-3), _state(0.5018, 1.14e-3))
        assert jp.p00 == pytest.approx(0.252802791, abs=1e-9)
        assert jp.p01 == pytest.approx(0.250993251, abs=1e-9)
        assert jp.p10 == pytest.approx(0.255619255, abs=1e-9)
        assert jp.p11 == pytest.approx(0.253789555, abs=1e-9)
        assert jp.norm == pytest.approx(1.013204852, abs=1e-9)

    def test_weights_sum_to_norm(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            jp = joint_mode_probs(random_pulse_state(rng), random_pulse_state(rng))
            assert jp.p00 + jp.p01 + jp.p10 + jp.p11 == pytest.approx(jp.norm, rel=1e-14)


class TestInterferenceCoeffs:
    def test_identical_ideal_x_states_bunch_perfectly(self):
        c = interference_coeffs(_state(0.5, 0.0), _state(0.5, 0.0), 0.0)
        assert c.bunched == pytest.approx(1.0, abs=1e-15)
        assert c.coincident == pytest.approx(0.0, abs=1e-15)

    def test_opposite_ideal_x_states(self):
        c = interference_coeffs(_state(0.5, 0.0), _state(0.5, 0.0, math.pi), math.pi)
        assert c.bunched == pytest.approx(0.5, abs=1e-15)
        assert c.coincident == pytest.approx(0.5, abs=1e-15)

    def test_orthogonal_ideal_z_states(self):
        for dphi in (0.0, 1.0, math.pi):
            c = interference_coeffs(
                _state(1.0, 0.0, basis=Basis.Z), _state(0.0, 0.0, basis=Basis.Z), dphi
            )
            assert c.distinct_same_bin == pytest.approx(0.0, abs=1e-15)
            assert c.distinct_cross_bin == pytest.approx(0.5, abs=1e-15)
            assert c.bunched == pytest.approx(0.5, abs=1e-15)
            assert c.coincident == pytest.approx(0.5, abs=1e-15)

    def test_exact_sum_identities(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            s1, s2 = random_pulse_state(rng), random_pulse_state(rng)
            dphi = float(rng.uniform(-10, 10))
            c = interference_coeffs(s1, s2, dphi)
            assert c.distinct_same_bin + c.distinct_cross_bin == pytest.approx(0.5, abs=1e-12)
            assert c.bunched + c.coincident == pytest.approx(1.0, abs=1e-12)
            for w in (c.distinct_same_bin, c.distinct_cross_bin, c.bunched, c.coincident):
                assert -1e-12 <= w <= 1.0 + 1e-12

    def test_interfering_sum_independent_of_phase(self):
        rng = np.random.default_rng(4)
        s1, s2 = random_pulse_state(rng), random_pulse_state(rng)
        totals = {
            round(interference_coeffs(s1, s2, d).bunched + interference_coeffs(s1, s2, d).coincident, 12)
            for d in np.linspace(0, 2 * math.pi, 17)
        }
        assert totals == {1.0}

    def test_coincidence_minimized_at_zero_phase_for_balanced_pair(self):
        s1 = _state(0.5, 0.01)
        s2 = _state(0.5, 0.01)
        base = interference_coeffs(s1, s2, 0.0).coincident
        for dphi in np.linspace(-math.pi, math.pi, 33):
            assert base <= interference_coeffs(s1, s2, float(dphi)).coincident + 1e-15

    def test_swap_symmetry_with_negated_phase(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            s1, s2 = random_pulse_state(rng), random_pulse_state(rng)
            dphi = float(rng.uniform(-5, 5))
            a = interference_coeffs(s1, s2, dphi)
            b = interference_coeffs(s2, s1, -dphi)
            assert a.distinct_same_bin == pytest.approx(b.distinct_same_bin, abs=1e-14)
            assert a.distinct_cross_bin == pytest.approx(b.distinct_cross_bin, abs=1e-14)
            assert a.bunched == pytest.approx(b.bunched, abs=1e-14)
            assert a.coincident == pytest.approx(b.coincident, abs=1e-14)


def test_ideal_states_are_ideal():
    states = ideal_states()
    assert amplitude_probabilities(states.z0) == (1.0, 0.0)
    assert amplitude_probabilities(states.z1) == (0.0, 1.0)
    assert states.x_plus.phi == 0.0
    assert states.x_minus.phi == math.pi
    assert states.pair_choices(Basis.Z) == (states.z0, states.z1)
    assert states.pair_choices(Basis.X) == (states.x_plus, states.x_minus)
