import math

import numpy as np
import pytest

from mdiqkd.detector import DetectorParams
from mdiqkd.datasets import load_benchmark_rows, load_reference_config
from mdiqkd.states import Basis, PulseState, StateLabel, StateSet
from mdiqkd.link import SystemConfig


@pytest.fixture(scope="session")
def reference_run():
    return load_reference_config()


@pytest.fixture(scope="session")
def central_config(reference_run):
    return reference_run.uncertain.central()


@pytest.fixture(scope="session")
def benchmark_rows():
    return load_benchmark_rows()


def random_pulse_state(rng: np.random.Generator, basis=Basis.X, label=StateLabel.KET_PLUS) -> PulseState:
    return PulseState(
        m=float(rng.uniform(0.0, 1.0)),
        b=float(rng.uniform(0.0, 0.05)),
        phi=float(rng.uniform(0.0, 2.0 * math.pi)),
        basis=basis,
        label=label,
    )


def random_system_config(rng: np.random.Generator) -> SystemConfig:
    """A fully random but valid configuration for equivalence sweeps."""

    def state_set():
        return StateSet(
            z0=random_pulse_state(rng, Basis.Z, StateLabel.KET0),
            z1=random_pulse_state(rng, Basis.Z, StateLabel.KET1),
            x_plus=random_pulse_state(rng, Basis.X, StateLabel.KET_PLUS),
            x_minus=random_pulse_state(rng, Basis.X, StateLabel.KET_MINUS),
        )

    detector = DetectorParams(
        eta=float(rng.uniform(0.05, 0.9)),
        eta_gate=1.0,
        p_dark_bin=float(rng.uniform(0.0, 5e-4)),
        bin_gate_ratio=float(rng.uniform(0.02, 0.5)),
        alpha=float(rng.uniform(0.0, 0.3)),
        p_geo=float(rng.uniform(0.01, 0.1)),
        k_dead=int(rng.integers(0, 40)),
        deadtime_free=bool(rng.integers(0, 2)),
    )
    return SystemConfig(
        alice=state_set(),
        bob=state_set(),
        mu=float(rng.uniform(0.0, 0.8)),
        sigma=float(rng.uniform(0.0, 0.8)),
        t_alice=float(rng.uniform(0.05, 0.9)),
        t_bob=float(rng.uniform(0.05, 0.9)),
        detector=detector,
        visibility=float(rng.uniform(0.0, 1.0)),
        background_gate_alice=float(rng.uniform(0.0, 0.05)),
        background_gate_bob=float(rng.uniform(0.0, 0.05)),
        phase_offset_x=float(rng.uniform(-0.1, 0.1)),
        max_photons=3,
    )
