"""Performance model and optimizer for MDI-QKD links with characterized imperfections."""

from .states import (
    Basis,
    InterferenceCoeffs,
    ModeJointProbs,
    PulseState,
    StateLabel,
    StateSet,
    amplitude_probabilities,
    ideal_states,
    interference_coeffs,
    joint_mode_probs,
)
from .detector import (
    AfterpulseFit,
    DetectorParams,
    GateLoad,
    afterpulse_per_bin,
    afterpulse_per_detection,
    fit_afterpulse,
    mean_photons_per_gate,
    noise_per_bin,
)
from .bsm import (
    TwoPhotonOutput,
    p_psiminus_2photons_interfering,
    p_psiminus_2photons_noninterfering,
    p_psiminus_2photons_visibility,
    p_psiminus_3photons,
    p_psiminus_given_0_photons,
    p_psiminus_given_1_photon,
    p_psiminus_out_2photons,
)
from .link import (
    GainErrorPoint,
    GainModel,
    ParameterBand,
    PredictionBand,
    SystemConfig,
    UncertainSystemConfig,
    gain_and_error,
    occurrence_probs,
    prediction_band,
    q11_e11_direct,
    transmissions_from_total_loss,
)
from .decoy import (
    DecoyKeyRateResult,
    IntensityTriple,
    binary_entropy,
    e11x_upper,
    key_rate_from_cells,
    q11_lower,
    secret_key_rate,
)
from .optimizer import (
    SCENARIOS,
    OptimizationGrid,
    OptimizationResult,
    Scenario,
    evaluate_key_rate,
    get_scenario,
    optimize,
    run_scenario,
)
from .oracle import FockInput, OracleDistribution, PhotonGroup, detect, evolve, oracle_gain_and_error

__version__ = "0.1.0"
