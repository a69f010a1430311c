"""Downlink spectral-efficiency simulator for cell-free massive MIMO under channel aging."""

from .aging import (
    ChannelRealization,
    age_channel,
    bessel_j0,
    complex_normal,
    correlation_coefficient,
    hardened_attenuation,
    realize_aged_block,
    wiener_phase_path,
)
from .config import (
    BOLTZMANN_J_PER_K,
    SPEED_OF_LIGHT_M_PER_S,
    DelayBudget,
    SystemConfig,
    accumulated_phase_variance_from_label,
    config_from_dict,
    config_to_dict,
    cost_hata_intercept_db,
    delay_to_samples,
    load_config,
    noise_variance,
    phase_increment_variance,
)
from .errors import (
    ConfigError,
    DegenerateInputError,
    InvalidParameterError,
    RankDeficiencyError,
)
from .performance import (
    EmpiricalCdf,
    ReceivedStats,
    TermPowers,
    UserResult,
    cdf_and_percentiles,
    simulate_received,
    sinr_closed_form,
    spectral_efficiency,
)
from .precoding import (
    PrecoderState,
    build_precoder_state,
    estimate_expectations,
    power_control_eta,
    zf_precode,
    zf_weights,
)
from .propagation import LargeScaleState, draw_large_scale, path_loss_db, place_nodes, write_drop_csv
from .runner import (
    ExperimentResult,
    ResultRow,
    Scenario,
    ScenarioSpec,
    SummaryRow,
    compute_drop,
    read_results,
    run_experiment,
    summarize,
    write_results,
)
from .training import (
    EstimationResult,
    PilotPlan,
    assign_pilots,
    mmse_estimate,
    mmse_variances,
    pilot_observe,
)

__all__ = [
    "BOLTZMANN_J_PER_K",
    "SPEED_OF_LIGHT_M_PER_S",
    "ChannelRealization",
    "ConfigError",
    "DegenerateInputError",
    "DelayBudget",
    "EmpiricalCdf",
    "EstimationResult",
    "ExperimentResult",
    "InvalidParameterError",
    "LargeScaleState",
    "PilotPlan",
    "PrecoderState",
    "RankDeficiencyError",
    "ReceivedStats",
    "ResultRow",
    "Scenario",
    "ScenarioSpec",
    "SummaryRow",
    "SystemConfig",
    "TermPowers",
    "UserResult",
    "accumulated_phase_variance_from_label",
    "age_channel",
    "assign_pilots",
    "bessel_j0",
    "build_precoder_state",
    "cdf_and_percentiles",
    "complex_normal",
    "compute_drop",
    "config_from_dict",
    "config_to_dict",
    "correlation_coefficient",
    "cost_hata_intercept_db",
    "delay_to_samples",
    "draw_large_scale",
    "estimate_expectations",
    "hardened_attenuation",
    "load_config",
    "mmse_estimate",
    "mmse_variances",
    "noise_variance",
    "path_loss_db",
    "phase_increment_variance",
    "pilot_observe",
    "place_nodes",
    "power_control_eta",
    "read_results",
    "realize_aged_block",
    "run_experiment",
    "simulate_received",
    "sinr_closed_form",
    "spectral_efficiency",
    "summarize",
    "wiener_phase_path",
    "write_drop_csv",
    "write_results",
    "zf_precode",
    "zf_weights",
]

__version__ = "0.1.0"
