"""Simulation and analysis toolkit for joint device-activity detection and
channel estimation in OFDM grant-free random access."""

from ._gfamp import (  # noqa: F401
    ConfigError,
    DimensionError,
    DistanceKind,
    DistanceModel,
    ExperimentSpec,
    MetricRecord,
    NumericalAbort,
    ResultTable,
    RunResult,
    ScenarioInstance,
    SeParams,
    SePrediction,
    StopKind,
    StopPolicy,
    SystemConfig,
    ac_run,
    activity_gate,
    channel_mse,
    derive_seed,
    detection_rates,
    dft_matrix,
    ec_run,
    error_prob,
    error_prob_parts,
    eta,
    eta_prime,
    group_lasso_obj,
    llr_theta,
    load_spec,
    logistic,
    make_scenario,
    mse_active_quadrature,
    parse_spec,
    pathloss,
    phi_quadrature,
    posterior_moments,
    reg_gamma,
    run_experiment,
    se_predict,
    tau0,
    write_results,
)
from ._gfamp import __version__  # noqa: F401
