"""Robust identification of graph filters from perturbed topologies."""

from .config import EfficientConfig, SolverConfig
from .efficient import (
    SparseKronColumns,
    build_sigma_columns,
    coord_update,
    denoise_coord_descent,
    efficient_rfi,
    filter_step_gd,
    grad_f1,
)
from .experiments import (
    ExperimentConfig,
    StationDataset,
    forecast_experiment,
    ingest_station_csv,
    knn_graph,
    run_experiment,
)
from .graphs import (
    GraphFilter,
    Gso,
    GsoFamily,
    InputDist,
    PerturbationKind,
    PerturbationSpec,
    SignalSet,
    SpectralDecomp,
    build_filter,
    commutator_norm,
    generate_er,
    generate_small_world,
    nerr,
    perturb,
    sample_covariance,
    spectral_decomp,
    synthesize_signals,
)
from .joint import ArSeries, JointResult, MultiSignalSet, ar_predict, ar_rfi, joint_rfi
from .solver import (
    IdentifiabilityReport,
    RankDeficiencyWarning,
    RfiResult,
    RunReport,
    denoise_step,
    fi_closed_form,
    identifiability_check,
    mm_weights,
    objective_eval,
    recover_coeffs,
    rfi_alternating,
    rfi_alternating_stationary,
    rfi_step1,
)

__version__ = "0.1.0"

__all__ = [
    "ArSeries",
    "EfficientConfig",
    "ExperimentConfig",
    "GraphFilter",
    "Gso",
    "GsoFamily",
    "IdentifiabilityReport",
    "InputDist",
    "JointResult",
    "MultiSignalSet",
    "PerturbationKind",
    "PerturbationSpec",
    "RankDeficiencyWarning",
    "RfiResult",
    "RunReport",
    "SignalSet",
    "SolverConfig",
    "SparseKronColumns",
    "SpectralDecomp",
    "StationDataset",
    "ar_predict",
    "ar_rfi",
    "build_filter",
    "build_sigma_columns",
    "commutator_norm",
    "coord_update",
    "denoise_coord_descent",
    "denoise_step",
    "efficient_rfi",
    "fi_closed_form",
    "filter_step_gd",
    "forecast_experiment",
    "generate_er",
    "generate_small_world",
    "grad_f1",
    "identifiability_check",
    "ingest_station_csv",
    "joint_rfi",
    "knn_graph",
    "mm_weights",
    "nerr",
    "objective_eval",
    "perturb",
    "recover_coeffs",
    "rfi_alternating",
    "rfi_alternating_stationary",
    "rfi_step1",
    "run_experiment",
    "sample_covariance",
    "spectral_decomp",
    "synthesize_signals",
]
