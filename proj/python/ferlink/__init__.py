"""Vehicular channel simulation, FER labeling and MLP inference."""

from ferlink._core import (
    SPEED_OF_LIGHT,
    CanyonScenario,
    FerClassScheme,
    FerMeasurement,
    GridSpec,
    GscmRegion,
    Mlp,
    PathKind,
    PhyConfig,
    PropagationPath,
    StationaryProcess,
    TdlConfig,
    classify_fer,
    doppler_shift,
    evaluate_ctf,
    evaluate_ctf_at,
    extract_features,
    generate_v2i_run,
    kmeans_boundaries,
    load_model,
    max_extension_time,
    measure_fer,
    sample_tdl_process,
    default_layer_dims,
)

__all__ = [
    "SPEED_OF_LIGHT",
    "CanyonScenario",
    "FerClassScheme",
    "FerMeasurement",
    "GridSpec",
    "GscmRegion",
    "Mlp",
    "PathKind",
    "PhyConfig",
    "PropagationPath",
    "StationaryProcess",
    "TdlConfig",
    "classify_fer",
    "doppler_shift",
    "evaluate_ctf",
    "evaluate_ctf_at",
    "extract_features",
    "generate_v2i_run",
    "kmeans_boundaries",
    "load_model",
    "max_extension_time",
    "measure_fer",
    "sample_tdl_process",
    "default_layer_dims",
]

__version__ = "0.1.0"
