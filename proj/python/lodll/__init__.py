"""Python bindings for the lodll LOD / Landau-Lifshitz library."""

from ._lodll import (
    GLOBAL_LAYERS,
    LodllError,
    coefficient,
    config_keys,
    default_layers,
    elliptic_convergence,
    loglog_slope,
    presets,
    resolve_config,
    run_experiment,
)

__all__ = [
    "GLOBAL_LAYERS",
    "LodllError",
    "coefficient",
    "config_keys",
    "default_layers",
    "elliptic_convergence",
    "loglog_slope",
    "presets",
    "resolve_config",
    "run_experiment",
]
