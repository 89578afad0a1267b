"""Python bindings for the fracgrad C++ core."""

from ._core import (
    CheckpointError,
    ConfigError,
    DimensionError,
    DomainError,
    __version__,
    bench,
    caputo_derivative,
    digamma,
    evaluate,
    fgf_coefficients,
    frac_taylor_direction,
    function_names,
    gamma,
    gl_derivative,
    global_min,
    gradient,
    grid_transform,
    lorenz,
    meta_train,
    optimize,
    recip_gamma,
    rl_derivative,
)

__all__ = [
    "CheckpointError",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "__version__",
    "bench",
    "caputo_derivative",
    "digamma",
    "evaluate",
    "fgf_coefficients",
    "frac_taylor_direction",
    "function_names",
    "gamma",
    "gl_derivative",
    "global_min",
    "gradient",
    "grid_transform",
    "lorenz",
    "meta_train",
    "optimize",
    "recip_gamma",
    "rl_derivative",
]
