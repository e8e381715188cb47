"""Numerical workbench for fractional Marcinkiewicz integrals on surfaces."""

from ._core import (
    BandError,
    ConfigError,
    InvalidArgument,
    QuadratureError,
    alpha_range,
    interpolation_exponents,
    lp_norm,
    mu_apply,
    run,
    sigma_hat,
    synthesize,
    tl_norm,
    z_omega,
)

__all__ = [
    "BandError",
    "ConfigError",
    "InvalidArgument",
    "QuadratureError",
    "alpha_range",
    "interpolation_exponents",
    "lp_norm",
    "mu_apply",
    "run",
    "sigma_hat",
    "synthesize",
    "tl_norm",
    "z_omega",
]
