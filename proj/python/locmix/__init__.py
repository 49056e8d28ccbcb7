"""Python bindings for the locmix library."""

from ._locmix import (
    ConfigError,
    NumericalError,
    Process,
    check,
    density_band_center,
    density_band_edge,
    exact_density,
    gamma_band_center,
    gamma_band_edge,
    gamma_thouless,
    lyapunov,
    moments,
    periodogram,
    run_config,
    spectral_density,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "Process",
    "check",
    "density_band_center",
    "density_band_edge",
    "exact_density",
    "gamma_band_center",
    "gamma_band_edge",
    "gamma_thouless",
    "lyapunov",
    "moments",
    "periodogram",
    "run_config",
    "spectral_density",
]
