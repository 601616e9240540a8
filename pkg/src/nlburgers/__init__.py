"""Pseudo-spectral solvers for a nonlocal Burgers equation with diffusive and
dispersive terms, plus the coupled cell/chemoattractant system it approximates.

The package is organised as a plain library (`spectral`, `models`,
`integrator`, `diagnostics`, `validation`), a run layer (`initial`, `config`,
`runner`), an HTTP service (`service`), and a thin command line client
(`cli`).
"""

__version__ = "0.1.0"

from .spectral import (
    RealField,
    SpectralGrid,
    Spectrum,
    backward,
    build_grid,
    forward,
)
from .models import ModelParams, SimState, linear_dispersion
from .integrator import IntegratorConfig, TerminationReport, TerminationStatus, integrate
from .config import RunConfig, parse_config, preset, preset_names
from .runner import RunResult, execute

__all__ = [
    "RealField",
    "SpectralGrid",
    "Spectrum",
    "backward",
    "build_grid",
    "forward",
    "ModelParams",
    "SimState",
    "linear_dispersion",
    "IntegratorConfig",
    "TerminationReport",
    "TerminationStatus",
    "integrate",
    "RunConfig",
    "parse_config",
    "preset",
    "preset_names",
    "RunResult",
    "execute",
    "__version__",
]
