"""Finite-volume solver for a chemotaxis model of demyelinating plaque formation.

Three cell-averaged fields evolve on a uniform mesh: activated macrophages m
(degenerate porous-medium or linear diffusion, saturated chemotaxis, logistic
growth), cytokines c (linear diffusion and reaction) and immotile damaged
oligodendrocytes d. The scheme is a positivity-preserving upwind finite-volume
discretization with minmod-limited reconstruction, integrated by SSP-RK3
under an adaptive CFL step.
"""

from ._version import __version__
from .errors import ConfigError, DomainError, SolverError
from .model import DiffusionMode, ModelParams
from .grid import Grid, InitPreset, State, allocate_state, fill_ghost_neumann
from .flux import FluxSet, compute_fluxes
from .integrator import StepStats, advance_to, rhs, ssp_rk3_step, stable_dt
from .config import RunConfig, parse_config
from .report import ExperimentReport

__all__ = [
    "__version__",
    "ConfigError",
    "DomainError",
    "SolverError",
    "DiffusionMode",
    "ModelParams",
    "Grid",
    "InitPreset",
    "State",
    "allocate_state",
    "fill_ghost_neumann",
    "FluxSet",
    "compute_fluxes",
    "StepStats",
    "advance_to",
    "rhs",
    "ssp_rk3_step",
    "stable_dt",
    "RunConfig",
    "parse_config",
    "ExperimentReport",
]
