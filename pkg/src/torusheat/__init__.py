"""Periodic heat kernels, maximal operators and weight classes on T^n and T^n x R^m."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .kernel import (  # noqa: F401
    KernelConfig,
    KernelValue,
    Representation,
    TorusPoint,
    WaveguidePoint,
    eval_fourier,
    eval_gaussian,
    eval_waveguide,
    evaluate,
    lower_bound,
    split,
    tail_mass,
    upper_bound,
    waveguide_bounds,
)
from .grid import Grid, GridFunction, evolve_torus, evolve_waveguide, weighted_norm  # noqa: F401
