"""Numerical toolkit for dominating sets in doubling Fock spaces.

Modules: :mod:`weights` (weights, adapted radius, growth law),
:mod:`regions` (planar sets and their density), :mod:`covering`
(separated nets, overlap, lattice sums, harmonic fits), :mod:`sampling`
(truncated spaces and sampling constants), :mod:`remez` (planar Remez
experiments), :mod:`toeplitz` (truncated Toeplitz operators) and
:mod:`cli`.
"""
from ._accel import backend
from .errors import *  # noqa: F401,F403
from .regions import parse_region
from .weights import WeightSpec, abs2, abs2_re, abs_pow, re_weight, rho, weight_from_name

__version__ = "0.1.0"

__all__ = ["backend", "parse_region", "WeightSpec", "abs2", "abs2_re", "abs_pow", "re_weight", "rho",
           "weight_from_name", "__version__"]
