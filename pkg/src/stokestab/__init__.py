"""Transverse-instability analysis of small-amplitude Stokes waves in finite depth."""

from .dispersion import DepthContext, build_context, solve_beta_star
from .stokes import ExpansionTables, build_tables

__all__ = ["DepthContext", "build_context", "solve_beta_star",
           "ExpansionTables", "build_tables"]
__version__ = "0.1.0"
