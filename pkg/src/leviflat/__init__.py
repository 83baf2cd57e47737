"""Exact normal forms for CR-singular Levi-flat submanifolds of codimension two."""
from .series import GaussianRational, Series, VarSpace, gr

__version__ = "0.1.0"
__all__ = ["GaussianRational", "Series", "VarSpace", "gr"]
