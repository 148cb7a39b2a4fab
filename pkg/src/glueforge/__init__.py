"""Finite combinatorial models of glued schemes: semisimplicial covers, sheaves on
finite posets, exact cohomology, and the category C2_Sch of gluing data."""

from .errors import GlueforgeError, MalformedInput, ValidationError

__version__ = "0.1.0"

__all__ = ["GlueforgeError", "MalformedInput", "ValidationError", "__version__"]
