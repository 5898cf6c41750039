"""Finite elements for the 2D fiber operators on sectors and half-planes"""

from .mesh import Mesh2D, BoundaryTag, build_rhombus_mesh, build_halfplane_mesh
from .mesh import refine, renumber
from .space import FunctionSpace, function_space
from .assembly import SparseHermitian, assemble, assemble_form, reduced_potential
from .eigen import EigenPair, lowest_eigenpairs
from .diagnostics import decay_rate, artificial_boundary_ratio, localization
from .diagnostics import export_eigenvector

__all__ = [
    "Mesh2D",
    "BoundaryTag",
    "build_rhombus_mesh",
    "build_halfplane_mesh",
    "refine",
    "renumber",
    "FunctionSpace",
    "function_space",
    "SparseHermitian",
    "assemble",
    "assemble_form",
    "reduced_potential",
    "EigenPair",
    "lowest_eigenpairs",
    "decay_rate",
    "artificial_boundary_ratio",
    "localization",
    "export_eigenvector",
]
