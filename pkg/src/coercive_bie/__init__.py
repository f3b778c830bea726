"""Coercive second-kind boundary integral equations for the Laplace
interior/exterior Dirichlet problems and the Helmholtz exterior Dirichlet
problem, discretized with a Galerkin boundary element method in L2 on
flat-panel meshes, diagonally preconditioned and solved with GMRES."""

__version__ = "0.1.0"

from . import (backends, discretization, geometry, kernels, operators,
               vector_field)

__all__ = ["backends", "discretization", "geometry", "kernels", "operators",
           "vector_field", "__version__"]
