"""Fourier Galerkin solvers for BBM, KdV and NLS with relaxation time stepping that keeps several invariants."""

__version__ = "0.1.0"
