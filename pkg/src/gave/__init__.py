"""Solvers, convergence certificates and benchmarks for A x - B|x| - c = 0."""

__version__ = "0.1.0"
