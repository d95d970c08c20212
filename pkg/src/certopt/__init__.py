"""Certified global optimization of bound-constrained and inequality-constrained
problems by an interval branch-and-contract solver cooperating with
differential evolution."""

__version__ = "0.1.0"
