"""
hherz
=====

Weighted harmonic analysis on the Heisenberg group: geometry, weights,
Herz/CBMO norms, matrix Hausdorff operators, their commutators, and a
harness that checks the associated inequalities numerically.
"""
__version__ = "0.1.0"
