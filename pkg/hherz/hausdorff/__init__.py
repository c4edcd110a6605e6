"""
Matrix Hausdorff operators on the Heisenberg group, their commutators, and
the constants of the commutator estimates.
"""
from .kernels import *
from .operators import *
from .theorems import *
