"""
Numerical integration over `H^n`, identified with `R^(2n+1)` and Lebesgue measure.
"""
from .nodes import *
from .quadrature import *
from .quadrature_data_structures import *
