"""
Hausdorff operators `T_{Phi,A} f(x) = int Phi(y) / |y|_h**Q f(A(y) x) dy` and
their commutators `T^b f = b T f - T(b f)`.

The commutator is integrated in the form
`int Phi(y) / |y|_h**Q (b(x) - b(A(y) x)) f(A(y) x) dy`, so a constant
symbol gives exactly zero.
"""
import logging
from math import ceil, log2

import numpy as np

from .._parallel import parallel_map
from ..data_structures import QuadResult
from ..graded_matrix import MatrixField, MatrixFieldKind
from ..heisenberg import group_constants, hnorm
from ..quadrature import (
    QuadMethod,
    QuadSpec,
    evaluate_on_nodes,
    integrate_nodes,
    integrate_region,
    sample_region,
)
from .kernels import Kernel

__all__ = (
    "DEFAULT_TAIL_K",
    "kernel_spec",
    "radial_reducible",
    "apply_hausdorff",
    "apply_commutator",
    "hausdorff_values",
    "commutator_values",
)

logger = logging.getLogger(__name__)

DEFAULT_TAIL_K = 12

def kernel_spec(Phi: Kernel, spec: QuadSpec) -> QuadSpec:
    """
    `spec` with a truncation exponent when the kernel support is unbounded.
    """
    support = Phi.support
    if support.r_hi < np.inf or spec.tail_k is not None:
        return spec

    tail_k = max(DEFAULT_TAIL_K, ceil(log2(support.r_lo)) + 1)
    logger.debug("truncating kernel support at 2**%d", tail_k)
    return spec._replace(tail_k=tail_k)

def radial_reducible(Phi: Kernel, A: MatrixField) -> bool:
    """
    Whether integrands built from `Phi` and `A` depend on `|y|_h` only.
    """
    return Phi.is_radial and A.kind in (MatrixFieldKind.CONSTANT, MatrixFieldKind.INVERSE_DILATION)

def _check_radial(Phi: Kernel, A: MatrixField, spec: QuadSpec):
    if spec.method == QuadMethod.RADIAL_1D and not radial_reducible(Phi, A):
        raise ValueError("radial_1d needs a radial kernel and a constant or inverse-dilation field")

def _kernel_factor(Phi: Kernel, y: np.ndarray, Q: int) -> np.ndarray:
    return Phi(y) / hnorm(y) ** Q

def _hausdorff_integrand(f, Phi: Kernel, A: MatrixField, x: np.ndarray, Q: int):
    def integrand(y):
        return _kernel_factor(Phi, y, Q) * f(A.apply(y, x))

    return integrand

def _commutator_integrand(b, f, Phi: Kernel, A: MatrixField, x: np.ndarray, Q: int):
    b_x = float(np.asarray(b(x[None, :]), dtype=float).reshape(-1)[0])

    def integrand(y):
        moved = A.apply(y, x)
        return _kernel_factor(Phi, y, Q) * (b_x - b(moved)) * f(moved)

    return integrand

def _point(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (2 * n + 1,):
        raise ValueError(f"expected one point of H^{n}, got shape {x.shape}")
    return x

def _ray_majorant(integrand, ndim: int):
    def majorant(r):
        point = np.zeros((1, ndim))
        point[0, 0] = r
        return abs(float(np.asarray(integrand(point), dtype=float).reshape(-1)[0]))

    return majorant

def _integrate(integrand, Phi: Kernel, A: MatrixField, spec: QuadSpec, radial_tail: bool=False) -> QuadResult:
    """
    Integrate over the kernel support. With `radial_tail` and a radial
    integrand, the truncated tail is bounded by the integrand itself.
    """
    _check_radial(Phi, A, spec)
    spec = kernel_spec(Phi, spec)
    tail_majorant = None
    if radial_tail and radial_reducible(Phi, A):
        tail_majorant = _ray_majorant(integrand, 2 * A.n + 1)

    return integrate_region(
        integrand, Phi.support, spec, n=A.n, tail_majorant=tail_majorant, breakpoints=Phi.breakpoints
    )

def apply_hausdorff(f, Phi: Kernel, A: MatrixField, x, spec: QuadSpec) -> QuadResult:
    """
    `T_{Phi,A} f(x)`.

    Parameters
    ----------
    f : Callable
        Vectorized function on `H^n`.
    Phi : Kernel
        Kernel; the integral runs over its support.
    A : MatrixField
        Matrix field; `MatrixField.inverse_dilation(n)` gives `T_Phi`.
    x : array-like
        Evaluation point.
    spec : QuadSpec
        Quadrature. Unbounded kernel supports are truncated at
        `2**spec.tail_k` (default `2**DEFAULT_TAIL_K`).

    Returns
    -------
    QuadResult
        Value of the defining integral.

    Raises
    ------
    SingularMatrixError
        If `A(y)` is singular at a node.
    """
    Q = group_constants(A.n).Q
    return _integrate(_hausdorff_integrand(f, Phi, A, _point(x, A.n), Q), Phi, A, spec)

def apply_commutator(b, f, Phi: Kernel, A: MatrixField, x, spec: QuadSpec) -> QuadResult:
    """
    `T^b_{Phi,A} f(x) = b(x) T f(x) - T(b f)(x)`, on one node set.
    """
    Q = group_constants(A.n).Q
    return _integrate(_commutator_integrand(b, f, Phi, A, _point(x, A.n), Q), Phi, A, spec)

def _values_on_shared_nodes(make_integrand, Phi: Kernel, A: MatrixField, xs, spec: QuadSpec) -> list[QuadResult]:
    Q = group_constants(A.n).Q
    xs = np.atleast_2d(np.asarray(xs, dtype=float))

    if spec.method == QuadMethod.RADIAL_1D:
        return parallel_map(lambda x: _integrate(make_integrand(x, Q), Phi, A, spec), xs)

    spec = kernel_spec(Phi, spec)
    nodes = sample_region(Phi.support, spec, n=A.n)

    def at(x):
        values = evaluate_on_nodes(make_integrand(x, Q), nodes)
        return integrate_nodes(values, nodes, spec.rtol)

    return parallel_map(at, xs)

def hausdorff_values(f, Phi: Kernel, A: MatrixField, xs, spec: QuadSpec) -> list[QuadResult]:
    """
    `T_{Phi,A} f` at many points, all on one node set.
    """
    return _values_on_shared_nodes(
        lambda x, Q: _hausdorff_integrand(f, Phi, A, _point(x, A.n), Q), Phi, A, xs, spec
    )

def commutator_values(b, f, Phi: Kernel, A: MatrixField, xs, spec: QuadSpec) -> list[QuadResult]:
    """
    `T^b_{Phi,A} f` at many points, all on one node set.
    """
    return _values_on_shared_nodes(
        lambda x, Q: _commutator_integrand(b, f, Phi, A, _point(x, A.n), Q), Phi, A, xs, spec
    )
