"""
Graded matrices `(z, t) -> (Bz, a t)` and matrix fields `y -> A(y)`.

A linear map of `R^(2n+1)` has finite Heisenberg operator norm
`sup |Mx|_h / |x|_h` only if it preserves the splitting into horizontal and
center directions, so only such block-diagonal matrices are accepted.
"""
import logging
from collections.abc import Callable
from enum import Enum
from typing import NamedTuple

import numpy as np

from .data_structures import GroupDims
from .errors import DimensionMismatchError, NonGradedMatrixError, SingularMatrixError
from .heisenberg import HPoint, dilate, dimension_of, group_constants, hnorm

__all__ = (
    "GradedMatrix",
    "MatrixFieldKind",
    "MatrixField",
    "DetBoundsReport",
    "PointBoundReport",
    "apply",
    "heis_norm",
    "sampled_heis_norm",
    "det_inv_bounds_check",
    "g_function",
    "weighted_point_bound_check",
)

logger = logging.getLogger(__name__)

ILL_CONDITIONED = 1e12
SLACK = 1e-12


class GradedMatrix:
    """
    An invertible graded matrix acting on `H^n` by `(z, t) -> (Bz, a t)`.

    Parameters
    ----------
    B : array-like
        Horizontal block, shape `(2n, 2n)`.
    a : float
        Center scalar.

    Attributes
    ----------
    B : numpy.ndarray
        Read-only horizontal block.
    a : float
        Center scalar.
    n : int
        Dimension parameter.

    Methods
    -------
    identity:
        Identity of `H^n`.
    dilation:
        The dilation `delta_r` as a graded matrix.
    from_matrix:
        Graded matrix from a full `(2n + 1) x (2n + 1)` matrix.
    from_literal:
        Graded matrix from a scenario-file mapping.
    to_matrix:
        The full matrix.
    inverse:
        Inverse matrix.
    det:
        Determinant `det(B) * a`.
    heis_norm:
        Heisenberg operator norm.
    apply:
        Apply the matrix to points.

    Raises
    ------
    SingularMatrixError
        If `det(B) = 0` or `a = 0`.
    """
    def __init__(self, B, a: float):
        B = np.array(B, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] % 2 or B.shape[0] == 0:
            raise DimensionMismatchError(f"horizontal block must be 2n x 2n, got shape {B.shape}")
        if not np.all(np.isfinite(B)) or not np.isfinite(a):
            raise ValueError(f"non-finite entries ({B=}, {a=})")
        if a == 0:
            raise SingularMatrixError("center scalar is zero")

        cond = np.linalg.cond(B)
        if not np.isfinite(cond):
            raise SingularMatrixError(f"horizontal block is singular:\n{B}")
        if cond > ILL_CONDITIONED:
            logger.warning("ill-conditioned horizontal block (cond=%.3g)", cond)

        B.flags.writeable = False
        self.B = B
        self.a = float(a)

    @classmethod
    def identity(cls, n: int) -> "GradedMatrix":
        """
        Identity of `H^n`.
        """
        return cls(np.eye(2 * n), 1.0)

    @classmethod
    def dilation(cls, r: float, n: int) -> "GradedMatrix":
        """
        The dilation `delta_r`, `B = r I` and `a = r**2`.
        """
        if r <= 0:
            raise ValueError(f"dilation factor must be positive ({r=})")

        return cls(r * np.eye(2 * n), r * r)

    @classmethod
    def from_matrix(cls, M) -> "GradedMatrix":
        """
        Graded matrix from a full `(2n + 1) x (2n + 1)` matrix.

        Raises
        ------
        NonGradedMatrixError
            If `M` mixes horizontal and center directions.
        """
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatchError(f"expected a square matrix, got shape {M.shape}")
        dimension_of(M)

        if np.any(M[:-1, -1]) or np.any(M[-1, :-1]):
            raise NonGradedMatrixError(
                "matrix mixes horizontal and center directions; its Heisenberg norm is infinite"
            )

        return cls(M[:-1, :-1], M[-1, -1])

    @classmethod
    def from_literal(cls, literal: dict) -> "GradedMatrix":
        """
        Graded matrix from `{"B": [[...]], "a": a}` or `{"matrix": [[...]]}`.
        """
        if "matrix" in literal:
            return cls.from_matrix(literal["matrix"])

        try:
            return cls(literal["B"], literal["a"])
        except KeyError as e:
            raise ValueError(f"matrix literal is missing {e}") from None

    @property
    def n(self) -> int:
        return len(self.B) // 2

    def to_matrix(self) -> np.ndarray:
        """
        The full `(2n + 1) x (2n + 1)` matrix.
        """
        M = np.zeros((2 * self.n + 1,) * 2)
        M[:-1, :-1] = self.B
        M[-1, -1] = self.a
        return M

    def inverse(self) -> "GradedMatrix":
        return GradedMatrix(np.linalg.inv(self.B), 1.0 / self.a)

    def det(self) -> float:
        return float(np.linalg.det(self.B)) * self.a

    def heis_norm(self) -> float:
        """
        `max(sigma_max(B), sqrt(|a|))`.

        Writing `|Mx|_h**4 / |x|_h**4 = (|Bz|**4 + a**2 t**2) / (|z|**4 + t**2)`,
        the mediant inequality bounds it by the larger of
        `|Bz|**4 / |z|**4 <= sigma_max**4` and `a**2`.
        """
        return max(float(np.linalg.norm(self.B, 2)), float(np.sqrt(abs(self.a))))

    def apply(self, x):
        """
        Apply the matrix to points (arrays broadcast over leading axes; an
        :class:`HPoint` gives an :class:`HPoint`).
        """
        if isinstance(x, HPoint):
            return HPoint(self.apply(x.coords))

        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 2 * self.n + 1:
            raise DimensionMismatchError(f"{x.shape[-1]} coordinates for a matrix on H^{self.n}")

        out = np.empty_like(x)
        out[..., :-1] = x[..., :-1] @ self.B.T
        out[..., -1] = self.a * x[..., -1]
        return out

    def __matmul__(self, other: "GradedMatrix") -> "GradedMatrix":
        if not isinstance(other, GradedMatrix):
            return NotImplemented

        return GradedMatrix(self.B @ other.B, self.a * other.a)

    def __eq__(self, other):
        if not isinstance(other, GradedMatrix):
            return NotImplemented

        return self.a == other.a and np.array_equal(self.B, other.B)

    def __hash__(self):
        return hash((self.B.tobytes(), self.a))

    def __repr__(self):
        return f"{type(self).__name__}(B={self.B.tolist()}, a={self.a})"


def apply(M: GradedMatrix, x):
    """
    `Mx`, that is `(Bz, a t)`.
    """
    return M.apply(x)

def heis_norm(M: GradedMatrix) -> float:
    """
    Heisenberg operator norm `||M|| = sup_{x != 0} |Mx|_h / |x|_h`.
    """
    return M.heis_norm()

def sampled_heis_norm(M: GradedMatrix, samples: int=100_000, seed: int=0, refinements: int=40) -> float:
    """
    Lower estimate of `||M||` by sampling `|Mx|_h / |x|_h`, followed by a
    shrinking random search around the best sample.
    """
    rng = np.random.default_rng(seed)
    ndim = 2 * M.n + 1

    def ratios(x):
        return hnorm(M.apply(x)) / hnorm(x)

    x = rng.standard_normal((samples, ndim))
    # Spread the center coordinate over many scales.
    x[:, -1] *= 10.0 ** rng.uniform(-3.0, 3.0, samples)
    values = ratios(x)
    best_index = int(np.argmax(values))
    best, best_value = x[best_index], values[best_index]

    for step in np.geomspace(0.5, 1e-6, refinements):
        candidates = best + step * hnorm(best) * rng.standard_normal((256, ndim))
        values = ratios(candidates)
        i = int(np.argmax(values))
        if values[i] > best_value:
            best, best_value = candidates[i], values[i]

    return float(best_value)


class DetBoundsReport(NamedTuple):
    """
    Determinant sandwich `||M||**-Q <= |det M^-1| <= ||M^-1||**Q`.

    Parameters
    ----------
    lhs : float
        `||M||**-Q`.
    mid : float
        `|det M|**-1`.
    rhs : float
        `||M^-1||**Q`.
    holds : bool
        Whether `lhs <= mid <= rhs` up to relative slack.

    Attributes
    ----------
    lhs : float
        `||M||**-Q`.
    mid : float
        `|det M|**-1`.
    rhs : float
        `||M^-1||**Q`.
    holds : bool
        Whether `lhs <= mid <= rhs` up to relative slack.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    lhs: float
    mid: float
    rhs: float
    holds: bool


def det_inv_bounds_check(M: GradedMatrix, dims: GroupDims | None=None) -> DetBoundsReport:
    """
    Check `||M||**-Q <= |det M^-1| <= ||M^-1||**Q`.
    """
    if dims is None:
        dims = group_constants(M.n)
    elif dims.n != M.n:
        raise DimensionMismatchError(f"matrix on H^{M.n} checked against H^{dims.n}")

    lhs = M.heis_norm() ** -dims.Q
    mid = 1.0 / abs(M.det())
    rhs = M.inverse().heis_norm() ** dims.Q
    holds = lhs <= mid * (1 + SLACK) and mid <= rhs * (1 + SLACK)
    return DetBoundsReport(lhs, mid, rhs, holds)

def g_function(M: GradedMatrix, beta: float) -> float:
    """
    `G(M, beta)`: `||M||**beta` if `beta > 0`, else `||M^-1||**-beta`.
    """
    if beta > 0:
        return M.heis_norm() ** beta

    return M.inverse().heis_norm() ** -beta


class PointBoundReport(NamedTuple):
    """
    Pointwise bound `|Mx|_h**beta <= G(M, beta) |x|_h**beta` over a sample.

    Parameters
    ----------
    max_ratio : float
        Largest `|Mx|_h**beta / |x|_h**beta` over the sample.
    bound : float
        `G(M, beta)`.
    holds : bool
        Whether `max_ratio <= bound` up to relative slack.
    n_points : int
        Number of non-zero sample points.

    Attributes
    ----------
    max_ratio : float
        Largest `|Mx|_h**beta / |x|_h**beta` over the sample.
    bound : float
        `G(M, beta)`.
    holds : bool
        Whether `max_ratio <= bound` up to relative slack.
    n_points : int
        Number of non-zero sample points.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    max_ratio: float
    bound: float
    holds: bool
    n_points: int


def weighted_point_bound_check(M: GradedMatrix, beta: float, sample) -> PointBoundReport:
    """
    Check `v(Mx) <= G(M, beta) v(x)` for the power weight `v(x) = |x|_h**beta`
    at every non-zero sample point.
    """
    if beta <= -M.n:
        raise ValueError(f"power exponent must exceed -n ({beta=}, n={M.n})")

    x = np.atleast_2d(np.asarray(sample, dtype=float))
    norms = hnorm(x)
    x = x[norms > 0]
    ratio = (hnorm(M.apply(x)) / norms[norms > 0]) ** beta

    bound = g_function(M, beta)
    max_ratio = float(ratio.max()) if len(ratio) else 0.0
    return PointBoundReport(max_ratio, bound, max_ratio <= bound * (1 + SLACK), len(x))


class MatrixFieldKind(str, Enum):
    """
    Kind of a :class:`MatrixField`.

    :class:`MatrixFieldKind` is one of "constant", "inverse_dilation", "custom".
    """
    CONSTANT = "constant"
    INVERSE_DILATION = "inverse_dilation"
    CUSTOM = "custom"


class MatrixField:
    """
    A field `y -> A(y)` of graded matrices, evaluated at many nodes at once.

    Parameters
    ----------
    kind : MatrixFieldKind
        Kind of field.
    n : int
        Dimension parameter.
    matrix : GradedMatrix | None, default: None
        The matrix of a constant field.
    fn : Callable[[numpy.ndarray], GradedMatrix] | None, default: None
        `y -> A(y)` for a custom field.

    Attributes
    ----------
    kind : MatrixFieldKind
        Kind of field.
    n : int
        Dimension parameter.
    matrix : GradedMatrix | None
        The matrix of a constant field.
    fn : Callable[[numpy.ndarray], GradedMatrix] | None
        `y -> A(y)` for a custom field.

    Methods
    -------
    constant:
        The field `A(y) = M`.
    inverse_dilation:
        The field `A(y) = delta_(1 / |y|_h)`.
    custom:
        A field given pointwise.
    from_literal:
        Field from a scenario-file mapping.
    at:
        The matrix at one point.
    norms:
        `||A(y)||` at each node.
    inverse_norms:
        `||A(y)^-1||` at each node.
    inverse_dets:
        `|det A(y)^-1|` at each node.
    g_values:
        `G(A(y)^-1, beta)` or `G(A(y), beta)` at each node.
    apply:
        `A(y) x` at each node.
    """
    def __init__(
        self,
        kind: MatrixFieldKind,
        n: int,
        matrix: GradedMatrix | None=None,
        fn: Callable[[np.ndarray], GradedMatrix] | None=None,
    ):
        self.kind = MatrixFieldKind(kind)
        self.n = n
        self.matrix = matrix
        self.fn = fn

        if self.kind is MatrixFieldKind.CONSTANT and (matrix is None or matrix.n != n):
            raise ValueError(f"constant field needs a matrix on H^{n}")
        if self.kind is MatrixFieldKind.CUSTOM and fn is None:
            raise ValueError("custom field needs a function")

    @classmethod
    def constant(cls, matrix: GradedMatrix) -> "MatrixField":
        return cls(MatrixFieldKind.CONSTANT, matrix.n, matrix=matrix)

    @classmethod
    def inverse_dilation(cls, n: int) -> "MatrixField":
        return cls(MatrixFieldKind.INVERSE_DILATION, n)

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray], GradedMatrix], n: int) -> "MatrixField":
        return cls(MatrixFieldKind.CUSTOM, n, fn=fn)

    @classmethod
    def from_literal(cls, literal: dict, n: int) -> "MatrixField":
        """
        Field from `{"kind": "inverse_dilation"}`, `{"kind": "constant", "B": ..., "a": ...}`
        or a bare matrix literal `{"B": ..., "a": ...}`.
        """
        kind = literal.get("kind", MatrixFieldKind.CONSTANT)
        match MatrixFieldKind(kind):
            case MatrixFieldKind.INVERSE_DILATION:
                return cls.inverse_dilation(n)
            case MatrixFieldKind.CONSTANT:
                matrix = GradedMatrix.from_literal(literal)
                if matrix.n != n:
                    raise DimensionMismatchError(f"matrix on H^{matrix.n} in a scenario on H^{n}")
                return cls.constant(matrix)

        raise ValueError("custom matrix fields cannot be read from a literal")

    def _radii(self, y: np.ndarray) -> np.ndarray:
        r = hnorm(y)
        if np.any(r == 0):
            raise SingularMatrixError("inverse dilation is singular at the origin")
        return r

    def _matrices(self, y: np.ndarray) -> list[GradedMatrix]:
        return [self.fn(node) for node in np.atleast_2d(y)]

    def at(self, y) -> GradedMatrix:
        """
        The matrix `A(y)`.
        """
        y = np.asarray(y, dtype=float)
        match self.kind:
            case MatrixFieldKind.CONSTANT:
                return self.matrix
            case MatrixFieldKind.INVERSE_DILATION:
                return GradedMatrix.dilation(1.0 / float(self._radii(y)), self.n)
            case MatrixFieldKind.CUSTOM:
                return self.fn(y)

    def norms(self, y: np.ndarray) -> np.ndarray:
        """
        `||A(y)||` at each node.
        """
        y = np.atleast_2d(y)
        match self.kind:
            case MatrixFieldKind.CONSTANT:
                return np.full(len(y), self.matrix.heis_norm())
            case MatrixFieldKind.INVERSE_DILATION:
                return 1.0 / self._radii(y)
            case MatrixFieldKind.CUSTOM:
                return np.array([M.heis_norm() for M in self._matrices(y)])

    def inverse_norms(self, y: np.ndarray) -> np.ndarray:
        """
        `||A(y)^-1||` at each node.
        """
        y = np.atleast_2d(y)
        match self.kind:
            case MatrixFieldKind.CONSTANT:
                return np.full(len(y), self.matrix.inverse().heis_norm())
            case MatrixFieldKind.INVERSE_DILATION:
                return self._radii(y)
            case MatrixFieldKind.CUSTOM:
                return np.array([M.inverse().heis_norm() for M in self._matrices(y)])

    def inverse_dets(self, y: np.ndarray) -> np.ndarray:
        """
        `|det A(y)^-1|` at each node.
        """
        y = np.atleast_2d(y)
        match self.kind:
            case MatrixFieldKind.CONSTANT:
                return np.full(len(y), 1.0 / abs(self.matrix.det()))
            case MatrixFieldKind.INVERSE_DILATION:
                return self._radii(y) ** group_constants(self.n).Q
            case MatrixFieldKind.CUSTOM:
                return np.array([1.0 / abs(M.det()) for M in self._matrices(y)])

    def g_values(self, y: np.ndarray, beta: float, inverse: bool=True) -> np.ndarray:
        """
        `G(A(y)^-1, beta)` (or `G(A(y), beta)` if `inverse` is false) at each node.
        """
        # ||A^-1|| plays the role of ||M|| when M = A^-1.
        norms, inverse_norms = self.norms(y), self.inverse_norms(y)
        if inverse:
            norms, inverse_norms = inverse_norms, norms

        if beta > 0:
            return norms**beta
        return inverse_norms ** -beta

    def apply(self, y: np.ndarray, x) -> np.ndarray:
        """
        `A(y) x` at each node `y`; `x` is one point or one point per node.
        """
        y = np.atleast_2d(y)
        x = np.broadcast_to(np.asarray(x, dtype=float), y.shape)
        match self.kind:
            case MatrixFieldKind.CONSTANT:
                return self.matrix.apply(x)
            case MatrixFieldKind.INVERSE_DILATION:
                return dilate(1.0 / self._radii(y), x)
            case MatrixFieldKind.CUSTOM:
                return np.stack([M.apply(point) for M, point in zip(self._matrices(y), x)])

    def __repr__(self):
        if self.kind is MatrixFieldKind.CONSTANT:
            return f"{type(self).__name__}.constant({self.matrix!r})"
        return f"{type(self).__name__}({self.kind.value!r}, n={self.n})"
