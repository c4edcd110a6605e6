"""
Geometry of the Heisenberg group `H^n`.

Points are arrays whose last axis holds the `2n + 1` coordinates
`(x_1, ..., x_2n, x_2n+1)`; the center coordinate is always last. Every
function broadcasts over leading axes.
"""
import logging
from functools import lru_cache
from math import ldexp, pi, sqrt

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

from .data_structures import Annulus, GroupDims
from .errors import DimensionMismatchError

__all__ = (
    "HPoint",
    "dimension_of",
    "group_mul",
    "group_inv",
    "dilate",
    "hnorm",
    "hdist",
    "group_constants",
    "sphere_area",
    "ball_measure",
    "annulus_measure",
    "unit_ball_volume_mc",
    "random_points",
)

logger = logging.getLogger(__name__)

def dimension_of(x: np.ndarray) -> int:
    """
    Return `n` for an array of points with last axis of length `2n + 1`.
    """
    ndim = np.shape(x)[-1]
    if ndim < 3 or ndim % 2 == 0:
        raise DimensionMismatchError(f"points need 2n + 1 >= 3 coordinates, got {ndim}")

    return ndim // 2

def _pair(x, y) -> tuple[np.ndarray, np.ndarray, int]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise DimensionMismatchError(f"{x.shape[-1]} coordinates vs {y.shape[-1]} coordinates")

    return x, y, dimension_of(x)

def group_mul(x, y) -> np.ndarray:
    """
    The group law `x . y`.

    The first `2n` coordinates add; the center coordinate picks up
    `2 * sum_j (y_j x_(n+j) - x_j y_(n+j))`.
    """
    x, y, n = _pair(x, y)

    out = x + y
    twist = np.sum(y[..., :n] * x[..., n:2 * n] - x[..., :n] * y[..., n:2 * n], axis=-1)
    out[..., -1] += 2.0 * twist
    return out

def group_inv(x) -> np.ndarray:
    """
    Group inverse, which is coordinatewise negation.
    """
    return -np.asarray(x, dtype=float)

def dilate(r, x) -> np.ndarray:
    """
    Dilation `delta_r`: horizontal coordinates scale by `r`, the center by `r**2`.

    `r` may be an array broadcasting against the leading axes of `x`.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError(f"dilation factor must be positive ({r=})")

    out = np.array(x, dtype=float)
    dimension_of(out)
    out *= r[..., None]
    out[..., -1] *= r
    return out

def hnorm(x) -> np.ndarray | float:
    """
    Homogeneous norm `[(sum x_i**2)**2 + x_2n+1**2]**(1/4)`.
    """
    x = np.asarray(x, dtype=float)
    dimension_of(x)
    horizontal = np.sum(x[..., :-1] ** 2, axis=-1)
    return np.sqrt(np.hypot(horizontal, x[..., -1]))

def hdist(p, q) -> np.ndarray | float:
    """
    Heisenberg distance `d(p, q) = |q^-1 . p|_h`.
    """
    return hnorm(group_mul(group_inv(q), p))

@lru_cache
def group_constants(n: int) -> GroupDims:
    """
    Dimension constants of `H^n`.

    The unit-ball volume is reduced to one dimension: integrating out the
    center coordinate of `{|z|**4 + t**2 < 1}` leaves
    `omega_Q = sigma_(2n-1) * 2 * int_0^1 r**(2n-1) sqrt(1 - r**4) dr`
    with `sigma_(2n-1)` the area of the Euclidean unit sphere in `R^(2n)`.
    """
    if n < 1:
        raise ValueError(f"dimension parameter must be positive ({n=})")

    sigma = 2.0 * pi**n / gamma(n)
    radial, _ = quad(lambda r: r ** (2 * n - 1) * sqrt(1.0 - r**4), 0.0, 1.0, epsabs=0.0, epsrel=1e-13)
    omega_Q = sigma * 2.0 * radial
    Q = 2 * n + 2

    logger.debug("group constants n=%d: Q=%d omega_Q=%.12g", n, Q, omega_Q)
    return GroupDims(n=n, Q=Q, omega_Q=omega_Q, w_Q=Q * omega_Q)

def sphere_area(n: int) -> float:
    """
    `w_Q = Q omega_Q`, the surface factor of the polar decomposition
    `dy = w_Q r**(Q-1) dr dsigma`.
    """
    return group_constants(n).w_Q

def ball_measure(n: int, k: int) -> float:
    """
    Lebesgue measure of `B_k = B(0, 2**k)`, that is `omega_Q * 2**(kQ)`.
    """
    dims = group_constants(n)
    return ldexp(dims.omega_Q, k * dims.Q)

def annulus_measure(n: int, annulus: Annulus) -> float:
    """
    Lebesgue measure of a dyadic annulus.
    """
    inner = 0.0 if annulus.k_inner is None else ball_measure(n, annulus.k_inner)
    return ball_measure(n, annulus.k_outer) - inner

def unit_ball_volume_mc(n: int, samples: int, seed: int) -> tuple[float, float]:
    """
    Monte-Carlo volume of the unit ball by rejection sampling in `[-1, 1]^(2n+1)`.

    Returns
    -------
    tuple[float, float]
        The estimate and its standard error.
    """
    rng = np.random.default_rng(seed)
    ndim = 2 * n + 1
    box = 2.0**ndim

    inside = 0
    chunk = 1 << 18
    for start in range(0, samples, chunk):
        size = min(chunk, samples - start)
        points = rng.uniform(-1.0, 1.0, size=(size, ndim))
        inside += int(np.count_nonzero(hnorm(points) < 1.0))

    p = inside / samples
    return box * p, box * sqrt(p * (1.0 - p) / samples)

def random_points(n: int, count: int, rng: np.random.Generator, scale: float=1.0) -> np.ndarray:
    """
    Uniform points in the cube `[-scale, scale]^(2n+1)`.
    """
    return rng.uniform(-scale, scale, size=(count, 2 * n + 1))


class HPoint:
    """
    A point of `H^n`.

    Parameters
    ----------
    coords : array-like
        The `2n + 1` coordinates; the center coordinate is last.

    Attributes
    ----------
    coords : numpy.ndarray
        Read-only coordinates.
    n : int
        Dimension parameter.
    z : numpy.ndarray
        Horizontal coordinates.
    t : float
        Center coordinate.

    Methods
    -------
    zero:
        Identity element of `H^n`.
    dilate:
        Apply the dilation `delta_r`.
    dist:
        Heisenberg distance to another point.

    Notes
    -----
    `x * y` is the group law, `-x` the inverse and `abs(x)` the homogeneous norm.
    """
    __slots__ = "coords",

    def __init__(self, coords):
        coords = np.array(coords, dtype=float)
        if coords.ndim != 1:
            raise ValueError(f"expected a flat coordinate vector, got shape {coords.shape}")
        dimension_of(coords)
        if not np.all(np.isfinite(coords)):
            raise ValueError(f"non-finite coordinates {coords}")

        coords.flags.writeable = False
        self.coords = coords

    @classmethod
    def zero(cls, n: int) -> "HPoint":
        """
        Identity element of `H^n`.
        """
        return cls(np.zeros(2 * n + 1))

    @property
    def n(self) -> int:
        return len(self.coords) // 2

    @property
    def z(self) -> np.ndarray:
        return self.coords[:-1]

    @property
    def t(self) -> float:
        return float(self.coords[-1])

    def dilate(self, r: float) -> "HPoint":
        """
        Apply the dilation `delta_r`.
        """
        return HPoint(dilate(r, self.coords))

    def dist(self, other: "HPoint") -> float:
        """
        Heisenberg distance to another point.
        """
        return float(hdist(self.coords, other.coords))

    def __mul__(self, other: "HPoint") -> "HPoint":
        if not isinstance(other, HPoint):
            return NotImplemented

        return HPoint(group_mul(self.coords, other.coords))

    def __neg__(self) -> "HPoint":
        return HPoint(group_inv(self.coords))

    def __abs__(self) -> float:
        return float(hnorm(self.coords))

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords.tolist())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, HPoint):
            return NotImplemented

        return np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"{type(self).__name__}({self.coords.tolist()})"
