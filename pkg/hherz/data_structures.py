"""
Data structures for :mod:`hherz`.
"""
from math import inf, ldexp
from typing import NamedTuple

import numpy as np

__all__ = (
    "GroupDims",
    "Annulus",
    "Shell",
    "Box",
    "Ball",
    "WholeSpace",
    "Region",
    "QuadResult",
    "CheckResult",
    "dyadic",
)

def dyadic(k: int | None) -> float:
    """
    Exact binary radius `2**k`. `None` stands for `k = -inf` and gives `0.0`.
    """
    if k is None:
        return 0.0

    return ldexp(1.0, k)


class GroupDims(NamedTuple):
    """
    Dimension constants of the Heisenberg group `H^n`.

    Parameters
    ----------
    n : int
        Dimension parameter; points have `2n + 1` coordinates.
    Q : int
        Homogeneous dimension, `2n + 2`.
    omega_Q : float
        Volume of the unit ball `B(0, 1)`.
    w_Q : float
        Area of the unit sphere `S(0, 1)`, `Q * omega_Q`.

    Attributes
    ----------
    n : int
        Dimension parameter; points have `2n + 1` coordinates.
    Q : int
        Homogeneous dimension, `2n + 2`.
    omega_Q : float
        Volume of the unit ball `B(0, 1)`.
    w_Q : float
        Area of the unit sphere `S(0, 1)`, `Q * omega_Q`.
    ndim : int
        Number of coordinates, `2n + 1`.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    n: int
    Q: int
    omega_Q: float
    w_Q: float

    @property
    def ndim(self) -> int:
        """
        Number of coordinates, `2n + 1`.
        """
        return 2 * self.n + 1


class Annulus(NamedTuple):
    """
    A dyadic annulus `{x : 2**k_inner <= |x|_h < 2**k_outer}`.

    `B_k` is `Annulus(None, k)` and `E_k` is `Annulus(k - 1, k)`.

    Parameters
    ----------
    k_inner : int | None
        Inner exponent. `None` stands for negative infinity.
    k_outer : int
        Outer exponent.

    Attributes
    ----------
    k_inner : int | None
        Inner exponent. `None` stands for negative infinity.
    k_outer : int
        Outer exponent.
    r_lo : float
        Inner radius.
    r_hi : float
        Outer radius.

    Methods
    -------
    between:
        Validated constructor.
    ball:
        The ball `B_k`.
    shell:
        The annulus `E_k`.
    contains:
        Membership mask for an array of homogeneous norms.
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    k_inner: int | None
    k_outer: int

    @classmethod
    def between(cls, k_inner: int | None, k_outer: int) -> "Annulus":
        """
        Annulus between two exponents, validating `k_inner < k_outer`.
        """
        if k_inner is not None and k_inner >= k_outer:
            raise ValueError(f"empty annulus ({k_inner=} >= {k_outer=})")

        return cls(k_inner, k_outer)

    @classmethod
    def ball(cls, k: int) -> "Annulus":
        """
        The ball `B_k = {|x|_h < 2**k}`.
        """
        return cls(None, k)

    @classmethod
    def shell(cls, k: int) -> "Annulus":
        """
        The annulus `E_k = B_k minus B_(k - 1)`.
        """
        return cls(k - 1, k)

    @property
    def r_lo(self) -> float:
        return dyadic(self.k_inner)

    @property
    def r_hi(self) -> float:
        return dyadic(self.k_outer)

    def contains(self, norms: np.ndarray) -> np.ndarray:
        """
        Membership mask for an array of homogeneous norms.
        """
        return (norms >= self.r_lo) & (norms < self.r_hi)


class Shell(NamedTuple):
    """
    A closed shell `{x : r_lo <= |x|_h <= r_hi}` with arbitrary radii.

    Parameters
    ----------
    r_lo : float
        Inner radius (non-negative).
    r_hi : float
        Outer radius, possibly infinite.

    Attributes
    ----------
    r_lo : float
        Inner radius.
    r_hi : float
        Outer radius, possibly infinite.

    Methods
    -------
    covering:
        Smallest dyadic annulus containing the shell.
    contains:
        Membership mask for an array of homogeneous norms.
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    r_lo: float
    r_hi: float = inf

    def covering(self, tail_k: int | None=None) -> Annulus:
        """
        Smallest dyadic annulus containing the shell. An infinite outer radius
        is truncated at `2**tail_k`.
        """
        if self.r_hi == inf:
            if tail_k is None:
                raise ValueError("unbounded shell requires tail_k")
            k_outer = tail_k
        else:
            k_outer = int(np.ceil(np.log2(self.r_hi)))

        k_inner = None if self.r_lo <= 0 else int(np.floor(np.log2(self.r_lo)))
        return Annulus.between(k_inner, k_outer)

    def contains(self, norms: np.ndarray) -> np.ndarray:
        """
        Membership mask for an array of homogeneous norms.
        """
        return (norms >= self.r_lo) & (norms <= self.r_hi)


class Box(NamedTuple):
    """
    An axis-aligned box in `R^(2n+1)`.

    Parameters
    ----------
    lo : tuple[float, ...]
        Lower corner.
    hi : tuple[float, ...]
        Upper corner.

    Attributes
    ----------
    lo : tuple[float, ...]
        Lower corner.
    hi : tuple[float, ...]
        Upper corner.
    volume : float
        Lebesgue measure of the box.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))


class Ball(NamedTuple):
    """
    The ball `B(center, radius) = {y : d(center, y) < radius}`.

    Parameters
    ----------
    center : tuple[float, ...]
        Center of the ball.
    radius : float
        Radius of the ball.

    Attributes
    ----------
    center : tuple[float, ...]
        Center of the ball.
    radius : float
        Radius of the ball.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.

    Notes
    -----
    `B(x, r)` is the left translate `x . B(0, r)`, so integrals over it are
    integrals over the unit ball after a translation and a dilation.
    """
    center: tuple[float, ...]
    radius: float


class WholeSpace(NamedTuple):
    """
    All of `H^n`; integrals over it are truncated by `QuadSpec.tail_k`.
    """


Region = Box | Annulus | Shell | Ball | WholeSpace


class QuadResult(NamedTuple):
    """
    Result of a numerical integral.

    Parameters
    ----------
    value : float
        Estimated integral.
    err_est : float
        Heuristic absolute error.
    n_evals : int
        Number of integrand evaluations.
    flagged : bool, default: False
        True if the error estimate exceeds the requested tolerance.
    tail_est : float | None, default: None
        Majorant of the discarded tail and core, if one was supplied.

    Attributes
    ----------
    value : float
        Estimated integral.
    err_est : float
        Heuristic absolute error.
    n_evals : int
        Number of integrand evaluations.
    flagged : bool
        True if the error estimate exceeds the requested tolerance.
    tail_est : float | None
        Majorant of the discarded tail and core, if one was supplied.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    value: float
    err_est: float
    n_evals: int
    flagged: bool = False
    tail_est: float | None = None


class CheckResult(NamedTuple):
    """
    Outcome of a single numerical check.

    Parameters
    ----------
    name : str
        Name of the check.
    passed : bool
        Whether the check passed.
    residual : float
        Worst residual (or computed value, for oracle comparisons).
    tolerance : float
        Tolerance the residual was held to.
    detail : str, default: ""
        Free-form detail.

    Attributes
    ----------
    name : str
        Name of the check.
    passed : bool
        Whether the check passed.
    residual : float
        Worst residual (or computed value, for oracle comparisons).
    tolerance : float
        Tolerance the residual was held to.
    detail : str
        Free-form detail.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""
