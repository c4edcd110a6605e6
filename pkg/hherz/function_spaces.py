"""
Test functions and the weighted Lebesgue, homogeneous Herz and CBMO norms.

The Herz norm of `f` is

    (sum_k w(B_k)**(alpha p / Q) ||f||_{L^q(E_k, w)}**p)**(1/p)

summed over a finite window of `k`, with edge-term diagnostics. The CBMO
norm is the largest weighted mean oscillation over origin-centered balls
`B(0, 2**j)` of a finite grid of `j`, each measured against the unweighted
average over the same ball.
"""
import logging
from collections.abc import Callable
from enum import Enum
from functools import partial
from math import inf
from typing import NamedTuple

import numpy as np

from ._parallel import parallel_map
from .data_structures import Annulus, Ball, QuadResult, Region, dyadic
from .heisenberg import dilate, group_constants, group_mul, hnorm
from .quadrature import (
    QuadMethod,
    QuadSpec,
    evaluate_on_nodes,
    integrate_nodes,
    integrate_radial,
    integrate_region,
    sample_region,
)
from .weights import Weight, power_ball_measure

__all__ = (
    "DEFAULT_HERZ_WINDOW",
    "DEFAULT_CBMO_GRID",
    "EDGE_TOLERANCE",
    "FunctionKind",
    "TestFunction",
    "HerzParams",
    "HerzResult",
    "CbmoResult",
    "lq_norm",
    "herz_norm",
    "ball_average",
    "cbmo_norm",
)

logger = logging.getLogger(__name__)

DEFAULT_HERZ_WINDOW = (-12, 12)
DEFAULT_CBMO_GRID = (-8, 8)
EDGE_TOLERANCE = 0.01


class FunctionKind(str, Enum):
    """
    Kind of a :class:`TestFunction`.

    :class:`FunctionKind` is one of "power", "char_ball", "char_annulus",
    "log_norm", "bump", "constant", "custom".
    """
    POWER = "power"
    CHAR_BALL = "char_ball"
    CHAR_ANNULUS = "char_annulus"
    LOG_NORM = "log_norm"
    BUMP = "bump"
    CONSTANT = "constant"
    CUSTOM = "custom"


_LITERAL_FIELDS = {
    FunctionKind.POWER: ("lambda",),
    FunctionKind.CHAR_BALL: ("k",),
    FunctionKind.CHAR_ANNULUS: ("k1", "k2"),
    FunctionKind.LOG_NORM: (),
    FunctionKind.BUMP: ("k_center", "width"),
    FunctionKind.CONSTANT: ("c",),
}


class TestFunction(NamedTuple):
    """
    A catalog function `x -> coef * base(delta_dilation(shift . x)) + offset`.

    Parameters
    ----------
    kind : FunctionKind
        Catalog entry.
    params : tuple[float, ...], default: ()
        Parameters of the catalog entry, in the order of its literal fields.
    coef : float, default: 1.0
        Multiplier.
    offset : float, default: 0.0
        Added constant.
    dilation : float, default: 1.0
        Argument dilation.
    shift : tuple[float, ...] | None, default: None
        Left translation of the argument.
    fn : Callable[[numpy.ndarray], numpy.ndarray] | None, default: None
        Evaluator of a custom function.

    Attributes
    ----------
    kind : FunctionKind
        Catalog entry.
    params : tuple[float, ...]
        Parameters of the catalog entry.
    coef : float
        Multiplier.
    offset : float
        Added constant.
    dilation : float
        Argument dilation.
    shift : tuple[float, ...] | None
        Left translation of the argument.
    fn : Callable[[numpy.ndarray], numpy.ndarray] | None
        Evaluator of a custom function.
    is_radial : bool
        Whether the function depends on `|x|_h` only.
    singular : bool
        Whether the function may be infinite at the origin.
    support : tuple[float, float]
        Radii `(r_lo, r_hi)` outside which a radial function equals its offset.
    breakpoints : tuple[float, ...]
        Radii where a radial function jumps.

    Methods
    -------
    power:
        `|x|_h**-lam`.
    char_ball:
        Indicator of `B_k`.
    char_annulus:
        Indicator of `{2**k1 <= |x|_h < 2**k2}`.
    log_norm:
        `log |x|_h`.
    bump:
        Smooth bump in `log2 |x|_h` around `k_center`.
    constant:
        The constant `c`.
    custom:
        A function given by an evaluator.
    from_literal:
        Function from a scenario-file mapping.
    scaled:
        `c f`.
    plus:
        `f + c`.
    shifted:
        `x -> f(a . x)`.
    dilated:
        `x -> f(delta_r x)`.
    profile:
        Radial profile.
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    kind: FunctionKind
    params: tuple[float, ...] = ()
    coef: float = 1.0
    offset: float = 0.0
    dilation: float = 1.0
    shift: tuple[float, ...] | None = None
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    __test__ = False

    @classmethod
    def power(cls, lam: float) -> "TestFunction":
        return cls(FunctionKind.POWER, (float(lam),))

    @classmethod
    def char_ball(cls, k: int) -> "TestFunction":
        return cls(FunctionKind.CHAR_BALL, (int(k),))

    @classmethod
    def char_annulus(cls, k1: int, k2: int) -> "TestFunction":
        Annulus.between(k1, k2)
        return cls(FunctionKind.CHAR_ANNULUS, (int(k1), int(k2)))

    @classmethod
    def log_norm(cls) -> "TestFunction":
        return cls(FunctionKind.LOG_NORM)

    @classmethod
    def bump(cls, k_center: float, width: float) -> "TestFunction":
        if width <= 0:
            raise ValueError(f"bump width must be positive ({width=})")
        return cls(FunctionKind.BUMP, (float(k_center), float(width)))

    @classmethod
    def constant(cls, c: float) -> "TestFunction":
        return cls(FunctionKind.CONSTANT, (float(c),))

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray], np.ndarray]) -> "TestFunction":
        return cls(FunctionKind.CUSTOM, fn=fn)

    @classmethod
    def from_literal(cls, literal: dict) -> "TestFunction":
        """
        Function from a mapping such as `{"kind": "power", "lambda": 2.0}` or
        `{"kind": "char_ball", "k": 0, "coef": 3.0}`.
        """
        kind = FunctionKind(literal.get("kind"))
        if kind is FunctionKind.CUSTOM:
            raise ValueError("custom functions cannot be read from a literal")

        fields = _LITERAL_FIELDS[kind]
        unknown = set(literal) - set(fields) - {"kind", "coef", "offset"}
        if unknown:
            raise ValueError(f"unknown fields {sorted(unknown)} for a {kind.value} function")
        missing = [name for name in fields if name not in literal]
        if missing:
            raise ValueError(f"{kind.value} function literal is missing {missing}")

        constructor = getattr(cls, kind.value)
        f = constructor(*(literal[name] for name in fields))
        return f._replace(coef=float(literal.get("coef", 1.0)), offset=float(literal.get("offset", 0.0)))

    @property
    def is_radial(self) -> bool:
        return self.kind is not FunctionKind.CUSTOM and self.shift is None

    @property
    def singular(self) -> bool:
        match self.kind:
            case FunctionKind.POWER:
                return self.params[0] > 0
            case FunctionKind.LOG_NORM | FunctionKind.CUSTOM:
                return True

        return False

    @property
    def support(self) -> tuple[float, float]:
        d = self.dilation
        match self.kind:
            case FunctionKind.CHAR_BALL:
                return 0.0, dyadic(self.params[0]) / d
            case FunctionKind.CHAR_ANNULUS:
                return dyadic(self.params[0]) / d, dyadic(self.params[1]) / d
            case FunctionKind.BUMP:
                k_center, width = self.params
                return 2.0 ** (k_center - width) / d, 2.0 ** (k_center + width) / d

        return 0.0, inf

    @property
    def breakpoints(self) -> tuple[float, ...]:
        if self.kind in (FunctionKind.CHAR_BALL, FunctionKind.CHAR_ANNULUS):
            return tuple(r for r in self.support if 0 < r < inf)
        return ()

    def scaled(self, c: float) -> "TestFunction":
        return self._replace(coef=self.coef * c, offset=self.offset * c)

    def plus(self, c: float) -> "TestFunction":
        return self._replace(offset=self.offset + c)

    def shifted(self, a) -> "TestFunction":
        """
        `x -> f(a . x)`.
        """
        a = np.asarray(a, dtype=float)
        if self.shift is not None:
            a = group_mul(np.asarray(self.shift), a)
        return self._replace(shift=tuple(a.tolist()))

    def dilated(self, r: float) -> "TestFunction":
        """
        `x -> f(delta_r x)`.
        """
        if r <= 0:
            raise ValueError(f"dilation factor must be positive ({r=})")

        shift = None if self.shift is None else tuple(dilate(1.0 / r, self.shift).tolist())
        return self._replace(dilation=self.dilation * r, shift=shift)

    def _base(self, points: np.ndarray) -> np.ndarray:
        if self.kind is FunctionKind.CUSTOM:
            return np.asarray(self.fn(points), dtype=float)

        r = hnorm(points)
        with np.errstate(divide="ignore"):
            match self.kind:
                case FunctionKind.POWER:
                    return r ** -self.params[0]
                case FunctionKind.CHAR_BALL:
                    return (r < dyadic(self.params[0])).astype(float)
                case FunctionKind.CHAR_ANNULUS:
                    return Annulus(*self.params).contains(r).astype(float)
                case FunctionKind.LOG_NORM:
                    return np.log(r)
                case FunctionKind.BUMP:
                    k_center, width = self.params
                    s = (np.log2(r) - k_center) / width
                    inside = np.abs(s) < 1
                    out = np.zeros_like(r)
                    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
                    return out
                case FunctionKind.CONSTANT:
                    return np.full(r.shape, self.params[0])

    def __call__(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.shift is not None:
            points = group_mul(np.broadcast_to(self.shift, points.shape), points)
        if self.dilation != 1.0:
            points = dilate(self.dilation, points)

        return self.coef * self._base(points) + self.offset

    def profile(self, r: float, n: int=1) -> float:
        """
        Radial profile `f(r)`, read at `(r, 0, ..., 0)` in `H^n`.
        """
        if not self.is_radial:
            raise ValueError(f"{self.kind.value} function is not radial")

        point = np.zeros((1, group_constants(n).ndim))
        point[0, 0] = r
        return float(self(point)[0])


class HerzParams(NamedTuple):
    """
    Parameters of the homogeneous weighted Herz norm.

    Parameters
    ----------
    alpha : float
        Weight power.
    p : float
        Outer exponent, `1 <= p < inf`.
    q : float
        Inner exponent, `1 <= q < inf`.
    weight : Weight
        Weight.
    k_min : int, default: DEFAULT_HERZ_WINDOW[0]
        First annulus index.
    k_max : int, default: DEFAULT_HERZ_WINDOW[1]
        Last annulus index.

    Attributes
    ----------
    alpha : float
        Weight power.
    p : float
        Outer exponent.
    q : float
        Inner exponent.
    weight : Weight
        Weight.
    k_min : int
        First annulus index.
    k_max : int
        Last annulus index.

    Methods
    -------
    validated:
        Check ranges and return self.
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    alpha: float
    p: float
    q: float
    weight: Weight
    k_min: int = DEFAULT_HERZ_WINDOW[0]
    k_max: int = DEFAULT_HERZ_WINDOW[1]

    def validated(self) -> "HerzParams":
        if self.k_min >= self.k_max:
            raise ValueError(f"empty Herz window ({self.k_min=}, {self.k_max=})")
        if not 1 <= self.p < inf or not 1 <= self.q < inf:
            raise ValueError(f"Herz exponents must be finite and at least 1 ({self.p=}, {self.q=})")
        return self


class HerzResult(NamedTuple):
    """
    A truncated Herz norm with its diagnostics.

    Parameters
    ----------
    value : float
        The norm over the window.
    err_est : float
        Propagated quadrature error.
    terms : list[float]
        `w(B_k)**(alpha p / Q) ||f||_{L^q(E_k, w)}**p` for each `k` in the window.
    edge_lo : float
        Relative contribution of the first term.
    edge_hi : float
        Relative contribution of the last term.
    flagged : bool
        Whether an edge term exceeds 1% of the sum or a quadrature was flagged.

    Attributes
    ----------
    value : float
        The norm over the window.
    err_est : float
        Propagated quadrature error.
    terms : list[float]
        Per-annulus terms.
    edge_lo : float
        Relative contribution of the first term.
    edge_hi : float
        Relative contribution of the last term.
    flagged : bool
        Whether an edge term exceeds 1% of the sum or a quadrature was flagged.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    value: float
    err_est: float
    terms: list[float]
    edge_lo: float
    edge_hi: float
    flagged: bool


class CbmoResult(NamedTuple):
    """
    A CBMO norm over a radius grid.

    Parameters
    ----------
    value : float
        Largest oscillation over the grid.
    argmax_radius : float
        Radius attaining it.
    oscillations : list[float]
        Oscillation at each grid radius.
    radii : list[float]
        Grid radii.
    err_est : float, default: 0.0
        Quadrature error of the largest oscillation.

    Attributes
    ----------
    value : float
        Largest oscillation over the grid.
    argmax_radius : float
        Radius attaining it.
    oscillations : list[float]
        Oscillation at each grid radius.
    radii : list[float]
        Grid radii.
    err_est : float
        Quadrature error of the largest oscillation.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    value: float
    argmax_radius: float
    oscillations: list[float]
    radii: list[float]
    err_est: float = 0.0


Function = TestFunction | Callable[[np.ndarray], np.ndarray]

def _breakpoints(f) -> tuple[float, ...]:
    return f.breakpoints if isinstance(f, TestFunction) else ()

def _power_integrand(f: Function, q: float, w: Weight):
    def integrand(points):
        return np.abs(f(points)) ** q * w(points)

    return integrand

def lq_norm(f: Function, q: float, region: Region, w: Weight, spec: QuadSpec) -> QuadResult:
    """
    `(int_region |f|**q w)**(1/q)`.
    """
    if q < 1:
        raise ValueError(f"q must be at least 1 ({q=})")

    result = integrate_region(_power_integrand(f, q, w), region, spec, n=w.n, breakpoints=_breakpoints(f))
    integral = max(result.value, 0.0)
    value = integral ** (1 / q)
    err_est = 0.0 if integral == 0 else result.err_est * value / (q * integral)
    return result._replace(value=value, err_est=err_est)

def _weighted_ball_measure(w: Weight, k: int, spec: QuadSpec) -> float:
    if w.exponent is not None:
        return w.scale * power_ball_measure(w.exponent, k, group_constants(w.n))

    return integrate_region(w, Annulus.ball(k), spec, n=w.n).value

def _outside_support(f: Function, k: int) -> bool:
    if not isinstance(f, TestFunction) or not f.is_radial or f.offset != 0:
        return False

    r_lo, r_hi = f.support
    return dyadic(k) <= r_lo or dyadic(k - 1) >= r_hi

def herz_norm(f: Function, hp: HerzParams, spec: QuadSpec) -> HerzResult:
    """
    Homogeneous weighted Herz norm of `f` over the window `[k_min, k_max]`.

    Parameters
    ----------
    f : TestFunction | Callable
        Vectorized function.
    hp : HerzParams
        Exponents, weight and window.
    spec : QuadSpec
        Quadrature used on each annulus `E_k`.

    Returns
    -------
    HerzResult
        The norm, its error and the per-annulus terms. The edge fractions
        show how much the window's first and last annuli contribute; above
        1% the window has not captured the norm and the result is flagged.
    """
    hp = hp.validated()
    w = hp.weight
    Q = group_constants(w.n).Q
    ks = range(hp.k_min, hp.k_max + 1)

    def annulus_term(k):
        if _outside_support(f, k):
            return 0.0, 0.0, False

        local = lq_norm(f, hp.q, Annulus.shell(k), w, spec)
        factor = _weighted_ball_measure(w, k, spec) ** (hp.alpha * hp.p / Q)
        term = factor * local.value**hp.p
        d_term = factor * hp.p * local.value ** (hp.p - 1) * local.err_est
        logger.debug("Herz term k=%d: %.6g", k, term)
        return term, d_term, local.flagged

    results = parallel_map(annulus_term, ks)
    terms = [term for term, _, _ in results]
    total = float(np.sum(terms))

    if total == 0:
        return HerzResult(0.0, 0.0, terms, 0.0, 0.0, any(flag for *_, flag in results))

    value = total ** (1 / hp.p)
    err_est = value / (hp.p * total) * float(np.sum([d for _, d, _ in results]))
    edge_lo, edge_hi = terms[0] / total, terms[-1] / total
    flagged = edge_lo > EDGE_TOLERANCE or edge_hi > EDGE_TOLERANCE or any(flag for *_, flag in results)

    if edge_lo > EDGE_TOLERANCE or edge_hi > EDGE_TOLERANCE:
        logger.warning(
            "Herz window [%d, %d] not converged: edge terms %.3g and %.3g of the sum",
            hp.k_min, hp.k_max, edge_lo, edge_hi,
        )

    return HerzResult(value, err_est, terms, edge_lo, edge_hi, flagged)

def _radius(k_or_radius: int | float) -> float:
    if isinstance(k_or_radius, (int, np.integer)):
        return dyadic(int(k_or_radius))
    if k_or_radius <= 0:
        raise ValueError(f"radius must be positive ({k_or_radius=})")
    return float(k_or_radius)

def _require_radial(f: Function, w: Weight | None=None):
    """
    Preconditions of "radial_1d": radial catalog functions and unit or power weights.
    """
    if not isinstance(f, TestFunction) or not f.is_radial:
        kind = f.kind.value if isinstance(f, TestFunction) else type(f).__name__
        raise ValueError(f"radial_1d quadrature needs a radial catalog function (got {kind})")
    if w is not None and w.exponent is None:
        raise ValueError(f"radial_1d quadrature needs a unit or power weight (got a {w.kind.value} weight)")

def _radial_ball_average(f: TestFunction, radius: float, n: int, budget: int | None=None) -> float:
    dims = group_constants(n)
    integral = integrate_radial(partial(f.profile, n=n), 0.0, radius, dims, breakpoints=f.breakpoints, budget=budget)
    return integral.value / (dims.omega_Q * radius**dims.Q)

def ball_average(f: Function, k_or_radius: int | float, spec: QuadSpec, *, n: int) -> float:
    """
    Unweighted average `(1/|B(0, R)|) int_{B(0, R)} f`.

    An integer selects `R = 2**k`. On node sets the average is a ratio of
    sums over the same nodes, so constants average to themselves.

    Raises
    ------
    ValueError
        If "radial_1d" is asked for a function that is not a radial catalog function.
    """
    radius = _radius(k_or_radius)
    if spec.method == QuadMethod.RADIAL_1D:
        _require_radial(f)
        return _radial_ball_average(f, radius, n, spec.budget)

    nodes = sample_region(Ball((0.0,) * (2 * n + 1), radius), spec, n=n)
    weights = nodes.weights
    return float(np.sum(weights * evaluate_on_nodes(f, nodes)) / np.sum(weights))

def _root_of_ratio(numerator: QuadResult, denominator: QuadResult, q: float) -> tuple[float, float]:
    if numerator.value <= 0:
        return 0.0, 0.0

    value = (numerator.value / denominator.value) ** (1 / q)
    relative = np.hypot(numerator.err_est / numerator.value, denominator.err_est / denominator.value)
    return float(value), float(value * relative / q)

def _oscillation(b: Function, q: float, w: Weight, radius: float, spec: QuadSpec) -> tuple[float, float]:
    n = w.n
    if spec.method == QuadMethod.RADIAL_1D:
        dims = group_constants(n)
        profile = partial(b.profile, n=n)
        mean = _radial_ball_average(b, radius, n, spec.budget)
        numerator = integrate_radial(
            lambda r: abs(profile(r) - mean) ** q * w.profile(r), 0.0, radius, dims, budget=spec.budget
        )
        denominator = integrate_radial(w.profile, 0.0, radius, dims, budget=spec.budget)
        return _root_of_ratio(numerator, denominator, q)

    nodes = sample_region(Ball((0.0,) * (2 * n + 1), radius), spec, n=n)
    weights = nodes.weights
    b_values = evaluate_on_nodes(b, nodes)
    if np.ptp(b_values) == 0:
        return 0.0, 0.0

    w_values = evaluate_on_nodes(w, nodes)
    mean = np.sum(weights * b_values) / np.sum(weights)
    numerator = integrate_nodes(np.abs(b_values - mean) ** q * w_values, nodes)
    denominator = integrate_nodes(w_values, nodes)
    return _root_of_ratio(numerator, denominator, q)

def cbmo_norm(
    b: Function,
    q: float,
    w: Weight,
    radius_grid: tuple[int, int]=DEFAULT_CBMO_GRID,
    spec: QuadSpec=QuadSpec(),
) -> CbmoResult:
    """
    Weighted CBMO norm over the radii `2**j`, `j` in `radius_grid` (inclusive).

    Returns
    -------
    CbmoResult
        The largest oscillation, the radius attaining it, every oscillation
        and the quadrature error of the largest one.

    Raises
    ------
    ValueError
        On `q <= 1`, an empty grid, or "radial_1d" with a symbol or weight it
        cannot reduce.
    """
    if q <= 1:
        raise ValueError(f"CBMO exponent must exceed 1 ({q=})")
    j_min, j_max = radius_grid
    if j_min > j_max:
        raise ValueError(f"empty radius grid ({radius_grid=})")
    if spec.method == QuadMethod.RADIAL_1D:
        _require_radial(b, w)

    radii = [dyadic(j) for j in range(j_min, j_max + 1)]
    results = parallel_map(lambda radius: _oscillation(b, q, w, radius, spec), radii)
    oscillations = [value for value, _ in results]
    i = int(np.argmax(oscillations))
    logger.debug("CBMO oscillations %s", oscillations)
    return CbmoResult(oscillations[i], radii[i], oscillations, radii, results[i][1])
