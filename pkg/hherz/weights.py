"""
Weights on `H^n`, the Muckenhoupt `A_p` and reverse-Hölder `RH_r` estimators,
and closed forms for power weights `|x|_h**beta`.

Estimators average over one shared node set per ball, so a constant weight
gives ratios of exactly 1 and `w -> c w` leaves them unchanged.
"""
import logging
from collections.abc import Callable, Sequence
from enum import Enum
from math import inf
from typing import NamedTuple

import numpy as np

from ._parallel import parallel_map
from .data_structures import Ball, GroupDims, QuadResult, Region, dyadic
from .heisenberg import group_constants, hdist, hnorm
from .quadrature import QuadSpec, evaluate_on_nodes, integrate_many, integrate_region, sample_region

__all__ = (
    "WeightKind",
    "Weight",
    "WeightIndices",
    "SandwichReport",
    "AvgBoundReport",
    "SweepReport",
    "weighted_measure",
    "power_measure",
    "power_ball_measure",
    "ap_ratio",
    "power_weight_indices",
    "power_weight_in_ap",
    "rh_ratio",
    "sandwich_check",
    "weighted_avg_bound_check",
    "ball_family",
    "ap_sweep",
    "rh_sweep",
)

logger = logging.getLogger(__name__)

FAILS = "fails"
SUGGESTS_MEMBERSHIP = "suggests membership"


class WeightKind(str, Enum):
    """
    Kind of a :class:`Weight`.

    :class:`WeightKind` is one of "unit", "power", "custom".
    """
    UNIT = "unit"
    POWER = "power"
    CUSTOM = "custom"


class Weight(NamedTuple):
    """
    A non-negative, locally integrable weight on `H^n`.

    Weights are vectorized integrands: called on points of shape
    `(m, 2n + 1)` they return `m` values.

    Parameters
    ----------
    kind : WeightKind
        Kind of weight.
    n : int
        Dimension parameter.
    beta : float, default: 0.0
        Exponent of a power weight `|x|_h**beta`.
    fn : Callable[[numpy.ndarray], numpy.ndarray] | None, default: None
        Evaluator of a custom weight.
    scale : float, default: 1.0
        Positive constant multiplying the weight.

    Attributes
    ----------
    kind : WeightKind
        Kind of weight.
    n : int
        Dimension parameter.
    beta : float
        Exponent of a power weight `|x|_h**beta`.
    fn : Callable[[numpy.ndarray], numpy.ndarray] | None
        Evaluator of a custom weight.
    scale : float
        Positive constant multiplying the weight.
    exponent : float | None
        `beta` for power weights, 0 for the unit weight, `None` for custom weights.

    Methods
    -------
    unit:
        The weight `w = 1`.
    power:
        The weight `|x|_h**beta`.
    custom:
        A weight given by a function.
    from_literal:
        Weight from a scenario-file mapping.
    scaled:
        The weight `c w`.
    profile:
        Radial profile of a unit or power weight.
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    kind: WeightKind
    n: int
    beta: float = 0.0
    fn: Callable[[np.ndarray], np.ndarray] | None = None
    scale: float = 1.0

    @classmethod
    def unit(cls, n: int) -> "Weight":
        return cls(WeightKind.UNIT, n)

    @classmethod
    def power(cls, beta: float, n: int) -> "Weight":
        """
        The power weight `|x|_h**beta`, locally integrable iff `beta > -Q`.
        """
        Q = group_constants(n).Q
        if beta <= -Q:
            raise ValueError(f"|x|_h**beta is not locally integrable for beta <= -Q ({beta=}, {Q=})")

        return cls(WeightKind.POWER, n, beta=float(beta))

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray], np.ndarray], n: int) -> "Weight":
        return cls(WeightKind.CUSTOM, n, fn=fn)

    @classmethod
    def from_literal(cls, literal: dict, n: int) -> "Weight":
        """
        Weight from `{"kind": "unit"}` or `{"kind": "power", "beta": beta}`.
        """
        match WeightKind(literal.get("kind")):
            case WeightKind.UNIT:
                return cls.unit(n)
            case WeightKind.POWER:
                if "beta" not in literal:
                    raise ValueError("power weight literal is missing 'beta'")
                return cls.power(literal["beta"], n)

        raise ValueError("custom weights cannot be read from a literal")

    @property
    def exponent(self) -> float | None:
        match self.kind:
            case WeightKind.UNIT:
                return 0.0
            case WeightKind.POWER:
                return self.beta

        return None

    def scaled(self, c: float) -> "Weight":
        """
        The weight `c w`, `c > 0`.
        """
        if c <= 0:
            raise ValueError(f"weights scale by positive constants ({c=})")

        return self._replace(scale=self.scale * c)

    def profile(self, r: float) -> float:
        """
        Radial profile `w(r)` of a unit or power weight.
        """
        if self.exponent is None:
            raise ValueError("custom weights have no radial profile")

        return self.scale * r**self.exponent

    def __call__(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        match self.kind:
            case WeightKind.UNIT:
                return np.full(points.shape[:-1], self.scale)
            case WeightKind.POWER:
                with np.errstate(divide="ignore"):
                    return self.scale * hnorm(points) ** self.beta

        values = self.scale * np.asarray(self.fn(points), dtype=float)
        if np.any(values < 0):
            raise ValueError("weight is negative at some point")
        return values


class WeightIndices(NamedTuple):
    """
    Critical indices of a weight.

    Parameters
    ----------
    q_w : float
        `inf {q > 1 : w in A_q}` (1 for `A_1` weights).
    r_w : float
        `sup {r > 1 : w in RH_r}`, possibly infinite.

    Attributes
    ----------
    q_w : float
        `inf {q > 1 : w in A_q}` (1 for `A_1` weights).
    r_w : float
        `sup {r > 1 : w in RH_r}`, possibly infinite.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    q_w: float
    r_w: float


def _check_beta(beta: float, dims: GroupDims):
    if beta <= -dims.Q:
        raise ValueError(f"power exponent must exceed -Q ({beta=}, Q={dims.Q})")

def power_measure(beta: float, radius: float, dims: GroupDims) -> float:
    """
    `v(B(0, R)) = w_Q R**(Q + beta) / (Q + beta)` for `v = |x|_h**beta`.
    """
    _check_beta(beta, dims)
    return dims.w_Q * radius ** (dims.Q + beta) / (dims.Q + beta)

def power_ball_measure(beta: float, k: int, dims: GroupDims) -> float:
    """
    `v(B_k) = w_Q 2**(k (Q + beta)) / (Q + beta)` for `v = |x|_h**beta`.

    With `beta = 0` this is `|B_k| = omega_Q 2**(kQ)`.
    """
    return power_measure(beta, dyadic(k), dims)

def weighted_measure(w: Weight, region: Region, spec: QuadSpec) -> QuadResult:
    """
    `w(E) = int_E w(x) dx` by quadrature.
    """
    tail_majorant = w.profile if w.exponent is not None else None
    return integrate_region(w, region, spec, n=w.n, tail_majorant=tail_majorant, core_majorant=tail_majorant)

def power_weight_indices(beta: float, n: int) -> WeightIndices:
    """
    Critical indices of `|x|_h**beta`.

    `q_w = 1` if `beta <= 0`, else `(Q + beta) / Q`; `r_w = inf` if `beta >= 0`,
    else `Q / -beta`, the integrability limit `r beta > -Q`.
    """
    dims = group_constants(n)
    _check_beta(beta, dims)

    q_w = 1.0 if beta <= 0 else (dims.Q + beta) / dims.Q
    r_w = inf if beta >= 0 else dims.Q / -beta
    return WeightIndices(q_w, r_w)

def power_weight_in_ap(beta: float, p: float, n: int) -> bool:
    """
    `|x|_h**beta` is in `A_1` iff `-Q < beta <= 0` and in `A_p`, `p > 1`, iff
    `-Q < beta < Q (p - 1)`.
    """
    Q = group_constants(n).Q
    if p < 1:
        raise ValueError(f"p must be at least 1 ({p=})")
    if p == 1:
        return -Q < beta <= 0

    return -Q < beta < Q * (p - 1)

def _ball_nodes(w: Weight, ball: Ball, spec: QuadSpec):
    nodes = sample_region(ball, spec, n=w.n)
    return nodes, nodes.weights, evaluate_on_nodes(w, nodes)

def _average(values: np.ndarray, node_weights: np.ndarray) -> float:
    return float(np.sum(values * node_weights) / np.sum(node_weights))

def _essinf(w: Weight, ball: Ball, points: np.ndarray, values: np.ndarray, seed: int) -> float:
    """
    Minimum of `w` over the nodes, refined by a shrinking random search
    inside the ball around the node attaining it.
    """
    i = int(np.argmin(values))
    best, best_value = points[i], float(values[i])
    rng = np.random.default_rng(seed)

    for step in np.geomspace(0.1, 1e-4, 12):
        if best_value == 0:
            break
        candidates = best + step * ball.radius * rng.standard_normal((128, len(best)))
        inside = (hdist(candidates, ball.center) < ball.radius) & (hnorm(candidates) > 0)
        if not inside.any():
            continue
        candidate_values = w(candidates[inside])
        j = int(np.argmin(candidate_values))
        if candidate_values[j] < best_value:
            best, best_value = candidates[inside][j], float(candidate_values[j])

    return best_value

def ap_ratio(w: Weight, p: float, ball: Ball, spec: QuadSpec) -> float:
    """
    The `A_p` bracket of `w` on one ball.

    For `p > 1` this is `avg_B(w) * avg_B(w**(-p'/p))**(p/p')`; for `p = 1`,
    `avg_B(w) / essinf_B(w)`. A weight vanishing on the ball, or a power
    weight whose dual `w**(-1/(p - 1))` is not integrable there, gives `inf`.
    """
    if p < 1:
        raise ValueError(f"p must be at least 1 ({p=})")
    if p > 1 and _diverges(w, -1 / (p - 1), ball):
        logger.warning("dual weight |x|_h**%g is not integrable on %s", -w.beta / (p - 1), ball)
        return inf

    nodes, node_weights, values = _ball_nodes(w, ball, spec)
    avg = _average(values, node_weights)

    if p == 1:
        essinf = _essinf(w, ball, nodes.points, values, spec.seed)
        return inf if essinf == 0 else avg / essinf

    if np.any(values == 0):
        return inf

    dual = _average(values ** (-1 / (p - 1)), node_weights)
    return avg * dual ** (p - 1)

def _diverges(w: Weight, s: float, ball: Ball) -> bool:
    """
    `w**s` is not integrable near the origin and the ball contains it.
    """
    if w.kind is not WeightKind.POWER or s * w.beta > -group_constants(w.n).Q:
        return False

    return float(hnorm(np.asarray(ball.center, dtype=float))) < ball.radius

def rh_ratio(w: Weight, r: float, ball: Ball, spec: QuadSpec) -> float:
    """
    The reverse-Hölder ratio `avg_B(w**r)**(1/r) / avg_B(w)`; `inf` when
    `w**r` is not integrable on the ball.
    """
    if r <= 1:
        raise ValueError(f"reverse-Hölder exponent must exceed 1 ({r=})")

    if _diverges(w, r, ball):
        logger.warning("|x|_h**%g is not integrable on %s", r * w.beta, ball)
        return inf

    _, node_weights, values = _ball_nodes(w, ball, spec)
    avg = _average(values, node_weights)
    if avg == 0:
        return inf

    return _average(values**r, node_weights) ** (1 / r) / avg


class SandwichReport(NamedTuple):
    """
    Empirical constants of `C1 (|E|/|B|)**p <= w(E)/w(B) <= C2 (|E|/|B|)**((r-1)/r)`
    and the doubling checks `w(lambda B) <= lambda**(Qp) w(B)`.

    Parameters
    ----------
    c1 : float
        Largest admissible `C1` over the pairs.
    c2 : float
        Smallest admissible `C2` over the pairs.
    doubling : list[tuple[float, float, float, bool]]
        `(lambda, w(lambda B) / w(B), lambda**(Qp), holds)` per dilation factor.
    holds : bool
        `c1 > 0`, `c2` finite and every doubling check holds.

    Attributes
    ----------
    c1 : float
        Largest admissible `C1` over the pairs.
    c2 : float
        Smallest admissible `C2` over the pairs.
    doubling : list[tuple[float, float, float, bool]]
        `(lambda, w(lambda B) / w(B), lambda**(Qp), holds)` per dilation factor.
    holds : bool
        `c1 > 0`, `c2` finite and every doubling check holds.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    c1: float
    c2: float
    doubling: list[tuple[float, float, float, bool]]
    holds: bool


def _ball_measures(w: Weight, ball: Ball, spec: QuadSpec) -> tuple[float, float]:
    """
    `(w(B), |B|)`, in closed form for origin-centered balls and unit or power weights.
    """
    dims = group_constants(w.n)
    if w.exponent is not None and not np.any(ball.center):
        return w.scale * power_measure(w.exponent, ball.radius, dims), dims.omega_Q * ball.radius**dims.Q

    weighted, lebesgue = integrate_many([w, lambda y: 1.0], ball, spec, n=w.n)
    return weighted.value, lebesgue.value

def sandwich_check(
    w: Weight,
    p: float,
    r: float,
    pairs: Sequence[tuple[Region, Ball]],
    spec: QuadSpec,
    dilations: Sequence[float]=(2.0, 4.0, 8.0),
) -> SandwichReport:
    """
    Measure comparison for `w in A_p cap RH_r` on subsets `E` of balls `B`.

    Parameters
    ----------
    w : Weight
        Weight under test.
    p : float
        `A_p` exponent.
    r : float
        Reverse-Hölder exponent, `r > 1`.
    pairs : Sequence[tuple[Region, Ball]]
        Pairs `(E, B)` with `E` a subset of `B`.
    spec : QuadSpec
        Quadrature for measures without closed form.
    dilations : Sequence[float], default: (2.0, 4.0, 8.0)
        Factors `lambda` of the doubling checks, made on every `B`.

    Returns
    -------
    SandwichReport
        Empirical constants and doubling checks.
    """
    Q = group_constants(w.n).Q

    def pair_ratios(pair):
        subset, ball = pair
        weighted, lebesgue = integrate_many([w, lambda y: 1.0], subset, spec, n=w.n)
        w_ball, ball_volume = _ball_measures(w, ball, spec)
        return weighted.value / w_ball, lebesgue.value / ball_volume

    ratios = parallel_map(pair_ratios, pairs)
    c1 = min((wr / lr**p for wr, lr in ratios if lr > 0), default=inf)
    c2 = max((wr / lr ** ((r - 1) / r) for wr, lr in ratios if lr > 0), default=0.0)

    doubling = []
    balls = dict.fromkeys(Ball(tuple(map(float, ball.center)), float(ball.radius)) for _, ball in pairs)
    for ball in balls:
        w_ball, _ = _ball_measures(w, ball, spec)
        for lam in dilations:
            w_big, _ = _ball_measures(w, ball._replace(radius=lam * ball.radius), spec)
            ratio = w_big / w_ball
            bound = lam ** (Q * p)
            doubling.append((lam, ratio, bound, ratio <= bound))

    holds = c1 > 0 and c2 < inf and all(ok for *_, ok in doubling)
    logger.info("sandwich constants C1=%.4g C2=%.4g over %d pairs", c1, c2, len(ratios))
    return SandwichReport(c1, c2, doubling, holds)


class AvgBoundReport(NamedTuple):
    """
    `avg_B |f| <= C ((1/w(B)) int_B |f|**p w)**(1/p)` on a family of balls.

    Parameters
    ----------
    constant : float
        Smallest admissible `C` over the balls.
    bound : float
        Largest `A_p` bracket `ap_ratio(w, p, B)**(1/p)` over the balls.
    holds : bool
        Whether every ball satisfies the inequality with its own bracket.

    Attributes
    ----------
    constant : float
        Smallest admissible `C` over the balls.
    bound : float
        Largest `A_p` bracket `ap_ratio(w, p, B)**(1/p)` over the balls.
    holds : bool
        Whether every ball satisfies the inequality with its own bracket.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    constant: float
    bound: float
    holds: bool


def weighted_avg_bound_check(
    w: Weight,
    p: float,
    f: Callable[[np.ndarray], np.ndarray],
    balls: Ball | Sequence[Ball],
    spec: QuadSpec,
) -> AvgBoundReport:
    """
    Check `avg_B |f| <= C ((1/w(B)) int_B |f|**p w)**(1/p)` on each ball, with
    the admissible `C` read off the `A_p` bracket of `w` on that ball.
    """
    if isinstance(balls, Ball):
        balls = [balls]

    def one_ball(ball):
        nodes, node_weights, w_values = _ball_nodes(w, ball, spec)
        f_values = np.abs(evaluate_on_nodes(f, nodes))

        lhs = _average(f_values, node_weights)
        rhs = (float(np.sum(f_values**p * w_values * node_weights)) / float(np.sum(w_values * node_weights))) ** (1 / p)
        bracket = ap_ratio(w, p, ball, spec) ** (1 / p)
        constant = 0.0 if lhs == 0 else (inf if rhs == 0 else lhs / rhs)
        return constant, bracket

    results = parallel_map(one_ball, balls)
    constant = max(c for c, _ in results)
    bound = max(b for _, b in results)
    holds = all(c <= b * (1 + 1e-9) for c, b in results)
    return AvgBoundReport(constant, bound, holds)


def ball_family(n: int, ks: Sequence[int]=range(-2, 3), offsets: Sequence[float]=(0.5, 1.5, 3.0)) -> list[Ball]:
    """
    Origin-centered balls `B(0, 2**k)` and, for each, balls of the same
    radius centered at `(offset 2**k, 0, ..., 0)`.
    """
    balls = []
    for k in ks:
        radius = dyadic(k)
        balls.append(Ball((0.0,) * (2 * n + 1), radius))
        for offset in offsets:
            balls.append(Ball((offset * radius,) + (0.0,) * (2 * n), radius))

    return balls


class SweepReport(NamedTuple):
    """
    Ratios of an estimator over a ball family.

    A finite sweep certifies failure when some ratio exceeds the bound and
    otherwise only suggests membership.

    Parameters
    ----------
    ratios : list[float]
        Ratio on each ball.
    sup : float
        Largest ratio.
    bound : float
        Bound the ratios are held to.
    label : str
        "fails" or "suggests membership".

    Attributes
    ----------
    ratios : list[float]
        Ratio on each ball.
    sup : float
        Largest ratio.
    bound : float
        Bound the ratios are held to.
    label : str
        "fails" or "suggests membership".

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    ratios: list[float]
    sup: float
    bound: float
    label: str


def _sweep(estimator, balls: Sequence[Ball], bound: float) -> SweepReport:
    ratios = parallel_map(estimator, balls)
    sup = max(ratios)
    label = FAILS if sup > bound else SUGGESTS_MEMBERSHIP
    logger.info("sweep over %d balls: sup=%.4g (%s)", len(ratios), sup, label)
    return SweepReport(ratios, sup, bound, label)

def ap_sweep(w: Weight, p: float, balls: Sequence[Ball], spec: QuadSpec, bound: float=100.0) -> SweepReport:
    """
    `ap_ratio` over a ball family.
    """
    return _sweep(lambda ball: ap_ratio(w, p, ball, spec), balls, bound)

def rh_sweep(w: Weight, r: float, balls: Sequence[Ball], spec: QuadSpec, bound: float=100.0) -> SweepReport:
    """
    `rh_ratio` over a ball family.
    """
    return _sweep(lambda ball: rh_ratio(w, r, ball, spec), balls, bound)
