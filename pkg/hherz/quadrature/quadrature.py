"""
Integrals over regions of `H^n` and the 1-d radial reduction.
"""
import logging
from collections.abc import Callable, Sequence
from math import inf

import numpy as np
from scipy.integrate import quad

from ..data_structures import Annulus, Ball, GroupDims, QuadResult, Region, Shell, WholeSpace, dyadic
from ..errors import DivergentIntegralError
from ..heisenberg import group_constants
from .nodes import Integrand, evaluate_on_nodes, integrate_nodes, sample_region, whole_space_annulus
from .quadrature_data_structures import QuadMethod, QuadSpec

__all__ = (
    "integrate_radial",
    "integrate_region",
    "integrate_many",
    "integrate_ball",
    "truncation_estimate",
)

logger = logging.getLogger(__name__)

RadialProfile = Callable[[float], float]

MAX_SUBINTERVALS = 200

def integrate_radial(
    g: RadialProfile,
    r_lo: float,
    r_hi: float,
    dims: GroupDims,
    *,
    rtol: float=1e-10,
    breakpoints: Sequence[float]=(),
    budget: int | None=None,
) -> QuadResult:
    """
    Polar reduction `int_{r_lo <= |y|_h <= r_hi} g(|y|_h) dy = w_Q int g(r) r**(Q-1) dr`.

    Parameters
    ----------
    g : Callable[[float], float]
        Radial profile.
    r_lo : float
        Inner radius, non-negative.
    r_hi : float
        Outer radius, possibly infinite.
    dims : GroupDims
        Constants of the group.
    rtol : float, default: 1e-10
        Relative tolerance of the adaptive integrator.
    breakpoints : Sequence[float], default: ()
        Radii where `g` is discontinuous. Ignored for infinite intervals.
    budget : int | None, default: None
        Cap on profile evaluations; an integral that needs more raises
        :class:`DivergentIntegralError`. A subinterval of the adaptive rule
        costs up to 42 evaluations and every interval between breakpoints
        gets one, so tiny budgets may be exceeded. `None` allows
        `MAX_SUBINTERVALS` subintervals.

    Returns
    -------
    QuadResult
        The integral, its error estimate and the number of profile evaluations.
        Results whose only defect is round-off are flagged.

    Raises
    ------
    DivergentIntegralError
        If the adaptive integrator does not converge.
    """
    if r_lo < 0 or r_hi < r_lo:
        raise ValueError(f"bad radial interval ({r_lo=}, {r_hi=})")

    Q = dims.Q

    def integrand(r):
        return float(g(r)) * r ** (Q - 1)

    interior = sorted(r for r in breakpoints if r_lo < r < r_hi) if r_hi < inf else []
    limit = MAX_SUBINTERVALS
    if budget is not None:
        limit = max(min(limit, (budget + 21) // 42), len(interior) + 2 if interior else 1)

    kwargs = dict(epsabs=0.0, epsrel=rtol, limit=limit, full_output=1)
    if interior:
        kwargs["points"] = interior

    value, abserr, info, *problem = quad(integrand, r_lo, r_hi, **kwargs)

    flagged = False
    if problem:
        message = str(problem[0])
        if "roundoff" not in message.lower() or not np.isfinite(value):
            raise DivergentIntegralError(f"radial integral on [{r_lo}, {r_hi}] did not converge", message)

        logger.warning("radial integral on [%g, %g]: %s", r_lo, r_hi, message)
        flagged = True

    return QuadResult(
        value=dims.w_Q * value,
        err_est=dims.w_Q * abserr,
        n_evals=int(info["neval"]),
        flagged=flagged,
    )

def _radial_limits(region: Region, spec: QuadSpec) -> tuple[float, float]:
    match region:
        case Annulus():
            return region.r_lo, region.r_hi
        case Shell():
            return region.r_lo, region.r_hi if region.r_hi < inf else dyadic(spec.tail_k)
        case WholeSpace():
            covering = whole_space_annulus(spec)
            return covering.r_lo, covering.r_hi
        case Ball(center, radius) if not np.any(center):
            return 0.0, radius

    raise ValueError(f"radial_1d needs a region centered at the origin ({region=})")

def truncation_estimate(
    region: Region,
    spec: QuadSpec,
    dims: GroupDims,
    tail_majorant: RadialProfile | None=None,
    core_majorant: RadialProfile | None=None,
) -> float | None:
    """
    Majorant of what a truncated integral over `region` leaves out.

    The tail `|y|_h >= 2**tail_k` (whole space, unbounded shells) and the core
    `|y|_h < 2**tail_k_lo` (whole space) are bounded by integrating the
    caller's radial majorants. Returns `None` if a needed majorant is missing
    and `0.0` if nothing is left out.
    """
    pieces = []
    if isinstance(region, WholeSpace) or (isinstance(region, Shell) and region.r_hi == inf):
        pieces.append((tail_majorant, dyadic(spec.tail_k), inf))
    if isinstance(region, WholeSpace) and spec.tail_k_lo is not None:
        pieces.append((core_majorant, 0.0, dyadic(spec.tail_k_lo)))

    total = 0.0
    for majorant, r_lo, r_hi in pieces:
        if majorant is None:
            return None
        try:
            total += abs(integrate_radial(majorant, r_lo, r_hi, dims, rtol=1e-6).value)
        except DivergentIntegralError as e:
            logger.warning("majorant diverges on [%g, %g]: %s", r_lo, r_hi, e)
            return inf

    return total

def _profile_on_ray(g: Integrand, ndim: int) -> RadialProfile:
    def profile(r):
        point = np.zeros((1, ndim))
        point[0, 0] = r
        return float(np.asarray(g(point), dtype=float).reshape(-1)[0])

    return profile

def integrate_region(
    g: Integrand,
    region: Region,
    spec: QuadSpec,
    *,
    n: int,
    tail_majorant: RadialProfile | None=None,
    core_majorant: RadialProfile | None=None,
    breakpoints: Sequence[float]=(),
) -> QuadResult:
    """
    Approximate `int_region g(y) dy` with respect to Lebesgue measure on `R^(2n+1)`.

    Parameters
    ----------
    g : Integrand
        Vectorized integrand, `(m, 2n + 1)` points to `m` values. It need not
        be finite at the origin, which is never a node.
    region : Region
        Where to integrate.
    spec : QuadSpec
        Method, budget, seed and truncation.
    n : int
        Dimension parameter.
    tail_majorant : Callable[[float], float] | None, default: None
        Radial majorant of `|g|` beyond the truncation radius.
    core_majorant : Callable[[float], float] | None, default: None
        Radial majorant of `|g|` inside the excluded core.
    breakpoints : Sequence[float], default: ()
        Discontinuity radii, used by "radial_1d" only.

    Returns
    -------
    QuadResult
        Deterministic for a fixed `spec`. With "radial_1d" the integrand is
        read along the ray `(r, 0, ..., 0)` and must be radial.

    Raises
    ------
    NonFiniteIntegrandError
        If `g` is not finite at some node.
    DivergentIntegralError
        If a "radial_1d" integral does not converge.
    """
    dims = group_constants(n)

    if spec.method == QuadMethod.RADIAL_1D:
        r_lo, r_hi = _radial_limits(region, spec)
        result = integrate_radial(
            _profile_on_ray(g, dims.ndim),
            r_lo,
            r_hi,
            dims,
            rtol=spec.rtol or 1e-10,
            breakpoints=breakpoints,
            budget=spec.budget,
        )
    else:
        nodes = sample_region(region, spec, n=n)
        result = integrate_nodes(evaluate_on_nodes(g, nodes), nodes, spec.rtol)

    tail_est = truncation_estimate(region, spec, dims, tail_majorant, core_majorant)
    if tail_est is not None:
        result = result._replace(tail_est=tail_est)

    if result.flagged:
        logger.warning(
            "integral over %s flagged: %.6g +- %.2g after %d evaluations",
            region, result.value, result.err_est, result.n_evals,
        )
    else:
        logger.debug("integral over %s: %.6g +- %.2g", region, result.value, result.err_est)

    return result

def integrate_many(gs: Sequence[Integrand], region: Region, spec: QuadSpec, *, n: int) -> list[QuadResult]:
    """
    Integrate several integrands on one shared node set.
    """
    nodes = sample_region(region, spec, n=n)
    return [integrate_nodes(evaluate_on_nodes(g, nodes), nodes, spec.rtol) for g in gs]

def integrate_ball(g: Integrand, center, radius: float, spec: QuadSpec, *, n: int) -> QuadResult:
    """
    Integral over the ball `B(center, radius) = center . delta_radius(B(0, 1))`.
    """
    return integrate_region(g, Ball(tuple(np.asarray(center, dtype=float)), radius), spec, n=n)
