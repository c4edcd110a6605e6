"""
Quadrature nodes for every region, and estimates on shared nodes.

Integrals over balls and annuli are stratified by dyadic shell. Each shell
`2**(j - 1) <= |y|_h < 2**j` is sampled in its bounding box
`[-2**j, 2**j]^2n x [-4**j, 4**j]` and membership is decided by the
homogeneous norm. The origin is never a node.

Integrands take an array of points of shape `(m, 2n + 1)` and return `m`
values (or a scalar, which is broadcast).
"""
import logging
from collections.abc import Callable

import numpy as np

from .._parallel import parallel_map
from ..data_structures import Annulus, Ball, Box, QuadResult, Region, Shell, WholeSpace, dyadic
from ..errors import DimensionMismatchError, NonFiniteIntegrandError
from ..heisenberg import dilate, group_constants, group_mul, hnorm
from .quadrature_data_structures import QuadMethod, QuadNodes, QuadSpec

__all__ = (
    "Integrand",
    "grid_size",
    "whole_space_annulus",
    "sample_region",
    "evaluate_on_nodes",
    "integrate_nodes",
)

Integrand = Callable[[np.ndarray], np.ndarray | float]

logger = logging.getLogger(__name__)

_CHUNK = 1 << 15

def grid_size(budget: int, ndim: int) -> int:
    """
    Points per axis of a tensor grid: the largest multiple of 3 (or, for tiny
    budgets, the largest integer) `m` with `m**ndim <= budget`.
    """
    m = max(1, int(round(budget ** (1 / ndim))))
    while (m + 1) ** ndim <= budget:
        m += 1
    while m > 1 and m**ndim > budget:
        m -= 1

    if m >= 3:
        m -= m % 3
    return m

def whole_space_annulus(spec: QuadSpec) -> Annulus:
    """
    The truncated annulus a whole-space integral actually covers.
    """
    if spec.tail_k is None:
        raise ValueError("whole-space integrals require tail_k")

    return Annulus.between(spec.tail_k_lo, spec.tail_k)

def _bounding_box(r_hi: float, ndim: int) -> tuple[np.ndarray, np.ndarray]:
    hi = np.full(ndim, r_hi)
    hi[-1] = r_hi * r_hi
    return -hi, hi

def _shell_radii(annulus: Annulus, strata: int) -> list[tuple[float, float]]:
    if annulus.k_inner is None:
        k_core = annulus.k_outer - strata
        radii = [(0.0, dyadic(k_core))]
        k_first = k_core + 1
    else:
        radii = []
        k_first = annulus.k_inner + 1

    radii.extend((dyadic(j - 1), dyadic(j)) for j in range(k_first, annulus.k_outer + 1))
    return radii

def _norm_filter(member: Callable[[np.ndarray], np.ndarray], r_lo: float=0.0, r_hi: float=np.inf):
    def accept(points):
        norms = hnorm(points)
        return member(norms) & (norms >= r_lo) & (norms < r_hi) & (norms > 0)

    return accept

def _everywhere(norms):
    return np.ones(np.shape(norms), dtype=bool)

def _draw_stratum(job) -> tuple[np.ndarray, float]:
    seed_seq, lo, hi, draws, accept = job
    rng = np.random.default_rng(seed_seq)
    points = rng.uniform(lo, hi, size=(draws, len(lo)))
    return points[accept(points)], float(np.prod(hi - lo))

def _stratified_mc(strata, spec: QuadSpec) -> QuadNodes:
    """
    Rejection sampling of each stratum; `strata` holds `(lo, hi, accept)`
    triples, a sampling box and its membership test.
    """
    draws = max(1, spec.budget // len(strata))
    seeds = np.random.SeedSequence(spec.seed).spawn(len(strata))

    samples = parallel_map(
        _draw_stratum,
        [(seed, lo, hi, draws, accept) for seed, (lo, hi, accept) in zip(seeds, strata)],
    )

    points = np.concatenate([accepted for accepted, _ in samples])
    stratum = np.concatenate(
        [np.full(len(accepted), i, dtype=np.intp) for i, (accepted, _) in enumerate(samples)]
    )
    logger.debug("%d strata x %d draws, %d nodes accepted", len(strata), draws, len(points))

    return QuadNodes(
        points=points,
        stratum=stratum,
        volumes=np.array([volume for _, volume in samples]),
        draws=np.full(len(strata), float(draws)),
        method=QuadMethod.STRATIFIED_MONTE_CARLO,
    )

def _tensor_grid(lo, hi, accept, spec: QuadSpec) -> QuadNodes:
    """
    Midpoint rule on a box. When the points per axis are a multiple of 3,
    every third node (offset 1) forms the nested grid three times coarser.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    ndim = len(lo)
    m = grid_size(spec.budget, ndim)

    axes = [l + (np.arange(m) + 0.5) * (h - l) / m for l, h in zip(lo, hi)]
    points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, ndim)

    if m % 3 == 0:
        on_coarse = np.arange(m) % 3 == 1
        coarse = np.stack(
            np.meshgrid(*[on_coarse] * ndim, indexing="ij"), axis=-1
        ).reshape(-1, ndim).all(axis=-1)
        coarse_draws = (m // 3) ** ndim
    else:
        coarse = None
        coarse_draws = 0

    keep = accept(points)
    points = points[keep]
    if coarse is not None:
        coarse = coarse[keep]

    logger.debug("tensor grid %d^%d, %d nodes kept", m, ndim, len(points))

    return QuadNodes(
        points=points,
        stratum=np.zeros(len(points), dtype=np.intp),
        volumes=np.array([float(np.prod(hi - lo))]),
        draws=np.array([float(m**ndim)]),
        method=QuadMethod.TENSOR_GRID,
        coarse=coarse,
        coarse_draws=coarse_draws,
    )

def _sample_annular(member, covering: Annulus, spec: QuadSpec, ndim: int) -> QuadNodes:
    """
    Nodes of `{y : member(|y|_h)}`, a set contained in `covering`.
    """
    if spec.method == QuadMethod.TENSOR_GRID:
        lo, hi = _bounding_box(covering.r_hi, ndim)
        return _tensor_grid(lo, hi, _norm_filter(member, covering.r_lo, covering.r_hi), spec)

    strata = []
    for r_lo, r_hi in _shell_radii(covering, spec.strata):
        lo, hi = _bounding_box(r_hi, ndim)
        strata.append((lo, hi, _norm_filter(member, r_lo, r_hi)))

    return _stratified_mc(strata, spec)

def _sample_box(box: Box, spec: QuadSpec) -> QuadNodes:
    lo = np.asarray(box.lo, dtype=float)
    hi = np.asarray(box.hi, dtype=float)
    accept = _norm_filter(_everywhere)

    if spec.method == QuadMethod.TENSOR_GRID:
        return _tensor_grid(lo, hi, accept, spec)

    # Slabs along the first axis.
    edges = np.linspace(lo[0], hi[0], min(spec.strata, spec.budget) + 1)
    strata = []
    for left, right in zip(edges[:-1], edges[1:]):
        slab_lo = lo.copy()
        slab_hi = hi.copy()
        slab_lo[0] = left
        slab_hi[0] = right
        strata.append((slab_lo, slab_hi, accept))

    return _stratified_mc(strata, spec)

def sample_region(region: Region, spec: QuadSpec, *, n: int) -> QuadNodes:
    """
    Quadrature nodes of a region of `H^n`.

    Parameters
    ----------
    region : Region
        A box, ball, dyadic annulus, shell or the whole space.
    spec : QuadSpec
        Method, budget and seed. Whole-space integrals (and unbounded shells)
        need `spec.tail_k`.
    n : int
        Dimension parameter.

    Returns
    -------
    QuadNodes
        Nodes, strata and weights. The same `spec` always gives the same nodes.

    Raises
    ------
    ValueError
        If `spec.method` is "radial_1d", which uses no nodes, or if a
        truncation exponent is missing.
    """
    if spec.method == QuadMethod.RADIAL_1D:
        raise ValueError("radial_1d quadrature has no node set")

    ndim = 2 * n + 1

    match region:
        case Box():
            if len(region.lo) != ndim or len(region.hi) != ndim:
                raise ValueError(f"box must have {ndim} coordinates ({region=})")
            return _sample_box(region, spec)
        case Ball(center, radius):
            if radius <= 0:
                raise ValueError(f"ball radius must be positive ({radius=})")
            if len(center) != ndim:
                raise DimensionMismatchError(f"ball center has {len(center)} coordinates, expected {ndim}")
            unit = sample_region(Annulus.ball(0), spec, n=n)
            points = group_mul(np.broadcast_to(center, unit.points.shape), dilate(radius, unit.points))
            return unit._replace(
                points=points,
                volumes=unit.volumes * radius ** group_constants(n).Q,
            )
        case WholeSpace():
            covering = whole_space_annulus(spec)
            return _sample_annular(covering.contains, covering, spec, ndim)
        case Shell():
            return _sample_annular(region.contains, region.covering(spec.tail_k), spec, ndim)
        case Annulus():
            return _sample_annular(region.contains, region, spec, ndim)

    raise TypeError(f"unknown region {region!r}")

def _evaluate_chunk(job) -> np.ndarray:
    g, chunk = job
    values = np.asarray(g(chunk), dtype=float)
    return np.broadcast_to(values, (len(chunk),))

def evaluate_on_nodes(g: Integrand, nodes: QuadNodes) -> np.ndarray:
    """
    Evaluate an integrand on every node, in chunks that may run concurrently.

    Raises
    ------
    NonFiniteIntegrandError
        If any value is NaN or infinite.
    """
    points = nodes.points
    chunks = [points[i:i + _CHUNK] for i in range(0, len(points), _CHUNK)]
    values = parallel_map(_evaluate_chunk, [(g, chunk) for chunk in chunks])
    values = np.concatenate(values) if values else np.empty(0)

    bad = ~np.isfinite(values)
    if bad.any():
        where = points[np.argmax(bad)]
        raise NonFiniteIntegrandError(f"integrand is {values[bad][0]} at {where.tolist()}")

    return values

def integrate_nodes(values: np.ndarray, nodes: QuadNodes, rtol: float | None=None) -> QuadResult:
    """
    Quadrature estimate from integrand values on `nodes`.

    Stratified Monte-Carlo errors are standard errors (rejected draws count
    as zeros); tensor-grid errors are `|I_fine - I_coarse| / 8`, the
    Richardson difference of a second-order rule on grids three times apart.
    """
    values = np.asarray(values, dtype=float)
    n_strata = len(nodes.volumes)

    sums = np.bincount(nodes.stratum, weights=values, minlength=n_strata)
    value = float(np.sum(sums * nodes.volumes / nodes.draws))

    if nodes.method is QuadMethod.TENSOR_GRID:
        if nodes.coarse is None:
            err_est = abs(value)
        else:
            coarse_value = float(np.sum(values[nodes.coarse])) * nodes.volumes[0] / nodes.coarse_draws
            err_est = abs(value - coarse_value) / 8.0
    else:
        squares = np.bincount(nodes.stratum, weights=values * values, minlength=n_strata)
        means = sums / nodes.draws
        variances = np.maximum(squares / nodes.draws - means**2, 0.0)
        variances *= nodes.draws / np.maximum(nodes.draws - 1.0, 1.0)
        err_est = float(np.sqrt(np.sum(nodes.volumes**2 * variances / nodes.draws)))

    flagged = rtol is not None and err_est > rtol * abs(value)
    return QuadResult(value=value, err_est=err_est, n_evals=len(values), flagged=flagged)
