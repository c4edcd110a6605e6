"""
Data structures for :mod:`hherz.quadrature`.
"""
from enum import Enum
from typing import NamedTuple

import numpy as np

__all__ = (
    "DEFAULT_BUDGET",
    "DEFAULT_STRATA",
    "QuadMethod",
    "QuadSpec",
    "QuadNodes",
)

DEFAULT_BUDGET = 200_000
DEFAULT_STRATA = 12


class QuadMethod(str, Enum):
    """
    Integration method.

    :class:`QuadMethod` is one of "tensor_grid", "stratified_monte_carlo", "radial_1d".

    "tensor_grid" is a midpoint rule on a box (bounding box for balls and annuli),
    "stratified_monte_carlo" samples each dyadic shell of a region separately,
    "radial_1d" reduces a radial integrand to an adaptive 1-d integral.
    """
    TENSOR_GRID = "tensor_grid"
    STRATIFIED_MONTE_CARLO = "stratified_monte_carlo"
    RADIAL_1D = "radial_1d"


class QuadSpec(NamedTuple):
    """
    How an integral is computed.

    Parameters
    ----------
    method : QuadMethod, default: QuadMethod.STRATIFIED_MONTE_CARLO
        Integration method.
    budget : int, default: DEFAULT_BUDGET
        Maximum number of integrand evaluations. Tensor grids round it down
        to a perfect `(2n + 1)`-th power; "radial_1d" limits its adaptive
        subdivision by it.
    seed : int, default: 0
        Seed for stochastic methods.
    tail_k : int | None, default: None
        Whole-space integrals are restricted to `|y|_h < 2**tail_k`.
    tail_k_lo : int | None, default: None
        If set, whole-space integrals also exclude the core `|y|_h < 2**tail_k_lo`.
    rtol : float | None, default: None
        Requested relative tolerance; results whose error estimate exceeds it
        are flagged.
    strata : int, default: DEFAULT_STRATA
        Number of dyadic shells below the outer radius of a ball before the
        remaining core is sampled as one stratum.

    Attributes
    ----------
    method : QuadMethod
        Integration method.
    budget : int
        Maximum number of integrand evaluations.
    seed : int
        Seed for stochastic methods.
    tail_k : int | None
        Truncation exponent for whole-space integrals.
    tail_k_lo : int | None
        Core exclusion exponent for whole-space integrals.
    rtol : float | None
        Requested relative tolerance.
    strata : int
        Number of dyadic shells sampled inside a ball.

    Methods
    -------
    from_literal:
        Build a spec from a scenario-file mapping.
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    method: QuadMethod = QuadMethod.STRATIFIED_MONTE_CARLO
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    tail_k: int | None = None
    tail_k_lo: int | None = None
    rtol: float | None = None
    strata: int = DEFAULT_STRATA

    @classmethod
    def from_literal(cls, literal: dict) -> "QuadSpec":
        """
        Build a spec from a scenario-file mapping such as
        `{"method": "stratified_monte_carlo", "budget": 100000, "seed": 7}`.
        """
        unknown = set(literal) - set(cls._fields)
        if unknown:
            raise ValueError(f"unknown quadrature fields {sorted(unknown)}")

        spec = cls(**literal)
        spec = spec._replace(method=QuadMethod(spec.method))
        if spec.budget < 1:
            raise ValueError(f"budget must be positive ({spec.budget=})")
        if not 0 <= spec.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer ({spec.seed=})")

        return spec


class QuadNodes(NamedTuple):
    """
    Quadrature nodes of a region, grouped in strata.

    The estimate of an integral is `sum_s volumes[s] / draws[s] * sum(g over stratum s)`.
    For Monte-Carlo strata `draws` counts every sample including the rejected
    ones; for a tensor grid it counts every cell of the grid.

    Parameters
    ----------
    points : numpy.ndarray
        Node coordinates, shape `(m, 2n + 1)`.
    stratum : numpy.ndarray
        Stratum index of each node, shape `(m,)`.
    volumes : numpy.ndarray
        Volume of each stratum's sampling box.
    draws : numpy.ndarray
        Number of draws (or cells) of each stratum.
    method : QuadMethod
        Method that produced the nodes.
    coarse : numpy.ndarray | None, default: None
        Tensor grids only: mask of the nested coarse grid.
    coarse_draws : int, default: 0
        Tensor grids only: number of cells of the coarse grid.

    Attributes
    ----------
    points : numpy.ndarray
        Node coordinates, shape `(m, 2n + 1)`.
    stratum : numpy.ndarray
        Stratum index of each node, shape `(m,)`.
    volumes : numpy.ndarray
        Volume of each stratum's sampling box.
    draws : numpy.ndarray
        Number of draws (or cells) of each stratum.
    method : QuadMethod
        Method that produced the nodes.
    coarse : numpy.ndarray | None
        Tensor grids only: mask of the nested coarse grid.
    coarse_draws : int
        Tensor grids only: number of cells of the coarse grid.
    weights : numpy.ndarray
        Quadrature weight of each node.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    points: np.ndarray
    stratum: np.ndarray
    volumes: np.ndarray
    draws: np.ndarray
    method: QuadMethod
    coarse: np.ndarray | None = None
    coarse_draws: int = 0

    @property
    def weights(self) -> np.ndarray:
        return (self.volumes / self.draws)[self.stratum]
