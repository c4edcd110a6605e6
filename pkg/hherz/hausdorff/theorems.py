"""
Hypotheses and bound constants of the commutator estimates on weighted Herz
spaces.

The first estimate (CBMO symbol, `A_1` weight, `alpha1 < 0`) has two cases
split by the sign of `1/q1 + alpha1/Q`, with constants `K1` and `K2`. The
second (power weight `|x|_h**beta`, `beta > -n`) has the constant `K3`,
the integral of the weight function `Theta`.
"""
import logging
from enum import Enum
from math import inf, isfinite
from typing import NamedTuple

import numpy as np

from ..data_structures import QuadResult
from ..errors import HypothesisError
from ..graded_matrix import MatrixField
from ..heisenberg import group_constants, hnorm
from ..quadrature import QuadMethod, QuadSpec
from ..weights import Weight, WeightIndices, WeightKind, power_weight_indices
from .kernels import Kernel
from .operators import _integrate, radial_reducible

__all__ = (
    "SLACK",
    "TheoremKind",
    "TheoremParams",
    "HypothesisReport",
    "default_delta",
    "weight_indices",
    "check_hypotheses",
    "k1_constant",
    "k2_constant",
    "theta_weight",
    "theta_values",
    "k3_constant",
    "k_constant",
    "radial_oracle",
)

logger = logging.getLogger(__name__)

SLACK = 1e-12


class TheoremKind(str, Enum):
    """
    Which estimate a scenario exercises.

    :class:`TheoremKind` is one of "thm1_case_i", "thm1_case_ii", "thm2".
    """
    THM1_CASE_I = "thm1_case_i"
    THM1_CASE_II = "thm1_case_ii"
    THM2 = "thm2"


def default_delta(r_w: float) -> float:
    """
    `min(2, (1 + r_w) / 2)`, inside `(1, r_w)` for every `r_w > 1`.
    """
    return min(2.0, (1.0 + r_w) / 2.0)


class TheoremParams(NamedTuple):
    """
    Exponents of an estimate.

    Parameters
    ----------
    which : TheoremKind
        The estimate, and for the first one its case.
    p : float
        Outer Herz exponent.
    q : float
        CBMO exponent.
    q1 : float
        Inner Herz exponent of `f`.
    q2 : float
        Inner Herz exponent of `T^b f`.
    alpha1 : float
        Herz weight power of `f`.
    alpha2 : float
        Herz weight power of `T^b f`.
    weight : Weight
        The weight.
    delta : float | None, default: None
        Tuning exponent `1 < delta < r_w` of the first estimate; `None`
        selects :func:`default_delta`.

    Attributes
    ----------
    which : TheoremKind
        The estimate.
    p : float
        Outer Herz exponent.
    q : float
        CBMO exponent.
    q1 : float
        Inner Herz exponent of `f`.
    q2 : float
        Inner Herz exponent of `T^b f`.
    alpha1 : float
        Herz weight power of `f`.
    alpha2 : float
        Herz weight power of `T^b f`.
    weight : Weight
        The weight.
    delta : float | None
        Tuning exponent of the first estimate.
    s : float
        `1 / (1/q + 1/q1)`.
    Q : int
        Homogeneous dimension.

    Methods
    -------
    resolved_delta:
        `delta`, or its default for the weight.
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    which: TheoremKind
    p: float
    q: float
    q1: float
    q2: float
    alpha1: float
    alpha2: float
    weight: Weight
    delta: float | None = None

    @property
    def s(self) -> float:
        return 1.0 / (1.0 / self.q + 1.0 / self.q1)

    @property
    def Q(self) -> int:
        return group_constants(self.weight.n).Q

    def resolved_delta(self) -> float:
        if self.delta is not None:
            return self.delta
        return default_delta(weight_indices(self.weight).r_w)


class HypothesisReport(NamedTuple):
    """
    Outcome of a hypothesis check.

    Parameters
    ----------
    ok : bool
        Whether every hypothesis holds.
    case : str
        "i" or "ii" for the first estimate, "thm2" for the second.
    violations : list[str]
        Violated hypotheses.

    Attributes
    ----------
    ok : bool
        Whether every hypothesis holds.
    case : str
        "i" or "ii" for the first estimate, "thm2" for the second.
    violations : list[str]
        Violated hypotheses.

    Methods
    -------
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    ok: bool
    case: str
    violations: list[str]


def weight_indices(w: Weight) -> WeightIndices:
    """
    Critical indices of a unit or power weight.
    """
    if w.exponent is None:
        raise ValueError("critical indices of custom weights are unknown")
    return power_weight_indices(w.exponent, w.n)

def _finite_at_least_one(tp: TheoremParams, names: tuple[str, ...]) -> list[str]:
    return [
        f"{name} must be finite and >= 1 (got {getattr(tp, name)})"
        for name in names
        if not (isfinite(getattr(tp, name)) and getattr(tp, name) >= 1)
    ]

def _thm1_violations(tp: TheoremParams, indices: WeightIndices | None) -> tuple[str, list[str]]:
    Q = tp.Q
    violations = _finite_at_least_one(tp, ("p", "q", "q1", "q2"))
    if violations:
        return "i", violations

    if tp.q <= 1:
        violations.append("q>1 required (CBMO)")

    balance = tp.alpha1 / Q + 1 / tp.q1 - tp.alpha2 / Q - 1 / tp.q2
    if abs(balance) > SLACK:
        violations.append(f"alpha1/Q + 1/q1 = alpha2/Q + 1/q2 required (off by {balance:.3g})")

    if not tp.alpha1 < 0:
        violations.append(f"alpha1<0 required (got {tp.alpha1})")

    if indices is None:
        violations.append("weight indices unknown (custom weight)")
    else:
        if indices.q_w != 1:
            violations.append(f"weight must be in A_1 (q_w = {indices.q_w:.6g})")

        r_w = indices.r_w
        s_bound = tp.q2 if r_w == inf else tp.q2 * r_w / (r_w - 1)
        if not tp.s > s_bound:
            violations.append(f"s > q2 r_w/(r_w - 1) required (s = {tp.s:.6g}, bound {s_bound:.6g})")

        delta = tp.delta if tp.delta is not None else default_delta(r_w)
        if not 1 < delta < r_w:
            violations.append(f"1<delta<r_w required (delta = {delta:.6g}, r_w = {r_w:.6g})")

    case = "i" if 1 / tp.q1 + tp.alpha1 / Q >= 0 else "ii"
    declared = {TheoremKind.THM1_CASE_I: "i", TheoremKind.THM1_CASE_II: "ii"}[TheoremKind(tp.which)]
    if case != declared:
        violations.append(f"declared case {declared} but 1/q1 + alpha1/Q selects case {case}")

    return case, violations

def _thm2_violations(tp: TheoremParams) -> list[str]:
    Q = tp.Q
    violations = [
        f"1<{name}<inf required (got {getattr(tp, name)})"
        for name in ("q", "q1", "q2")
        if not 1 < getattr(tp, name) < inf
    ]
    violations.extend(_finite_at_least_one(tp, ("p",)))
    if violations:
        return violations

    if abs(1 / tp.q2 - 1 / tp.q - 1 / tp.q1) > SLACK:
        violations.append("1/q2 = 1/q + 1/q1 required")
    if abs(1 / tp.q + tp.alpha2 / Q - tp.alpha1 / Q) > SLACK:
        violations.append("1/q + alpha2/Q = alpha1/Q required")

    beta = tp.weight.exponent
    if tp.weight.kind is WeightKind.CUSTOM:
        violations.append("power weight |x|_h**beta required")
    elif not beta > -tp.weight.n:
        violations.append(f"beta>-n required (got {beta})")

    return violations

def check_hypotheses(tp: TheoremParams, indices: WeightIndices | None=None) -> HypothesisReport:
    """
    Check every index relation of the selected estimate.

    Parameters
    ----------
    tp : TheoremParams
        Exponents and weight.
    indices : WeightIndices | None, default: None
        Critical indices of the weight; computed for unit and power weights
        when omitted.

    Returns
    -------
    HypothesisReport
        Identities hold up to `SLACK`; violations are itemized.
    """
    which = TheoremKind(tp.which)

    if which is TheoremKind.THM2:
        violations = _thm2_violations(tp)
        case = "thm2"
    else:
        if indices is None and tp.weight.exponent is not None:
            indices = weight_indices(tp.weight)
        case, violations = _thm1_violations(tp, indices)

    for violation in violations:
        logger.info("hypothesis violated: %s", violation)

    return HypothesisReport(not violations, case, violations)

def _require(tp: TheoremParams, which: TheoremKind, label: str):
    report = check_hypotheses(tp)
    violations = list(report.violations)
    if TheoremKind(tp.which) is not which:
        violations.append(f"{label} needs {which.value} parameters (got {TheoremKind(tp.which).value})")
    if violations:
        raise HypothesisError(violations)

def _log_split(norms: np.ndarray) -> np.ndarray:
    """
    `log(2 / ||A||)` where `||A|| < 1`, else `log(2 ||A||)`; both are `log 2` at 1.
    """
    return np.where(norms < 1, np.log(2.0 / norms), np.log(2.0 * norms))

def _thm1_integrand(Phi: Kernel, A: MatrixField, tp: TheoremParams, small_region_decays: bool):
    Q = tp.Q
    delta = tp.resolved_delta()
    mixed = Q / tp.q1 - (tp.alpha1 + Q / tp.q1) * (delta - 1) / delta

    def integrand(y):
        norms = A.norms(y)
        dets = A.inverse_dets(y)
        common = (
            (1.0 + dets ** (1 / tp.q) * norms ** (Q / tp.q))
            * dets ** (1 / tp.q1)
            * np.abs(Phi(y)) / hnorm(y) ** Q
        )
        small = norms < 1
        plain = norms ** -tp.alpha1
        tuned = norms**mixed
        power = np.where(small, plain, tuned) if small_region_decays else np.where(small, tuned, plain)
        return common * power * _log_split(norms)

    return integrand

def k1_constant(Phi: Kernel, A: MatrixField, tp: TheoremParams, spec: QuadSpec) -> QuadResult:
    """
    `K1`, case i: `||A(y)|| < 1` carries `||A||**-alpha1 log(2/||A||)` and
    `||A(y)|| >= 1` carries `||A||**(Q/q1 - (alpha1 + Q/q1)(delta - 1)/delta) log(2||A||)`,
    both against `(1 + |det A^-1|**(1/q) ||A||**(Q/q)) |det A^-1|**(1/q1) |Phi(y)| / |y|_h**Q`.

    Raises
    ------
    HypothesisError
        Before any integration, if the case i hypotheses fail.
    """
    _require(tp, TheoremKind.THM1_CASE_I, "K1")
    return _integrate(_thm1_integrand(Phi, A, tp, small_region_decays=True), Phi, A, spec, radial_tail=True)

def k2_constant(Phi: Kernel, A: MatrixField, tp: TheoremParams, spec: QuadSpec) -> QuadResult:
    """
    `K2`, case ii: the regions of `K1` with their exponents swapped.

    Raises
    ------
    HypothesisError
        Before any integration, if the case ii hypotheses fail.
    """
    _require(tp, TheoremKind.THM1_CASE_II, "K2")
    return _integrate(_thm1_integrand(Phi, A, tp, small_region_decays=False), Phi, A, spec, radial_tail=True)

def _beta(tp: TheoremParams) -> float:
    beta = tp.weight.exponent
    if beta is None:
        raise ValueError("Theta needs a unit or power weight")
    return beta

def theta_values(y, Phi: Kernel, A: MatrixField, tp: TheoremParams) -> np.ndarray:
    """
    `Theta` at many nodes.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    Q = tp.Q
    beta = _beta(tp)

    norms = A.norms(y)
    dets = A.inverse_dets(y)
    return (
        np.abs(Phi(y)) / hnorm(y) ** Q
        * dets ** (1 / tp.q1)
        * _log_split(norms)
        * A.g_values(y, beta / tp.q1)
        * (1.0 + dets ** (1 / tp.q) * A.g_values(y, beta / tp.q) * norms ** ((Q + beta) / tp.q))
    )

def theta_weight(y, Phi: Kernel, A: MatrixField, tp: TheoremParams) -> float:
    """
    `Theta(y) = |Phi(y)| / |y|_h**Q |det A^-1(y)|**(1/q1) L(y) G(A^-1(y), beta/q1)
    (1 + |det A^-1(y)|**(1/q) G(A^-1(y), beta/q) ||A(y)||**((Q + beta)/q))`

    with `L(y) = log(2/||A(y)||)` if `||A(y)|| < 1`, else `log(2 ||A(y)||)`.
    """
    return float(theta_values(y, Phi, A, tp)[0])

def k3_constant(Phi: Kernel, A: MatrixField, tp: TheoremParams, spec: QuadSpec) -> QuadResult:
    """
    `K3 = int Theta(y) (1 + log2(||A^-1(y)|| ||A(y)||)) dy` if `alpha1 = 0`,
    else `int Theta(y) G(A^-1(y), alpha1 (Q + beta) / Q) dy`.

    Raises
    ------
    HypothesisError
        Before any integration, if the hypotheses fail.
    """
    _require(tp, TheoremKind.THM2, "K3")
    Q = tp.Q
    beta = _beta(tp)

    def integrand(y):
        theta = theta_values(y, Phi, A, tp)
        if tp.alpha1 == 0:
            return theta * (1.0 + np.log2(A.inverse_norms(y) * A.norms(y)))
        return theta * A.g_values(y, tp.alpha1 * (Q + beta) / Q)

    return _integrate(integrand, Phi, A, spec, radial_tail=True)

_CONSTANTS = {
    TheoremKind.THM1_CASE_I: k1_constant,
    TheoremKind.THM1_CASE_II: k2_constant,
    TheoremKind.THM2: k3_constant,
}

def radial_oracle(Phi: Kernel, A: MatrixField, tp: TheoremParams) -> QuadResult:
    """
    The constant of `tp.which` by the 1-d radial reduction, for radial
    kernels and constant or inverse-dilation fields.
    """
    if not radial_reducible(Phi, A):
        raise ValueError("radial oracle needs a radial kernel and a constant or inverse-dilation field")

    constant = _CONSTANTS[TheoremKind(tp.which)]
    return constant(Phi, A, tp, QuadSpec(method=QuadMethod.RADIAL_1D))

def k_constant(Phi: Kernel, A: MatrixField, tp: TheoremParams, spec: QuadSpec) -> QuadResult:
    """
    The constant of `tp.which`.
    """
    return _CONSTANTS[TheoremKind(tp.which)](Phi, A, tp, spec)
