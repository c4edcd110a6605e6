"""
Harness pipelines: property suites, oracle calibration, and the scenario
pipelines behind the `norms`, `constants` and `inequality` subcommands.
"""
import logging
from math import inf, isfinite, isnan, log, pi, sqrt

import numpy as np

from .._parallel import parallel_map
from ..data_structures import Annulus, Ball, CheckResult
from ..errors import HypothesisError
from ..function_spaces import (
    HerzParams,
    TestFunction,
    ball_average,
    cbmo_norm,
    herz_norm,
)
from ..graded_matrix import (
    GradedMatrix,
    MatrixField,
    det_inv_bounds_check,
    g_function,
    sampled_heis_norm,
    weighted_point_bound_check,
)
from ..hausdorff import (
    Kernel,
    TheoremKind,
    TheoremParams,
    check_hypotheses,
    commutator_values,
    hausdorff_values,
    k_constant,
    radial_oracle,
    radial_reducible,
    theta_weight,
)
from ..heisenberg import (
    dilate,
    group_constants,
    group_inv,
    group_mul,
    hdist,
    hnorm,
    random_points,
    unit_ball_volume_mc,
)
from ..quadrature import DEFAULT_BUDGET, QuadSpec
from ..weights import (
    Weight,
    ap_ratio,
    power_ball_measure,
    rh_ratio,
    sandwich_check,
    weighted_avg_bound_check,
    weighted_measure,
)
from .report import Report, compare_baseline, inequality_ratio
from .scenario import Scenario

__all__ = (
    "AXIOM_TOLERANCE",
    "INVARIANCE_TOLERANCE",
    "ORACLE_RTOL",
    "run_axioms",
    "run_calibration",
    "run_norms",
    "run_constants",
    "run_inequality",
    "run_batch",
)

logger = logging.getLogger(__name__)

AXIOM_TOLERANCE = 1e-12
INVARIANCE_TOLERANCE = 1e-10
ORACLE_RTOL = 0.01
OMEGA_SAMPLES = 1_000_000
RANDOM_MATRICES = 50
NORM_SAMPLES = 100_000


def _residual_check(name: str, residual: float, tolerance: float=AXIOM_TOLERANCE, detail: str="") -> CheckResult:
    residual = float(residual)
    return CheckResult(name, residual <= tolerance, residual, tolerance, detail)

def _oracle_check(name: str, computed: float, expected: float, rtol: float=ORACLE_RTOL) -> CheckResult:
    if expected == 0:
        residual = abs(computed)
    else:
        residual = abs(computed - expected) / abs(expected)
    return CheckResult(name, residual <= rtol, float(residual), rtol, f"{computed:.8g} vs {expected:.8g}")

def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))

def _random_graded_matrix(n: int, rng: np.random.Generator) -> GradedMatrix:
    B = rng.standard_normal((2 * n, 2 * n)) + 2.0 * np.eye(2 * n)
    a = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 5.0)
    return GradedMatrix(B, a)

def _group_checks(n: int, samples: int, rng: np.random.Generator) -> list[CheckResult]:
    x, y, z = (random_points(n, samples, rng, scale=2.0) for _ in range(3))
    r = rng.uniform(0.1, 10.0, samples)
    zero = np.zeros_like(x)

    associativity = _relative(group_mul(group_mul(x, y), z), group_mul(x, group_mul(y, z)))
    identity = max(_relative(group_mul(x, zero), x), _relative(group_mul(zero, x), x))
    inverse = max(_relative(group_mul(x, group_inv(x)), zero), _relative(group_mul(group_inv(x), x), zero))
    automorphism = _relative(dilate(r, group_mul(x, y)), group_mul(dilate(r, x), dilate(r, y)))
    homogeneity = _relative(hnorm(dilate(r, x)), r * hnorm(x))
    invariance = _relative(hdist(group_mul(z, x), group_mul(z, y)), hdist(x, y))
    symmetry = _relative(hnorm(group_inv(x)), hnorm(x))
    triangle = float(np.max(np.maximum(hnorm(group_mul(x, y)) - hnorm(x) - hnorm(y), 0.0)))

    return [
        _residual_check("associativity", associativity),
        _residual_check("identity", identity),
        _residual_check("inverse", inverse),
        _residual_check("dilation_automorphism", automorphism),
        _residual_check("norm_homogeneity", homogeneity),
        _residual_check("norm_symmetry", symmetry),
        _residual_check("left_invariance", invariance),
        _residual_check("triangle_inequality", triangle),
    ]

def _matrix_checks(n: int, rng: np.random.Generator, seed: int) -> list[CheckResult]:
    matrices = [_random_graded_matrix(n, rng) for _ in range(RANDOM_MATRICES)]

    def norm_gap(item):
        i, M = item
        closed = M.heis_norm()
        sampled = sampled_heis_norm(M, samples=NORM_SAMPLES, seed=seed + i)
        return (closed - sampled) / closed

    gaps = parallel_map(norm_gap, enumerate(matrices))
    worst_gap = max(gaps)
    overshoot = -min(gaps)

    det_failures = sum(not det_inv_bounds_check(M).holds for M in matrices)
    submultiplicative = max(0.0, max(1.0 - M.heis_norm() * M.inverse().heis_norm() for M in matrices))

    multiplicativity = 0.0
    for _ in range(1000):
        M = matrices[int(rng.integers(len(matrices)))]
        beta = rng.uniform(-5.0, 5.0)
        p, q = rng.uniform(1.0, 10.0, 2)
        lhs = g_function(M, beta * (1 / q + 1 / p))
        rhs = g_function(M, beta / q) * g_function(M, beta / p)
        multiplicativity = max(multiplicativity, abs(lhs - rhs) / rhs)

    points = random_points(n, 10_000, rng, scale=3.0)
    point_failures = 0
    for M in matrices[:10]:
        for beta in (-0.5 * n, 1.0, 2.0):
            point_failures += not weighted_point_bound_check(M, beta, points).holds

    return [
        CheckResult("heis_norm_sampled_gap", worst_gap <= 1e-3, worst_gap, 1e-3, f"{RANDOM_MATRICES} matrices"),
        _residual_check("heis_norm_upper_bound", overshoot, 1e-12),
        CheckResult("det_inverse_bounds", det_failures == 0, float(det_failures), 0.0),
        _residual_check("norm_times_inverse_norm", submultiplicative),
        _residual_check("g_multiplicativity", multiplicativity),
        CheckResult("weighted_point_bound", point_failures == 0, float(point_failures), 0.0),
    ]

def run_axioms(n: int=1, samples: int=10_000, seed: int=0) -> Report:
    """
    Group axioms, norm properties and graded-matrix properties on random
    instances.

    Returns
    -------
    Report
        One check per property with its worst residual. The same seed gives
        the same report.
    """
    if n < 1:
        raise ValueError(f"dimension parameter must be positive ({n=})")

    rng = np.random.default_rng(seed)
    dims = group_constants(n)
    checks = [CheckResult("homogeneous_dimension", dims.Q == 2 * n + 2, float(dims.Q), 0.0, f"Q={dims.Q}")]
    checks += _group_checks(n, samples, rng)
    checks += _matrix_checks(n, rng, seed)

    logger.info("axioms n=%d: %d of %d checks passed", n, sum(c.passed for c in checks), len(checks))
    return Report(
        name=f"axioms_n{n}",
        checks=tuple(checks),
        quantities={"Q": float(dims.Q), "omega_Q": dims.omega_Q, "w_Q": dims.w_Q},
        diagnostics={"n": n, "samples": samples, "seed": seed},
    )

def _calibration_checks(spec: QuadSpec) -> list[CheckResult]:
    n = 1
    dims = group_constants(n)
    Omega = pi**2 / 2
    origin = (0.0, 0.0, 0.0)
    unit = Weight.unit(n)
    shell = Kernel.char_shell(1.0, 2.0)
    field = MatrixField.inverse_dilation(n)

    checks = [_oracle_check("omega_Q_reduction", dims.omega_Q, Omega, 1e-10)]

    mc, _ = unit_ball_volume_mc(n, OMEGA_SAMPLES, spec.seed)
    checks.append(_oracle_check("omega_Q_monte_carlo", mc, Omega, 0.005))

    unit_ball = weighted_measure(unit, Annulus.ball(0), spec).value
    checks.append(_oracle_check("unit_ball_quadrature", unit_ball, Omega))

    for beta in (-2.0, 0.0, 2.0):
        for k in range(-2, 3):
            closed = power_ball_measure(beta, k, dims)
            numeric = weighted_measure(Weight.power(beta, n), Annulus.ball(k), spec).value
            checks.append(_oracle_check(f"power_ball_measure[beta={beta:g},k={k}]", numeric, closed))

    M = GradedMatrix(np.diag([2.0, 3.0]), 16.0)
    checks.append(_oracle_check("heis_norm_closed_form", M.heis_norm(), 4.0, 1e-12))
    sampled = sampled_heis_norm(M, samples=NORM_SAMPLES, seed=spec.seed)
    checks.append(CheckResult("heis_norm_sampled", 4.0 * (1 - 1e-3) <= sampled <= 4.0, sampled, 1e-3))
    bounds = det_inv_bounds_check(M, dims)
    checks.append(CheckResult("det_inverse_bounds", bounds.holds, bounds.mid, 0.0, f"{bounds.lhs:.6g} <= {bounds.mid:.6g} <= {bounds.rhs:.6g}"))

    ball = Ball(origin, 1.0)
    checks.append(_oracle_check("a1_ratio_power", ap_ratio(Weight.power(-2.0, n), 1.0, ball, spec), 2.0, 0.02))
    checks.append(_oracle_check("rh_ratio_power", rh_ratio(Weight.power(-2.0, n), 1.5, ball, spec), 4 ** (2 / 3) / 2, 0.02))
    avg_bound = weighted_avg_bound_check(unit, 2.0, hnorm, ball, spec)
    checks.append(_oracle_check("weighted_average_constant", avg_bound.constant, 0.8 / sqrt(2 / 3)))

    pairs = [(Annulus.ball(-1), ball), (Annulus.shell(0), ball)]
    for beta, p, r in ((-2.0, 1.0, 1.5), (2.0, 2.0, 2.0)):
        inner = 2.0 ** -(4 + beta)
        ratios = ((inner, 1 / 16), (1 - inner, 15 / 16))
        sandwich = sandwich_check(Weight.power(beta, n), p, r, pairs, spec)
        checks.append(CheckResult(f"sandwich_holds[beta={beta:g}]", sandwich.holds, 0.0, 0.0, f"C1={sandwich.c1:.4g} C2={sandwich.c2:.4g}"))
        checks.append(_oracle_check(f"sandwich_c1[beta={beta:g}]", sandwich.c1, min(wr / lr**p for wr, lr in ratios), 0.03))
        checks.append(_oracle_check(f"sandwich_c2[beta={beta:g}]", sandwich.c2, max(wr / lr ** ((r - 1) / r) for wr, lr in ratios), 0.03))

    checks.append(_oracle_check("ball_average_log", ball_average(TestFunction.log_norm(), 1, spec, n=n), log(2.0) - 0.25))
    checks.append(_oracle_check("cbmo_log", cbmo_norm(TestFunction.log_norm(), 2.0, unit, spec=spec).value, 0.25))

    herz = herz_norm(TestFunction.char_ball(0), HerzParams(1.0, 2.0, 2.0, unit), spec).value
    checks.append(_oracle_check("herz_char_ball", herz, sqrt(Omega**1.5 * (15 / 16) * (64 / 63))))

    xs = np.array([[1.0, 0.0, 0.0], [0.5, -0.3, 0.2], [0.0, 0.0, 2.0]])
    radii = hnorm(xs)
    eigen = hausdorff_values(TestFunction.power(2.0), shell, field, xs, spec)
    commutator = commutator_values(TestFunction.log_norm(), TestFunction.power(2.0), shell, field, xs, spec)
    for i, (x_norm, t, c) in enumerate(zip(radii, eigen, commutator)):
        checks.append(_oracle_check(f"hausdorff_eigenvalue[{i}]", t.value, 3 * pi**2 / x_norm**2))
        checks.append(_oracle_check(f"commutator_closed_form[{i}]", c.value, 2 * pi**2 * (2 * log(2) - 0.75) / x_norm**2))

    k1_params = TheoremParams(TheoremKind.THM1_CASE_I, 2.0, 4.0, 2.0, 1.25, -1.0, -2.2, unit)
    k2_params = TheoremParams(TheoremKind.THM1_CASE_II, 2.0, 4.0, 8.0, 2.0, -1.0, -2.5, unit, delta=2.0)
    k3_params = TheoremParams(TheoremKind.THM2, 2.0, 4.0, 2.0, 4 / 3, 0.0, -1.0, unit)
    cases = (
        ("k1", shell, k1_params, 4 * pi**2 * (3 * log(2) - 1)),
        ("k2", Kernel.char_shell(0.25, 0.5), k2_params, 4 * pi**2 * (4 * sqrt(2) * (1 - log(2)) - 8 + 12 * log(2))),
        ("k3", shell, k3_params, 4 * pi**2 * (3.5 * log(2) - 0.75)),
    )
    for name, kernel, tp, expected in cases:
        checks.append(_oracle_check(f"{name}_quadrature", k_constant(kernel, field, tp, spec).value, expected))
        checks.append(_oracle_check(f"{name}_radial", radial_oracle(kernel, field, tp).value, expected, 1e-6))

    theta_params = TheoremParams(TheoremKind.THM2, 2.0, 2.0, 2.0, 1.0, 0.0, 0.0, unit)
    theta = theta_weight(np.array([2.0, 0.0, 0.0]), shell, field, theta_params)
    checks.append(_oracle_check("theta_hand_value", theta, log(2.0), 1e-12))

    return checks

def run_calibration(budget: int=DEFAULT_BUDGET, seed: int=0) -> Report:
    """
    Compare every closed-form oracle with its numerical counterpart on `H^1`.

    Returns
    -------
    Report
        One check per oracle; `residual` is the relative deviation.
    """
    spec = QuadSpec(budget=budget, seed=seed)
    checks = _calibration_checks(spec)

    failed = [check.name for check in checks if not check.passed]
    if failed:
        logger.warning("calibration failures: %s", ", ".join(failed))
    logger.info("calibration: %d of %d oracles matched", len(checks) - len(failed), len(checks))

    return Report(
        name="calibration",
        checks=tuple(checks),
        diagnostics={"budget": budget, "seed": seed},
    )

def _require_hypotheses(scenario: Scenario):
    report = check_hypotheses(scenario.theorem)
    if not report.ok:
        raise HypothesisError(report.violations)
    return report

def _herz_params(scenario: Scenario, alpha: float, q: float) -> HerzParams:
    tp = scenario.theorem
    return HerzParams(alpha, tp.p, q, tp.weight, *scenario.herz_window)

def _norm_quantities(scenario: Scenario, b=None, f=None) -> tuple[dict, dict, bool]:
    tp = scenario.theorem
    b = scenario.symbol_b if b is None else b
    f = scenario.f if f is None else f

    cbmo = cbmo_norm(b, tp.q, tp.weight, scenario.cbmo_grid, scenario.quad)
    logger.info("CBMO norm of b: %.6g +- %.2g (attained at radius %g)", cbmo.value, cbmo.err_est, cbmo.argmax_radius)
    herz = herz_norm(f, _herz_params(scenario, tp.alpha1, tp.q1), scenario.quad)
    logger.info("Herz norm of f: %.6g +- %.2g", herz.value, herz.err_est)

    quantities = {"b_cbmo": cbmo.value, "f_herz": herz.value}
    diagnostics = {
        "b_cbmo_argmax_radius": cbmo.argmax_radius,
        "b_cbmo_err_est": cbmo.err_est,
        "f_herz_err_est": herz.err_est,
        "f_herz_edges": [herz.edge_lo, herz.edge_hi],
    }
    return quantities, diagnostics, herz.flagged

def _constant_quantities(scenario: Scenario) -> tuple[dict, dict, bool]:
    Phi, A, tp = scenario.kernel, scenario.matrix_field, scenario.theorem
    integrability = Phi.integrability(group_constants(scenario.n))
    K = k_constant(Phi, A, tp, scenario.quad)
    logger.info("K constant: %.6g +- %.2g", K.value, K.err_est)

    diagnostics = {
        "k_err_est": K.err_est,
        "k_tail_est": K.tail_est,
        "k_n_evals": K.n_evals,
        "kernel_integrability": integrability.value,
    }
    return {"k_constant": K.value}, diagnostics, K.flagged

def run_norms(scenario: Scenario) -> Report:
    """
    Herz norm of `f` and CBMO norm of `b` for a scenario.
    """
    quantities, diagnostics, flagged = _norm_quantities(scenario)
    checks = (
        CheckResult("f_herz_finite", isfinite(quantities["f_herz"]), quantities["f_herz"], inf),
        CheckResult("b_cbmo_finite", isfinite(quantities["b_cbmo"]), quantities["b_cbmo"], inf),
    )
    return Report(
        name=scenario.name,
        checks=checks,
        quantities=quantities,
        diagnostics=diagnostics,
        status="flagged" if flagged else "ok",
        digest=scenario.digest(),
    )

def run_constants(scenario: Scenario) -> Report:
    """
    The bound constant of a scenario, cross-checked by the radial reduction
    when it applies.

    Raises
    ------
    HypothesisError
        If the scenario violates its estimate's hypotheses.
    """
    hypotheses = _require_hypotheses(scenario)
    quantities, diagnostics, flagged = _constant_quantities(scenario)
    diagnostics["case"] = hypotheses.case
    checks = [CheckResult("k_finite", isfinite(quantities["k_constant"]), quantities["k_constant"], inf)]

    Phi, A, tp = scenario.kernel, scenario.matrix_field, scenario.theorem
    if radial_reducible(Phi, A):
        oracle = radial_oracle(Phi, A, tp).value
        quantities["k_radial"] = oracle
        checks.append(_oracle_check("k_vs_radial", quantities["k_constant"], oracle))

    return Report(
        name=scenario.name,
        checks=tuple(checks),
        quantities=quantities,
        diagnostics=diagnostics,
        status="flagged" if flagged else "ok",
        digest=scenario.digest(),
    )

def _commutator_function(scenario: Scenario, b, f, inner: QuadSpec):
    Phi, A = scenario.kernel, scenario.matrix_field

    def Tb_f(points):
        values = commutator_values(b, f, Phi, A, points, inner)
        return np.array([value.value for value in values])

    return Tb_f

def _lhs(scenario: Scenario, b, f):
    tp = scenario.theorem
    outer, inner = scenario.nested_budgets()
    outer_spec = scenario.quad._replace(budget=outer)
    inner_spec = scenario.quad._replace(budget=inner)
    logger.debug("nested quadrature: %d outer nodes x %d inner evaluations", outer, inner)

    return herz_norm(
        _commutator_function(scenario, b, f, inner_spec),
        _herz_params(scenario, tp.alpha2, tp.q2),
        outer_spec,
    )

def _ratio(scenario: Scenario, K: float, b, f) -> float:
    quantities, _, _ = _norm_quantities(scenario, b, f)
    lhs = _lhs(scenario, b, f).value
    return inequality_ratio(lhs, K, quantities["b_cbmo"], quantities["f_herz"])[1]

def _drift(a: float, b: float) -> float:
    if isnan(a) and isnan(b):
        return 0.0
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))

def run_inequality(
    scenario: Scenario,
    baselines: dict[str, dict] | None=None,
    invariance: bool=False,
    scale: float=3.0,
    shift: float=5.0,
) -> Report:
    """
    Both sides of `||T^b f|| <= K ||b|| ||f||` for a scenario.

    Parameters
    ----------
    scenario : Scenario
        The scenario.
    baselines : dict[str, dict] | None, default: None
        Pinned ratios; the ratio is compared with (or pinned into) this table.
    invariance : bool, default: False
        Also recompute the ratio for `scale * f` and `b + shift`.
    scale : float, default: 3.0
        Factor of the homogeneity check.
    shift : float, default: 5.0
        Constant of the symbol-shift check.

    Returns
    -------
    Report
        `lhs`, `k_constant`, `b_cbmo`, `f_herz`, `rhs` and `ratio` with their
        diagnostics. A vanishing constant or `||f||` makes the report
        "degenerate".

    Raises
    ------
    HypothesisError
        Before any integration, if the hypotheses fail.
    """
    hypotheses = _require_hypotheses(scenario)
    logger.info("hypotheses hold for %r (case %s)", scenario.name, hypotheses.case)

    k_quantities, k_diagnostics, k_flagged = _constant_quantities(scenario)
    quantities, diagnostics, f_flagged = _norm_quantities(scenario)
    quantities |= k_quantities
    diagnostics |= k_diagnostics

    lhs = _lhs(scenario, scenario.symbol_b, scenario.f)
    logger.info("Herz norm of T^b f: %.6g +- %.2g", lhs.value, lhs.err_est)

    rhs, ratio, status = inequality_ratio(lhs.value, quantities["k_constant"], quantities["b_cbmo"], quantities["f_herz"])
    quantities |= {"lhs": lhs.value, "rhs": rhs, "ratio": ratio}

    outer, inner = scenario.nested_budgets()
    diagnostics |= {
        "case": hypotheses.case,
        "lhs_err_est": lhs.err_est,
        "lhs_edges": [lhs.edge_lo, lhs.edge_hi],
        "outer_nodes": outer,
        "inner_budget": inner,
        "herz_window": list(scenario.herz_window),
        "cbmo_grid": list(scenario.cbmo_grid),
    }

    if status == "degenerate":
        logger.warning("degenerate report for %r: K=%g, ||f||=%g", scenario.name, quantities["k_constant"], quantities["f_herz"])
    elif k_flagged or f_flagged or lhs.flagged:
        status = "flagged"

    checks = [
        CheckResult("hypotheses", True, 0.0, 0.0, f"case {hypotheses.case}"),
        CheckResult("ratio_finite", status == "degenerate" or isfinite(ratio), ratio, inf, status),
    ]

    if invariance and status != "degenerate":
        K = quantities["k_constant"]
        scaled = _ratio(scenario, K, scenario.symbol_b, scenario.f.scaled(scale))
        shifted = _ratio(scenario, K, scenario.symbol_b.plus(shift), scenario.f)
        checks.append(_residual_check("homogeneity_in_f", _drift(ratio, scaled), INVARIANCE_TOLERANCE, f"f -> {scale:g} f"))
        checks.append(_residual_check("shift_invariance_in_b", _drift(ratio, shifted), INVARIANCE_TOLERANCE, f"b -> b + {shift:g}"))

    report = Report(
        name=scenario.name,
        checks=tuple(checks),
        quantities=quantities,
        diagnostics=diagnostics,
        status=status,
        digest=scenario.digest(),
    )

    if baselines is not None:
        report = report._replace(checks=report.checks + (compare_baseline(report, baselines),))

    return report

def run_batch(scenarios: list[Scenario], baselines: dict[str, dict] | None=None, invariance: bool=False) -> list[Report]:
    """
    :func:`run_inequality` over many scenarios, concurrently.

    Scenarios violating their hypotheses yield a failed report instead of
    stopping the batch.
    """
    def one(scenario):
        try:
            return run_inequality(scenario, None, invariance)
        except HypothesisError as e:
            checks = tuple(CheckResult("hypotheses", False, 1.0, 0.0, violation) for violation in e.violations)
            return Report(name=scenario.name, checks=checks, status="rejected", digest=scenario.digest())

    reports = parallel_map(one, scenarios)

    if baselines is not None:
        reports = [
            report if report.quantities is None else report._replace(checks=report.checks + (compare_baseline(report, baselines),))
            for report in reports
        ]

    return reports
