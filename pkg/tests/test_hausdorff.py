import unittest
from math import log, pi, sqrt

import numpy as np
from numpy.testing import assert_allclose

from hherz.data_structures import Shell
from hherz.errors import HypothesisError
from hherz.function_spaces import TestFunction
from hherz.graded_matrix import GradedMatrix, MatrixField
from hherz.hausdorff import (
    Kernel,
    KernelKind,
    TheoremKind,
    TheoremParams,
    apply_commutator,
    apply_hausdorff,
    check_hypotheses,
    commutator_values,
    default_delta,
    hausdorff_values,
    k1_constant,
    k3_constant,
    k_constant,
    radial_oracle,
    radial_reducible,
    theta_values,
    theta_weight,
)
from hherz.heisenberg import group_constants, hnorm
from hherz.quadrature import QuadMethod, QuadSpec
from hherz.weights import Weight

DIMS = group_constants(1)
RADIAL = QuadSpec(method=QuadMethod.RADIAL_1D)
SPEC = QuadSpec(budget=100_000, seed=2)
UNIT = Weight.unit(1)
SHELL = Kernel.char_shell(1.0, 2.0)
FIELD = MatrixField.inverse_dilation(1)
X = np.array([1.0, -0.5, 0.75])

K1_PARAMS = TheoremParams(TheoremKind.THM1_CASE_I, 2.0, 4.0, 2.0, 1.25, -1.0, -2.2, UNIT)
K2_PARAMS = TheoremParams(TheoremKind.THM1_CASE_II, 2.0, 4.0, 8.0, 2.0, -1.0, -2.5, UNIT, delta=2.0)
K3_PARAMS = TheoremParams(TheoremKind.THM2, 2.0, 4.0, 2.0, 4 / 3, 0.0, -1.0, UNIT)

K1 = 4 * pi**2 * (3 * log(2) - 1)
K2 = 4 * pi**2 * (4 * sqrt(2) * (1 - log(2)) - 8 + 12 * log(2))
K3 = 4 * pi**2 * (3.5 * log(2) - 0.75)


class TestKernel(unittest.TestCase):
    def test_literals(self):
        self.assertEqual(Kernel.from_literal({"kind": "char_shell", "r1": 1, "r2": 2}), SHELL)
        decay = Kernel.from_literal({"kind": "power_decay", "sigma": 2, "r0": 1, "coef": 3})
        self.assertIs(decay.kind, KernelKind.POWER_DECAY)
        self.assertEqual(decay.coef, 3.0)

        for bad in (
            {"kind": "char_shell", "r1": 2, "r2": 1},
            {"kind": "char_shell", "r1": 1},
            {"kind": "power_decay", "sigma": 0, "r0": 1},
            {"kind": "char_shell", "r1": 1, "r2": 2, "r3": 3},
            {"kind": "custom"},
        ):
            with self.assertRaises(ValueError):
                Kernel.from_literal(bad)

    def test_values(self):
        points = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 4.0], [0.5, 0.0, 0.0], [3.0, 0.0, 0.0]])
        assert_allclose(SHELL(points), [1.0, 1.0, 0.0, 0.0])
        assert_allclose(Kernel.power_decay(2.0, 1.0)(points), [1.0, 0.25, 0.0, 1 / 9])
        self.assertEqual(SHELL.support, Shell(1.0, 2.0))
        self.assertEqual(SHELL.profile(1.5), 1.0)

    def test_integrability(self):
        assert_allclose(SHELL.integrability(DIMS).value, DIMS.w_Q * log(2), rtol=1e-10)
        assert_allclose(Kernel.power_decay(1.0, 1.0).integrability(DIMS).value, DIMS.w_Q, rtol=1e-8)
        custom = Kernel.custom(hnorm, Shell(1.0, 2.0))
        with self.assertRaises(ValueError):
            custom.integrability(DIMS)

    def test_radial_reducibility(self):
        self.assertTrue(radial_reducible(SHELL, FIELD))
        self.assertTrue(radial_reducible(SHELL, MatrixField.constant(GradedMatrix.identity(1))))
        self.assertFalse(radial_reducible(Kernel.custom(hnorm, Shell(1.0, 2.0)), FIELD))
        self.assertFalse(radial_reducible(SHELL, MatrixField.custom(FIELD.at, 1)))


class TestOperators(unittest.TestCase):
    def test_power_function_is_an_eigenfunction(self):
        f = TestFunction.power(2)
        x_norm = float(hnorm(X))
        # w_Q int_1^2 r^-2 r^3 dr
        expected = 3 * pi**2 / x_norm**2
        assert_allclose(apply_hausdorff(f, SHELL, FIELD, X, RADIAL).value, expected, rtol=1e-9)
        assert_allclose(apply_hausdorff(f, SHELL, FIELD, X, SPEC).value, expected, rtol=0.02)

    def test_unbounded_kernel_is_truncated(self):
        f = TestFunction.power(2)
        result = apply_hausdorff(f, Kernel.power_decay(2.0, 1.0), FIELD, X, RADIAL)
        assert_allclose(result.value * float(hnorm(X)) ** 2, DIMS.w_Q, rtol=1e-3)

    def test_commutator_with_log(self):
        f = TestFunction.power(2)
        b = TestFunction.log_norm()
        expected = 2 * pi**2 * (2 * log(2) - 0.75) / float(hnorm(X)) ** 2
        assert_allclose(apply_commutator(b, f, SHELL, FIELD, X, RADIAL).value, expected, rtol=1e-9)
        assert_allclose(apply_commutator(b, f, SHELL, FIELD, X, SPEC).value, expected, rtol=0.03)

    def test_constant_symbol_commutes(self):
        b = TestFunction.constant(5.0)
        result = apply_commutator(b, TestFunction.char_annulus(0, 1), SHELL, FIELD, X, SPEC)
        self.assertEqual(result.value, 0.0)

    def test_linearity(self):
        f, g = TestFunction.power(2), TestFunction.char_annulus(-1, 1)
        both = apply_hausdorff(lambda y: f(y) + 2 * g(y), SHELL, FIELD, X, SPEC).value
        separate = apply_hausdorff(f, SHELL, FIELD, X, SPEC).value + 2 * apply_hausdorff(g, SHELL, FIELD, X, SPEC).value
        assert_allclose(both, separate, rtol=1e-12)

    def test_shared_nodes(self):
        f, b = TestFunction.power(2), TestFunction.log_norm()
        xs = np.array([X, 2 * X])
        values = commutator_values(b, f, SHELL, FIELD, xs, SPEC)
        for x, value in zip(xs, values):
            assert_allclose(value.value, apply_commutator(b, f, SHELL, FIELD, x, SPEC).value, rtol=1e-12)

        radial = hausdorff_values(f, SHELL, FIELD, xs, RADIAL)
        assert_allclose([r.value for r in radial], 3 * pi**2 / hnorm(xs) ** 2, rtol=1e-9)

    def test_rejects_bad_input(self):
        with self.assertRaises(ValueError):
            apply_hausdorff(TestFunction.power(2), SHELL, FIELD, [1.0, 2.0], SPEC)
        with self.assertRaises(ValueError):
            apply_hausdorff(TestFunction.power(2), Kernel.custom(hnorm, Shell(1.0, 2.0)), FIELD, X, RADIAL)


class TestHypotheses(unittest.TestCase):
    def test_valid_parameters(self):
        report = check_hypotheses(K1_PARAMS)
        self.assertTrue(report.ok, report.violations)
        self.assertEqual(report.case, "i")
        self.assertEqual(check_hypotheses(K2_PARAMS).case, "ii")
        self.assertTrue(check_hypotheses(K3_PARAMS).ok)

    def test_default_delta(self):
        self.assertEqual(default_delta(float("inf")), 2.0)
        self.assertEqual(default_delta(2.0), 1.5)
        self.assertEqual(K1_PARAMS.resolved_delta(), 2.0)
        assert_allclose(K1_PARAMS.s, 4 / 3)

    def _violations(self, tp):
        report = check_hypotheses(tp)
        self.assertFalse(report.ok)
        return " ".join(report.violations)

    def test_first_estimate_violations(self):
        self.assertIn("declared case", self._violations(K1_PARAMS._replace(which=TheoremKind.THM1_CASE_II)))
        self.assertIn("alpha1<0", self._violations(K1_PARAMS._replace(alpha1=0.0, alpha2=-1.2)))
        self.assertIn("q>1", self._violations(K1_PARAMS._replace(q=1.0)))
        self.assertIn("A_1", self._violations(K1_PARAMS._replace(weight=Weight.power(1.0, 1))))
        self.assertIn("s > q2", self._violations(K1_PARAMS._replace(weight=Weight.power(-2.0, 1))))
        self.assertIn("alpha1/Q + 1/q1", self._violations(K1_PARAMS._replace(alpha2=-2.0)))
        self.assertIn("1<delta<r_w", self._violations(K1_PARAMS._replace(delta=1.0)))
        self.assertIn("finite", self._violations(K1_PARAMS._replace(p=float("inf"))))

    def test_second_estimate_violations(self):
        self.assertIn("1/q2 = 1/q + 1/q1", self._violations(K3_PARAMS._replace(q2=1.5)))
        self.assertIn("alpha1/Q", self._violations(K3_PARAMS._replace(alpha2=0.0)))
        self.assertIn("beta>-n", self._violations(K3_PARAMS._replace(weight=Weight.power(-1.5, 1))))
        self.assertIn("power weight", self._violations(K3_PARAMS._replace(weight=Weight.custom(hnorm, 1))))
        self.assertIn("1<q1<inf", self._violations(K3_PARAMS._replace(q1=1.0)))

    def test_constants_refuse_violated_hypotheses(self):
        with self.assertRaises(HypothesisError) as caught:
            k1_constant(SHELL, FIELD, K1_PARAMS._replace(alpha1=0.0), SPEC)
        self.assertTrue(caught.exception.violations)

        with self.assertRaises(HypothesisError):
            k1_constant(SHELL, FIELD, K3_PARAMS, SPEC)
        with self.assertRaises(HypothesisError):
            k3_constant(SHELL, FIELD, K1_PARAMS, SPEC)


class TestConstants(unittest.TestCase):
    def test_radial_oracle(self):
        assert_allclose(radial_oracle(SHELL, FIELD, K1_PARAMS).value, K1, rtol=1e-6)
        assert_allclose(radial_oracle(Kernel.char_shell(0.25, 0.5), FIELD, K2_PARAMS).value, K2, rtol=1e-6)
        assert_allclose(radial_oracle(SHELL, FIELD, K3_PARAMS).value, K3, rtol=1e-6)

    def test_quadrature_matches_oracle(self):
        assert_allclose(k_constant(SHELL, FIELD, K1_PARAMS, SPEC).value, K1, rtol=0.02)
        assert_allclose(k_constant(SHELL, FIELD, K3_PARAMS, SPEC).value, K3, rtol=0.02)

    def test_homogeneous_in_kernel_size(self):
        scaled = radial_oracle(SHELL.scaled(-3.0), FIELD, K1_PARAMS).value
        assert_allclose(scaled, 3 * radial_oracle(SHELL, FIELD, K1_PARAMS).value, rtol=1e-9)

    def test_oracle_needs_a_radial_problem(self):
        with self.assertRaises(ValueError):
            radial_oracle(Kernel.custom(hnorm, Shell(1.0, 2.0)), FIELD, K1_PARAMS)

    def test_theta(self):
        tp = TheoremParams(TheoremKind.THM2, 2.0, 2.0, 2.0, 1.0, 0.0, 0.0, UNIT)
        self.assertAlmostEqual(theta_weight(np.array([2.0, 0.0, 0.0]), SHELL, FIELD, tp), log(2), places=12)

        y = np.array([[1.5, 0.0, 0.0], [0.0, 1.0, 2.0], [3.0, 0.0, 0.0]])
        values = theta_values(y, SHELL, FIELD, tp)
        self.assertEqual(values[2], 0.0)
        self.assertTrue(np.all(values[:2] > 0))


if __name__ == "__main__":
    unittest.main()
