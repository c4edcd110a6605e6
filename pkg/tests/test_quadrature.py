import unittest
from math import log, pi

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from hherz.data_structures import Annulus, Ball, Box, Shell, WholeSpace
from hherz.errors import DivergentIntegralError, NonFiniteIntegrandError
from hherz.heisenberg import group_constants, group_mul, hdist, hnorm
from hherz.quadrature import (
    QuadMethod,
    QuadSpec,
    evaluate_on_nodes,
    grid_size,
    integrate_ball,
    integrate_many,
    integrate_nodes,
    integrate_radial,
    integrate_region,
    sample_region,
)

OMEGA = pi**2 / 2
DIMS = group_constants(1)


def one(points):
    return np.ones(len(points))


class TestQuadSpec(unittest.TestCase):
    def test_from_literal(self):
        spec = QuadSpec.from_literal({"method": "tensor_grid", "budget": 1000, "seed": 5})
        self.assertIs(spec.method, QuadMethod.TENSOR_GRID)
        self.assertEqual(spec.budget, 1000)
        self.assertEqual(spec.seed, 5)

    def test_rejects_bad_literals(self):
        with self.assertRaises(ValueError):
            QuadSpec.from_literal({"bogus": 1})
        with self.assertRaises(ValueError):
            QuadSpec.from_literal({"budget": 0})
        with self.assertRaises(ValueError):
            QuadSpec.from_literal({"seed": -1})
        with self.assertRaises(ValueError):
            QuadSpec.from_literal({"method": "simpson"})

    def test_grid_size(self):
        self.assertEqual(grid_size(27_000, 3), 30)
        self.assertEqual(grid_size(1000, 3), 9)
        self.assertEqual(grid_size(1, 3), 1)


class TestRegionIntegrals(unittest.TestCase):
    def test_unit_ball_volume(self):
        spec = QuadSpec(budget=400_000, seed=11)
        result = integrate_region(one, Annulus.ball(0), spec, n=1)
        assert_allclose(result.value, OMEGA, rtol=0.01)
        self.assertGreater(result.err_est, 0.0)
        self.assertLess(result.err_est, 0.01 * OMEGA)

    def test_unit_ball_volume_on_a_grid(self):
        spec = QuadSpec(method=QuadMethod.TENSOR_GRID, budget=216_000)
        result = integrate_region(one, Annulus.ball(0), spec, n=1)
        assert_allclose(result.value, OMEGA, rtol=0.02)

    def test_measure_scaling(self):
        spec = QuadSpec(budget=200_000, seed=2)
        small = integrate_region(one, Annulus.ball(-1), spec, n=1).value
        large = integrate_region(one, Annulus.ball(2), spec, n=1).value
        assert_allclose(large / small, 2.0 ** (3 * 4), rtol=0.03)

    def test_error_shrinks_with_budget(self):
        spec = QuadSpec(budget=50_000, seed=12)
        coarse = integrate_region(hnorm, Annulus.shell(1), spec, n=1)
        fine = integrate_region(hnorm, Annulus.shell(1), spec._replace(budget=100_000), n=1)
        self.assertLess(fine.err_est, coarse.err_est)

    def test_zero_integrand(self):
        result = integrate_region(lambda y: 0.0, Annulus.shell(0), QuadSpec(budget=1000), n=1)
        self.assertEqual(result.value, 0.0)
        self.assertEqual(result.err_est, 0.0)

    def test_deterministic(self):
        spec = QuadSpec(budget=20_000, seed=9)
        a = integrate_region(hnorm, Annulus.shell(1), spec, n=1)
        b = integrate_region(hnorm, Annulus.shell(1), spec, n=1)
        self.assertEqual(a, b)

    def test_box(self):
        box = Box((0.0, 0.0, 0.0), (1.0, 2.0, 3.0))
        result = integrate_region(one, box, QuadSpec(budget=10_000), n=1)
        assert_allclose(result.value, box.volume, rtol=1e-12)

    def test_shell(self):
        spec = QuadSpec(budget=200_000, seed=4)
        result = integrate_region(one, Shell(1.0, 2.0), spec, n=1)
        assert_allclose(result.value, OMEGA * 15, rtol=0.01)

    def test_whole_space_needs_truncation(self):
        with self.assertRaises(ValueError):
            integrate_region(one, WholeSpace(), QuadSpec(), n=1)

    def test_whole_space_tail_estimate(self):
        spec = QuadSpec(budget=100_000, seed=1, tail_k=4)

        def decay(points):
            return hnorm(points) ** -6.0

        result = integrate_region(
            decay, WholeSpace(), spec._replace(tail_k_lo=0), n=1,
            tail_majorant=lambda r: r**-6.0, core_majorant=lambda r: 0.0,
        )
        # w_Q int_16^inf r^-3 dr
        assert_allclose(result.tail_est, DIMS.w_Q / (2 * 16**2), rtol=1e-6)

    def test_non_finite_integrand(self):
        with self.assertRaises(NonFiniteIntegrandError):
            integrate_region(lambda y: np.full(len(y), np.nan), Annulus.shell(0), QuadSpec(budget=1000), n=1)

    def test_radial_method_rejects_nodes(self):
        with self.assertRaises(ValueError):
            sample_region(Annulus.ball(0), QuadSpec(method=QuadMethod.RADIAL_1D), n=1)

    def test_rtol_flag(self):
        spec = QuadSpec(budget=200, seed=0, rtol=1e-9)
        self.assertTrue(integrate_region(hnorm, Annulus.ball(0), spec, n=1).flagged)


class TestHaarMeasure(unittest.TestCase):
    def test_left_translation_invariance(self):
        def gauss(points):
            return np.exp(-hnorm(points) ** 4)

        a = np.array([0.5, -0.5, 0.3])
        box = Box((-3.0, -3.0, -10.0), (3.0, 3.0, 10.0))
        spec = QuadSpec(method=QuadMethod.TENSOR_GRID, budget=400_000)
        plain = integrate_region(gauss, box, spec, n=1).value
        moved = integrate_region(lambda y: gauss(group_mul(np.broadcast_to(a, y.shape), y)), box, spec, n=1).value
        # w_Q int_0^inf exp(-r^4) r^3 dr = w_Q / 4
        assert_allclose(plain, OMEGA, rtol=0.005)
        assert_allclose(moved, plain, rtol=0.005)


class TestBalls(unittest.TestCase):
    def test_left_translated_ball(self):
        center = (1.0, -0.5, 2.0)
        spec = QuadSpec(budget=200_000, seed=6)
        nodes = sample_region(Ball(center, 0.5), spec, n=1)
        self.assertTrue(np.all(hdist(nodes.points, np.broadcast_to(center, nodes.points.shape)) < 0.5 + 1e-12))

        volume = integrate_ball(one, center, 0.5, spec, n=1)
        assert_allclose(volume.value, OMEGA * 0.5**4, rtol=0.01)

    def test_shared_nodes(self):
        spec = QuadSpec(budget=20_000, seed=3)
        a, b = integrate_many([hnorm, lambda y: 2 * hnorm(y)], Annulus.ball(0), spec, n=1)
        assert_allclose(b.value, 2 * a.value, rtol=1e-14)

        nodes = sample_region(Annulus.ball(0), spec, n=1)
        values = evaluate_on_nodes(hnorm, nodes)
        self.assertEqual(integrate_nodes(values, nodes).value, a.value)
        assert_array_equal(nodes.weights.shape, (len(nodes.points),))


class TestRadial(unittest.TestCase):
    def test_unit_ball(self):
        result = integrate_radial(lambda r: 1.0, 0.0, 1.0, DIMS)
        assert_allclose(result.value, OMEGA, rtol=1e-12)

    def test_log_moment(self):
        # Q int_0^1 r^(Q-1) log r dr = -1/Q
        result = integrate_radial(log, 0.0, 1.0, DIMS)
        assert_allclose(result.value / OMEGA, -0.25, rtol=1e-8)

    def test_divergent(self):
        try:
            result = integrate_radial(lambda r: r**-4.5, 0.0, 1.0, DIMS)
        except DivergentIntegralError:
            return
        self.assertTrue(result.flagged)

    def test_radial_region_matches_nodes(self):
        radial = integrate_region(hnorm, Annulus.shell(1), QuadSpec(method=QuadMethod.RADIAL_1D), n=1)
        sampled = integrate_region(hnorm, Annulus.shell(1), QuadSpec(budget=200_000, seed=8), n=1)
        # w_Q int_1^2 r^4 dr
        assert_allclose(radial.value, DIMS.w_Q * 31 / 5, rtol=1e-10)
        assert_allclose(sampled.value, radial.value, rtol=0.01)

    def test_budget_caps_evaluations(self):
        result = integrate_radial(lambda r: r * r, 0.0, 1.0, DIMS, budget=100)
        self.assertLessEqual(result.n_evals, 100)
        assert_allclose(result.value, DIMS.w_Q / 6, rtol=1e-10)

        with self.assertRaises(DivergentIntegralError):
            integrate_radial(lambda r: r**-3.5, 0.0, 1.0, DIMS, budget=21)

    def test_region_respects_budget(self):
        spec = QuadSpec(method=QuadMethod.RADIAL_1D, budget=200)
        result = integrate_region(hnorm, Annulus.shell(1), spec, n=1)
        self.assertLessEqual(result.n_evals, 200)
        assert_allclose(result.value, DIMS.w_Q * 31 / 5, rtol=1e-10)

    def test_bad_interval(self):
        with self.assertRaises(ValueError):
            integrate_radial(lambda r: 1.0, 2.0, 1.0, DIMS)


if __name__ == "__main__":
    unittest.main()
