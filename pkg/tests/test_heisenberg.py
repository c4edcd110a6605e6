import unittest
from math import pi

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from hherz.data_structures import Annulus
from hherz.errors import DimensionMismatchError
from hherz.heisenberg import (
    HPoint,
    annulus_measure,
    ball_measure,
    dilate,
    dimension_of,
    group_constants,
    group_inv,
    group_mul,
    hdist,
    hnorm,
    random_points,
    sphere_area,
    unit_ball_volume_mc,
)


class TestGroupLaw(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(0)

    def test_worked_product(self):
        assert_array_equal(group_mul([1, 0, 0], [0, 1, 0]), [1, 1, -2])

    def test_identity_and_inverse(self):
        x = np.array([1.0, 2.0, 3.0])
        assert_array_equal(group_mul(x, np.zeros(3)), x)
        assert_array_equal(group_mul(x, group_inv(x)), np.zeros(3))
        assert_array_equal(group_inv(x), -x)

    def test_associativity(self):
        for n in (1, 2):
            x, y, z = (random_points(n, 10_000, self.rng, scale=2.0) for _ in range(3))
            assert_allclose(group_mul(group_mul(x, y), z), group_mul(x, group_mul(y, z)), atol=1e-12)

    def test_not_commutative(self):
        self.assertFalse(np.array_equal(group_mul([1, 0, 0], [0, 1, 0]), group_mul([0, 1, 0], [1, 0, 0])))

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            group_mul(np.zeros(3), np.zeros(5))
        with self.assertRaises(DimensionMismatchError):
            dimension_of(np.zeros(4))

    def test_dilation(self):
        assert_array_equal(dilate(2.0, [1, 1, 1]), [2, 2, 4])
        x = random_points(1, 100, self.rng)
        assert_allclose(dilate(3.0, dilate(0.5, x)), dilate(1.5, x), atol=1e-14)
        with self.assertRaises(ValueError):
            dilate(0.0, [1, 1, 1])

    def test_dilation_is_an_automorphism(self):
        x, y = (random_points(2, 1000, self.rng) for _ in range(2))
        r = self.rng.uniform(0.1, 10.0, 1000)
        assert_allclose(dilate(r, group_mul(x, y)), group_mul(dilate(r, x), dilate(r, y)), rtol=1e-12, atol=1e-12)


class TestNorm(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(1)

    def test_worked_values(self):
        self.assertAlmostEqual(hnorm([1, 0, 0]), 1.0)
        self.assertAlmostEqual(hnorm([0, 0, 1]), 1.0)
        self.assertAlmostEqual(hnorm([1, 1, 0]), np.sqrt(2.0))
        self.assertEqual(hnorm([0, 0, 0]), 0.0)

    def test_homogeneity(self):
        for n in (1, 2):
            x = random_points(n, 10_000, self.rng, scale=3.0)
            r = self.rng.uniform(0.1, 10.0, 10_000)
            assert_allclose(hnorm(dilate(r, x)), r * hnorm(x), rtol=1e-12)

    def test_symmetry_and_left_invariance(self):
        x, y, z = (random_points(1, 10_000, self.rng) for _ in range(3))
        assert_allclose(hnorm(group_inv(x)), hnorm(x))
        assert_allclose(hdist(group_mul(z, x), group_mul(z, y)), hdist(x, y), rtol=1e-12, atol=1e-12)

    def test_triangle_inequality(self):
        x, y = (random_points(1, 10_000, self.rng, scale=5.0) for _ in range(2))
        self.assertTrue(np.all(hnorm(group_mul(x, y)) <= hnorm(x) + hnorm(y) + 1e-12))


class TestConstants(unittest.TestCase):
    def test_unit_ball_volume(self):
        dims = group_constants(1)
        self.assertEqual(dims.Q, 4)
        self.assertEqual(dims.ndim, 3)
        assert_allclose(dims.omega_Q, pi**2 / 2, rtol=1e-10)
        assert_allclose(dims.w_Q, 2 * pi**2, rtol=1e-10)
        assert_allclose(sphere_area(1), dims.w_Q)

    def test_homogeneous_dimension(self):
        self.assertEqual(group_constants(2).Q, 6)
        with self.assertRaises(ValueError):
            group_constants(0)

    def test_ball_measure(self):
        assert_allclose(ball_measure(1, 0), pi**2 / 2)
        assert_allclose(ball_measure(1, 2), pi**2 / 2 * 2.0**8)
        assert_allclose(annulus_measure(1, Annulus.shell(1)), pi**2 / 2 * 15)

    def test_monte_carlo_volume(self):
        estimate, stderr = unit_ball_volume_mc(1, 1_000_000, seed=3)
        assert_allclose(estimate, pi**2 / 2, rtol=0.005)
        self.assertLess(stderr, 0.01)

    def test_monte_carlo_volume_n2(self):
        estimate, _ = unit_ball_volume_mc(2, 600_000, seed=4)
        assert_allclose(estimate, group_constants(2).omega_Q, rtol=0.02)


class TestHPoint(unittest.TestCase):
    def test_operators(self):
        x = HPoint([1, 0, 0])
        y = HPoint([0, 1, 0])
        self.assertEqual(x * y, HPoint([1, 1, -2]))
        self.assertEqual(x * -x, HPoint.zero(1))
        self.assertAlmostEqual(abs(HPoint([0, 0, 4])), 2.0)
        self.assertEqual(x.dilate(2), HPoint([2, 0, 0]))
        self.assertAlmostEqual(x.dist(x), 0.0)
        self.assertEqual(x.n, 1)
        self.assertEqual(x.t, 0.0)

    def test_immutable_and_hashable(self):
        x = HPoint([1, 2, 3])
        with self.assertRaises(ValueError):
            x.coords[0] = 5
        self.assertEqual(len({x, HPoint([1, 2, 3])}), 1)

    def test_rejects_bad_input(self):
        with self.assertRaises(DimensionMismatchError):
            HPoint([1, 2])
        with self.assertRaises(ValueError):
            HPoint([np.nan, 0, 0])

    def test_array_interop(self):
        assert_array_equal(np.asarray(HPoint([1, 2, 3])), [1, 2, 3])
        self.assertAlmostEqual(float(hnorm(HPoint([0, 0, 1]))), 1.0)


if __name__ == "__main__":
    unittest.main()
