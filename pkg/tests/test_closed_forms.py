"""Closed-form values on the line, Gaussian maps, sliced distance, barycenters."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otecon import (
    AffineMap,
    DiscreteMeasure,
    CostMatrix,
    DomainError,
    GaussianMeasure,
    NotInvertibleError,
    Sample1D,
    barycenter_1d,
    gaussian_ot_map,
    gaussian_w2,
    ot_value_1d,
    sliced_wasserstein,
    solve_discrete_ot,
    wasserstein_1d,
)

abs_cost = lambda a, b: abs(a - b)
sq_cost = lambda a, b: (a - b) ** 2


def lp_value_on_atoms(x, y, cost_fn):
    mu = DiscreteMeasure(np.full(x.n, 1.0 / x.n))
    nu = DiscreteMeasure(np.full(y.n, 1.0 / y.n))
    c = CostMatrix([[cost_fn(a, b) for b in y.values] for a in x.values])
    _, _, value = solve_discrete_ot(mu, nu, c)
    return value


class TestOtValue1D:
    def test_identical_samples_zero(self):
        s = Sample1D([0.3, 1.1, 2.0])
        assert ot_value_1d(s, s, abs_cost) == 0.0

    def test_sorted_pairing_equal_sizes(self):
        assert ot_value_1d(Sample1D([1, 2]), Sample1D([3, 5]), abs_cost) == pytest.approx(2.5)

    def test_unequal_sizes_match_lp(self):
        x = Sample1D([0.0, 1.0])
        y = Sample1D([0.0, 1.0, 2.0])
        value = ot_value_1d(x, y, abs_cost)
        assert value == pytest.approx(lp_value_on_atoms(x, y, abs_cost), abs=1e-12)

    def test_submodular_flag_required(self):
        with pytest.raises(DomainError):
            ot_value_1d(Sample1D([0.0]), Sample1D([1.0]), abs_cost, submodular=False)

    def test_quadratic_matches_lp_random(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 12))
            x = Sample1D.from_data(rng.normal(size=n))
            y = Sample1D.from_data(rng.normal(size=n))
            assert ot_value_1d(x, y, sq_cost) == pytest.approx(
                lp_value_on_atoms(x, y, sq_cost), abs=1e-9
            )


class TestWasserstein1D:
    def test_translation_every_order(self):
        x = Sample1D([0.0, 0.4, 1.9])
        for c in (-2.5, 0.75):
            y = Sample1D(x.values + c)
            for p in (1.0, 2.0, 3.5):
                assert wasserstein_1d(x, y, p) == pytest.approx(abs(c), rel=1e-12)

    def test_identical_zero(self):
        x = Sample1D([0.0, 1.0])
        for p in (1.0, 2.0, 7.0):
            assert wasserstein_1d(x, x, p) == 0.0

    def test_paired_unit_differences(self):
        assert wasserstein_1d(Sample1D([0, 2]), Sample1D([1, 3]), p=2) == pytest.approx(1.0)

    def test_order_below_one_rejected(self):
        with pytest.raises(DomainError):
            wasserstein_1d(Sample1D([0.0]), Sample1D([1.0]), p=0.5)

    def test_triangle_inequality(self, rng):
        for _ in range(25):
            sizes = rng.integers(1, 9, size=3)
            x, y, z = (Sample1D.from_data(rng.normal(size=int(k))) for k in sizes)
            for p in (1.0, 2.0):
                dxy = wasserstein_1d(x, y, p)
                dyz = wasserstein_1d(y, z, p)
                dxz = wasserstein_1d(x, z, p)
                assert dxz <= dxy + dyz + 1e-12

    @given(
        st.lists(st.floats(-100, 100), min_size=1, max_size=10),
        st.lists(st.floats(-100, 100), min_size=1, max_size=10),
    )
    @settings(max_examples=60, deadline=None)
    def test_symmetry_and_nonnegativity(self, xs, ys):
        x, y = Sample1D.from_data(xs), Sample1D.from_data(ys)
        d = wasserstein_1d(x, y, 2.0)
        assert d >= 0.0
        assert d == pytest.approx(wasserstein_1d(y, x, 2.0), rel=1e-12, abs=1e-12)


class TestGaussianMap:
    def test_pure_translation(self):
        g1 = GaussianMeasure(np.zeros(2), np.eye(2))
        g2 = GaussianMeasure(np.array([1.0, -2.0]), np.eye(2))
        tm = gaussian_ot_map(g1, g2)
        assert np.allclose(tm.linear, np.eye(2), atol=1e-12)
        assert np.allclose(tm.shift, [1.0, -2.0], atol=1e-12)

    def test_scalar_scale(self):
        g1 = GaussianMeasure([0.0], [[1.0]])
        g2 = GaussianMeasure([0.0], [[4.0]])
        tm = gaussian_ot_map(g1, g2)
        assert tm.linear[0, 0] == pytest.approx(2.0, abs=1e-12)

    def test_commuting_diagonal(self):
        g1 = GaussianMeasure(np.zeros(2), np.diag([1.0, 4.0]))
        g2 = GaussianMeasure(np.zeros(2), np.diag([9.0, 1.0]))
        tm = gaussian_ot_map(g1, g2)
        assert np.allclose(tm.linear, np.diag([3.0, 0.5]), atol=1e-10)

    def test_conjugation_identity(self, rng):
        for _ in range(10):
            d = int(rng.integers(1, 5))
            b1 = rng.normal(size=(d, d))
            b2 = rng.normal(size=(d, d))
            g1 = GaussianMeasure(rng.normal(size=d), b1 @ b1.T + 0.5 * np.eye(d))
            g2 = GaussianMeasure(rng.normal(size=d), b2 @ b2.T + 0.5 * np.eye(d))
            tm = gaussian_ot_map(g1, g2)
            assert np.allclose(tm.linear @ g1.cov @ tm.linear, g2.cov, atol=1e-8)

    def test_singular_source_rejected(self):
        g1 = GaussianMeasure(np.zeros(2), np.diag([1.0, 0.0]))
        g2 = GaussianMeasure(np.zeros(2), np.eye(2))
        with pytest.raises(NotInvertibleError):
            gaussian_ot_map(g1, g2)

    def test_pushforward_moments(self, rng):
        g1 = GaussianMeasure([0.5, -1.0], [[2.0, 0.6], [0.6, 1.0]])
        g2 = GaussianMeasure([-2.0, 3.0], [[1.5, -0.4], [-0.4, 0.8]])
        tm = gaussian_ot_map(g1, g2)
        chol = np.linalg.cholesky(g1.cov)
        draws = g1.mean + rng.standard_normal((100000, 2)) @ chol.T
        mapped = tm(draws)
        assert np.linalg.norm(mapped.mean(axis=0) - g2.mean) < 0.02
        emp_cov = np.cov(mapped.T)
        assert np.linalg.norm(emp_cov - g2.cov, ord="fro") < 0.05


class TestGaussianW2:
    def test_coincident(self):
        g = GaussianMeasure([1.0, 2.0], [[2.0, 0.3], [0.3, 1.0]])
        assert gaussian_w2(g, g) == pytest.approx(0.0, abs=1e-7)

    def test_scalar_mean_shift(self):
        g1 = GaussianMeasure([0.0], [[1.0]])
        g2 = GaussianMeasure([3.0], [[1.0]])
        assert gaussian_w2(g1, g2) == pytest.approx(3.0, abs=1e-10)

    def test_diagonal_value(self):
        g1 = GaussianMeasure(np.zeros(2), np.diag([1.0, 4.0]))
        g2 = GaussianMeasure(np.zeros(2), np.diag([9.0, 1.0]))
        assert gaussian_w2(g1, g2) == pytest.approx(np.sqrt(5.0), abs=1e-10)

    def test_scalar_agrees_with_empirical(self, rng):
        g1 = GaussianMeasure([0.3], [[1.44]])
        g2 = GaussianMeasure([-1.0], [[0.25]])
        exact = gaussian_w2(g1, g2)
        n = 100000
        x = Sample1D.from_data(g1.mean[0] + np.sqrt(g1.cov[0, 0]) * rng.standard_normal(n))
        y = Sample1D.from_data(g2.mean[0] + np.sqrt(g2.cov[0, 0]) * rng.standard_normal(n))
        assert wasserstein_1d(x, y, 2.0) == pytest.approx(exact, rel=0.02)


class TestSliced:
    def test_identical_clouds(self, rng):
        x = rng.normal(size=(15, 3))
        assert sliced_wasserstein(x, x, n_dir=10, seed=4) == 0.0

    def test_dimension_one_reduces_exactly(self, rng):
        x = rng.normal(size=12)
        y = rng.normal(size=12)
        sw = sliced_wasserstein(x, y, p=2.0, n_dir=7, seed=123)
        assert sw == pytest.approx(
            wasserstein_1d(Sample1D.from_data(x), Sample1D.from_data(y), 2.0), rel=1e-12
        )

    def test_translation_expectation(self, rng):
        d = 4
        v = np.array([0.8, -0.3, 0.5, 0.1])
        x = rng.normal(size=(40, d))
        sw = sliced_wasserstein(x, x + v, p=2.0, n_dir=20000, seed=7)
        assert sw == pytest.approx(np.linalg.norm(v) / np.sqrt(d), rel=0.02)

    def test_seed_reproducibility(self, rng):
        x = rng.normal(size=(10, 2))
        y = rng.normal(size=(10, 2))
        a = sliced_wasserstein(x, y, n_dir=50, seed=99)
        b = sliced_wasserstein(x, y, n_dir=50, seed=99)
        assert a == b
        assert sliced_wasserstein(x, y, n_dir=50, seed=100) != a

    def test_zero_dimension_rejected(self):
        with pytest.raises(DomainError):
            sliced_wasserstein(np.empty((3, 0)), np.empty((3, 0)))

    def test_mismatched_dimension_rejected(self, rng):
        with pytest.raises(DomainError):
            sliced_wasserstein(rng.normal(size=(4, 2)), rng.normal(size=(4, 3)))


class TestBarycenter1D:
    def test_single_sample_identity(self):
        s = Sample1D.from_data([0.1, 0.9, 0.4])
        out = barycenter_1d([s], np.array([1.0]))
        assert np.array_equal(out.values, s.values)

    def test_two_diracs(self):
        out = barycenter_1d([Sample1D([0.0]), Sample1D([1.0])], np.array([0.5, 0.5]))
        assert np.allclose(out.values, [0.5])

    def test_order_statistic_average(self):
        out = barycenter_1d([Sample1D([0, 2]), Sample1D([1, 3])], np.array([0.5, 0.5]))
        assert np.allclose(out.values, [0.5, 2.5])

    def test_unequal_sizes_rejected(self):
        with pytest.raises(DomainError):
            barycenter_1d([Sample1D([0.0]), Sample1D([0.0, 1.0])], np.array([0.5, 0.5]))

    def test_weight_validation(self):
        s = Sample1D([0.0])
        with pytest.raises(DomainError):
            barycenter_1d([s, s], np.array([0.7, 0.7]))
        with pytest.raises(DomainError):
            barycenter_1d([s, s], np.array([1.5, -0.5]))

    def test_local_optimality(self, rng):
        samples = [Sample1D.from_data(rng.normal(size=6)) for _ in range(3)]
        lam = np.array([0.2, 0.5, 0.3])
        center = barycenter_1d(samples, lam)

        def objective(candidate):
            return sum(
                w * wasserstein_1d(candidate, s, 2.0) ** 2 for w, s in zip(lam, samples)
            )

        base = objective(center)
        for _ in range(50):
            jitter = Sample1D.from_data(center.values + 0.05 * rng.standard_normal(6))
            assert base <= objective(jitter) + 1e-12
