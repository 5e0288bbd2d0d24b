import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

import wassbound as wb
from wassbound.errors import GridTooSmall, NoFiniteExponentialMoment
from wassbound.metric_measure import holder_norm


def two_point(a=0.0, b=1.0, wa=0.5, seed=0):
    return wb.Sampler.finite(wb.DiscreteMeasure([[a], [b]], [wa, 1 - wa]), seed=seed)


class TestDiscreteMeasure:
    def test_merges_duplicates_and_sorts(self):
        m = wb.DiscreteMeasure([[1.0], [0.0], [1.0 + 1e-14]], [0.25, 0.25, 0.5])
        assert m.size == 2
        assert m.points[0, 0] == 0.0
        assert m.weights[1] == pytest.approx(0.75)

    def test_rejects_bad_weight_sum(self):
        with pytest.raises(ValueError, match="sum"):
            wb.DiscreteMeasure([[0.0], [1.0]], [0.5, 0.6])

    def test_rejects_negative_weights(self):
        with pytest.raises(ValueError):
            wb.DiscreteMeasure([[0.0], [1.0]], [1.5, -0.5])

    def test_drops_zero_atoms(self):
        m = wb.DiscreteMeasure([[0.0], [1.0]], [1.0, 0.0])
        assert m.size == 1


class TestSampleEmpirical:
    def test_point_mass(self):
        s = wb.Sampler.finite(wb.DiscreteMeasure.point_mass([0.0]), seed=1)
        emp = wb.sample_empirical(s, 5)
        assert emp.size == 1
        assert emp.weights[0] == 1.0

    def test_two_point_quarter_weights(self):
        emp = wb.sample_empirical(two_point(seed=3), 4)
        np.testing.assert_allclose(emp.weights * 4, np.round(emp.weights * 4), atol=1e-12)
        assert emp.weights.sum() == pytest.approx(1.0)

    def test_gaussian_mean_clt_scale(self):
        n = 10_000
        for seed in range(5):
            s = wb.Sampler.gaussian(0.0, 1.0, seed=seed)
            emp = wb.sample_empirical(s, n)
            mean = float(np.sum(emp.weights * emp.points[:, 0]))
            assert abs(mean) <= 4.0 / math.sqrt(n)

    @given(n=st.integers(1, 50), seed=st.integers(0, 100))
    @settings(max_examples=40, deadline=None)
    def test_weights_are_multiples_of_one_over_n(self, n, seed):
        meas = wb.DiscreteMeasure([[0.0], [1.0], [2.5]], [0.2, 0.5, 0.3])
        emp = wb.sample_empirical(wb.Sampler.finite(meas, seed=seed), n)
        scaled = emp.weights * n
        np.testing.assert_allclose(scaled, np.round(scaled), atol=1e-9)


class TestEstimateM1:
    def test_point_mass_zero(self):
        s = wb.Sampler.finite(wb.DiscreteMeasure.point_mass([0.0]), seed=0)
        m1, se = wb.estimate_m1(s, n_mc=100)
        assert m1 == 0.0 and se == 0.0

    def test_two_point_exact_expectation(self):
        s = two_point(0.0, 2.0, seed=5)
        m1, se = wb.estimate_m1(s, n_mc=40_000)
        assert m1 == pytest.approx(1.0, abs=4 * se + 1e-12)

    def test_gaussian_half_normal_quadrature_oracle(self):
        oracle, err = quad(
            lambda x: abs(x) * math.exp(-x * x / 2) / math.sqrt(2 * math.pi), -12, 12
        )
        assert oracle == pytest.approx(math.sqrt(2 / math.pi), abs=1e-10)
        s = wb.Sampler.gaussian(0.0, 1.0, seed=9)
        m1, se = wb.estimate_m1(s, n_mc=100_000)
        assert m1 == pytest.approx(oracle, abs=4 * se)


class TestFindExpRate:
    def test_point_mass_returns_cap(self):
        s = wb.Sampler.finite(wb.DiscreteMeasure.point_mass([0.0]), seed=0)
        assert wb.find_exp_rate(s, target=2.0, n_mc=50, a_cap=128.0) == 128.0

    def test_two_point_analytic_root(self):
        # 0.5 + 0.5 e^a = 2  =>  a = ln 3
        a = wb.find_exp_rate(two_point(seed=11), target=2.0, n_mc=60_000)
        assert a == pytest.approx(math.log(3.0), abs=0.05)

    def test_deterministic_given_seed(self):
        s = two_point(seed=11)
        assert wb.find_exp_rate(s, target=2.0) == wb.find_exp_rate(s, target=2.0)

    def test_exponential_law_analytic_root(self):
        # E e^{aX} = rate/(rate-a) = 2 at a = rate/2
        s = wb.Sampler.exponential_tail(2.0, seed=4)
        a = wb.find_exp_rate(s, target=2.0, n_mc=120_000)
        assert a == pytest.approx(1.0, abs=0.08)

    def test_independent_reestimate_within_band(self):
        # target 1.8 keeps 2a below the exponential rate, so the re-estimate
        # has finite variance and the stderr band is meaningful
        for sampler, target in [
            (wb.Sampler.exponential_tail(1.0, seed=8), 1.8),
            (two_point(seed=13), 2.0),
        ]:
            n_mc = 50_000
            a = wb.find_exp_rate(sampler, target=target, n_mc=n_mc)
            d = sampler.draw(n_mc, stream=99)[:, 0]
            ex = np.exp(a * np.abs(d))
            est = float(ex.mean())
            se = float(ex.std(ddof=1) / math.sqrt(len(ex)))
            assert 1.0 <= est <= target + 3 * se

    def test_brownian_rate_at_least_paper_value(self):
        s = wb.Sampler.brownian_path(256, seed=2)
        a = wb.find_exp_rate(s, target=2.0, n_mc=1500)
        assert a >= math.sqrt(2 * math.log(2)) / 3

    def test_no_finite_exponential_moment(self):
        heavy = wb.Sampler.finite(
            wb.DiscreteMeasure([[0.0], [1e308]], [0.5, 0.5]), seed=0
        )
        with pytest.raises(NoFiniteExponentialMoment):
            wb.find_exp_rate(heavy, target=2.0, n_mc=64)


class TestHolderNorm:
    def test_constant_path(self):
        assert holder_norm([3.0, 3.0, 3.0], 0.5) == 0.0

    def test_single_increment(self):
        assert holder_norm([0.0, 1.0], 1.0) == pytest.approx(1.0)

    def test_tent_path_exhaustive_oracle(self):
        path = np.array([0.0, 1.0, 0.0])
        ts = np.array([0.0, 0.5, 1.0])
        oracle = max(
            abs(path[i] - path[j]) / abs(ts[i] - ts[j]) ** 0.5
            for i in range(3)
            for j in range(i + 1, 3)
        )
        assert oracle == pytest.approx(math.sqrt(2))
        assert holder_norm(path, 0.5) == pytest.approx(oracle)

    def test_grid_too_small(self):
        with pytest.raises(GridTooSmall):
            holder_norm([1.0], 0.5)

    def test_nondecreasing_in_alpha(self, rng):
        # grid gaps are <= 1, so shrinking the denominator exponent can only
        # decrease the ratio: the norm is nondecreasing in alpha
        for _ in range(20):
            path = np.cumsum(rng.normal(size=40)) * 0.2
            alphas = np.linspace(0.05, 1.0, 12)
            vals = [holder_norm(path, a) for a in alphas]
            assert all(v2 >= v1 - 1e-12 for v1, v2 in zip(vals, vals[1:]))


class TestMetric:
    @pytest.mark.parametrize(
        "metric,dim",
        [
            (wb.EUCLIDEAN, 3),
            (wb.Metric("sup_norm_path"), 16),
            (wb.Metric("holder_seminorm", alpha=0.4), 16),
        ],
    )
    def test_symmetry_and_triangle_on_random_triples(self, metric, dim, rng):
        pts = rng.normal(size=(3000, dim))
        for k in range(1000):
            x, y, z = pts[3 * k], pts[3 * k + 1], pts[3 * k + 2]
            dxy = metric.dist(x, y)
            assert dxy == pytest.approx(metric.dist(y, x), abs=1e-12)
            assert metric.dist(x, z) <= dxy + metric.dist(y, z) + 1e-9
            assert metric.dist(x, x) == 0.0

    def test_pairwise_matches_dist(self, rng):
        a = rng.normal(size=(4, 3))
        b = rng.normal(size=(5, 3))
        mat = wb.EUCLIDEAN.pairwise(a, b)
        for i in range(4):
            for j in range(5):
                assert mat[i, j] == pytest.approx(wb.EUCLIDEAN.dist(a[i], b[j]))


class TestSampler:
    def test_same_seed_same_stream_identical(self):
        s = wb.Sampler.gaussian([0.0, 1.0], [1.0, 2.0], seed=42)
        np.testing.assert_array_equal(s.draw(10, stream=3), s.draw(10, stream=3))
        assert not np.array_equal(s.draw(10, stream=3), s.draw(10, stream=4))

    def test_brownian_starts_at_zero(self):
        s = wb.Sampler.brownian_path(64, seed=0)
        paths = s.draw(5)
        assert paths.shape == (5, 64)
        np.testing.assert_array_equal(paths[:, 0], np.zeros(5))

    def test_brownian_terminal_variance(self):
        s = wb.Sampler.brownian_path(128, seed=7)
        term = s.draw(20_000)[:, -1]
        assert np.var(term) == pytest.approx(1.0, rel=0.05)

    def test_mixture_component_dims_must_match(self):
        with pytest.raises(Exception):
            wb.Sampler.mixture(
                [0.5, 0.5],
                [wb.Sampler.uniform_cube(1), wb.Sampler.uniform_cube(2)],
            )

    def test_mixture_draws(self):
        mix = wb.Sampler.mixture(
            [0.3, 0.7],
            [wb.Sampler.gaussian(-5.0, 0.01), wb.Sampler.gaussian(5.0, 0.01)],
            seed=3,
        )
        draws = mix.draw(5000)[:, 0]
        frac_high = np.mean(draws > 0)
        assert frac_high == pytest.approx(0.7, abs=0.03)

    def test_moment_report_fields(self):
        rep = wb.moment_report(wb.Sampler.gaussian(0.0, 1.0, seed=1), a=0.25, n_mc=50_000)
        # E e^{a X^2} = 1/sqrt(1-2a) for a = 1/4
        assert rep.E_a2 == pytest.approx(math.sqrt(2.0), rel=0.05)
        assert rep.E_a1 >= 1.0 and rep.m1 > 0 and rep.a == 0.25
