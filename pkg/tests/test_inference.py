import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gitest.errors import DegenerateDataError
from gitest.inference import (
    chi_square_cdf,
    chi_square_quantile,
    git_test,
    permutation_test,
    quadruple_from_samples,
    run_test,
    standard_normal_cdf,
)
from gitest.matrixcore import DISSIMILARITY, SIMILARITY, ScoreMatrix, score_matrix
from gitest.moments import QuadrupleInputs

from conftest import make_quadruple


def chi4_closed_form(x):
    return 1.0 - math.exp(-x / 2.0) * (1.0 + x / 2.0)


def phi_series(x):
    """Phi via the textbook series around zero; independent of erfc."""
    a = abs(x)
    total = term = a * math.exp(-a * a / 2.0) / math.sqrt(2.0 * math.pi)
    i = 1.0
    prev = 0.0
    while total != prev:
        prev = total
        i += 2.0
        term *= a * a / i
        total += term
    return 0.5 + total if x >= 0 else 0.5 - total


class TestChiSquareCdf:
    def test_zero(self):
        for df in (1, 2, 4, 7):
            assert chi_square_cdf(0.0, df) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            chi_square_cdf(-1.0, 4)

    def test_df4_closed_form_identity(self, rng):
        xs = rng.uniform(0.0, 50.0, size=1000)
        for x in xs:
            assert abs(chi_square_cdf(x, 4) - chi4_closed_form(x)) <= 1e-12

    def test_df4_95th_percentile(self):
        # bisect the closed form as the independent oracle
        lo, hi = 0.0, 50.0
        for _ in range(80):
            mid = (lo + hi) / 2.0
            if chi4_closed_form(mid) < 0.95:
                lo = mid
            else:
                hi = mid
        x95 = (lo + hi) / 2.0
        assert x95 == pytest.approx(9.487729, abs=1e-5)
        assert chi_square_cdf(9.487729, 4) == pytest.approx(0.95, abs=1e-6)

    def test_df2_exponential(self):
        x = 2.0 * math.log(20.0)
        assert chi_square_cdf(x, 2) == pytest.approx(0.95, abs=1e-12)

    def test_quantile_round_trip(self, rng):
        for prob in rng.uniform(0.01, 0.99, size=20):
            x = chi_square_quantile(prob, 4)
            assert chi_square_cdf(x, 4) == pytest.approx(prob, abs=1e-10)


class TestStandardNormalCdf:
    def test_center(self):
        assert standard_normal_cdf(0.0) == 0.5

    def test_975_quantile(self):
        assert standard_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)
        assert standard_normal_cdf(1.959964) == pytest.approx(phi_series(1.959964), abs=1e-14)

    def test_far_left_tail(self):
        assert standard_normal_cdf(-8.0) < 1e-14

    @given(st.floats(-6, 6))
    @settings(max_examples=100, deadline=None)
    def test_symmetry(self, x):
        assert abs(standard_normal_cdf(x) + standard_normal_cdf(-x) - 1.0) <= 1e-14


def disjoint_support_quadruple():
    """All four sums hit their null expectation exactly (both are zero)."""
    n = 5

    def sym(cells):
        M = np.zeros((n, n))
        for (i, j), v in cells:
            M[i, j] = M[j, i] = v
        return M

    dx = sym([((0, 1), 1.0), ((2, 3), -1.0)])
    sx = sym([((0, 2), 1.0), ((1, 4), -1.0)])
    dy = sym([((0, 3), 1.0), ((1, 2), -1.0)])
    sy = sym([((0, 4), 1.0), ((3, 4), -1.0)])
    return QuadrupleInputs(
        sx=score_matrix(sx, SIMILARITY), dx=score_matrix(dx, DISSIMILARITY),
        sy=score_matrix(sy, SIMILARITY), dy=score_matrix(dy, DISSIMILARITY),
    )


class TestGitTest:
    def test_zero_statistic_when_t_equals_mu(self):
        res = git_test(disjoint_support_quadruple())
        assert res.statistic == pytest.approx(0.0, abs=1e-12)
        assert res.p_analytic == pytest.approx(1.0, abs=1e-12)

    def test_invariant_under_dy_rescaling(self, rng):
        q = make_quadruple(rng, 16)
        res = git_test(q)
        assert res.moments.rank == 4
        q2 = QuadrupleInputs(
            sx=q.sx, dx=q.dx, sy=q.sy,
            dy=ScoreMatrix(4.0 * q.dy.values, DISSIMILARITY, True),
        )
        res2 = git_test(q2)
        assert res2.statistic == pytest.approx(res.statistic, rel=1e-9)

    def test_pinv_matches_direct_inverse_at_full_rank(self, rng):
        q = make_quadruple(rng, 14)
        res = git_test(q)
        assert res.df == 4
        from gitest.moments import null_moments, t_stats

        m = null_moments(q)
        v = t_stats(q) - m.mu
        direct = float(v @ np.linalg.solve(m.sigma, v))
        assert res.statistic == pytest.approx(direct, rel=1e-8)

    def test_degenerate_inputs_rejected(self):
        ones = score_matrix(1.0 - np.eye(5), SIMILARITY)
        q = QuadrupleInputs(sx=ones, dx=ones, sy=ones, dy=ones)
        with pytest.raises(DegenerateDataError):
            git_test(q)

    def test_components_and_max_stat(self, rng):
        q = make_quadruple(rng, 12)
        res = git_test(q)
        assert [c.name for c in res.components] == ["RG1", "RG2", "RG3", "RG4"]
        for c in res.components:
            z_abs = abs(c.z)
            assert c.p == pytest.approx(2.0 * (1.0 - standard_normal_cdf(z_abs)), abs=1e-12)
        assert res.max_stat == max(abs(c.z) for c in res.components)

    def test_rank_deficient_uses_reduced_df(self, rng):
        # identical similarity and dissimilarity scores collapse the four
        # sums onto one line; the quadratic form must fall back gracefully
        from conftest import random_symmetric_scores

        M = random_symmetric_scores(rng, 12)
        q = QuadrupleInputs(sx=M, dx=M, sy=M, dy=M)
        res = git_test(q)
        assert res.df == res.moments.rank == 1
        assert res.statistic >= 0
        assert 0 <= res.p_analytic <= 1

    def test_json_schema(self, rng):
        x = rng.standard_normal((20, 4))
        y = rng.standard_normal((20, 4))
        res = run_test(x, y, method="both", n_perm=19, seed=3)
        d = res.to_json_dict()
        assert set(d) == {
            "t_obs", "mu", "sigma", "statistic", "df", "p_analytic",
            "p_permutation", "components", "max_stat", "n", "k", "lambda", "scheme",
        }
        assert len(d["t_obs"]) == 4 and len(d["sigma"]) == 4
        assert d["k"] == 4 and d["lambda"] == 0.3 and d["scheme"] == "robust_rank"
        assert d["components"][0]["name"] == "RG1"


class TestPermutationTest:
    def test_add_one_lower_bound(self, rng):
        q = make_quadruple(rng, 10)
        p = permutation_test(q, n_perm=37, seed=5)
        assert p >= 1.0 / 38.0
        assert p <= 1.0

    def test_single_permutation_values(self, rng):
        q = make_quadruple(rng, 10)
        for seed in range(6):
            assert permutation_test(q, n_perm=1, seed=seed) in (0.5, 1.0)

    def test_zero_permutations_rejected(self, rng):
        with pytest.raises(ValueError):
            permutation_test(make_quadruple(rng, 10), n_perm=0, seed=0)

    def test_strong_dependence_hits_floor(self, rng):
        x = rng.standard_normal((50, 20))
        q = quadruple_from_samples(x, x.copy())
        for seed in range(20):
            p = permutation_test(q, n_perm=500, seed=seed)
            assert p == pytest.approx(1.0 / 501.0)

    def test_deterministic_and_thread_count_independent(self, rng):
        q = make_quadruple(rng, 20)
        p1 = permutation_test(q, n_perm=200, seed=11, threads=1)
        p2 = permutation_test(q, n_perm=200, seed=11, threads=4)
        p3 = permutation_test(q, n_perm=200, seed=11, threads=1)
        assert p1 == p2 == p3

    def test_max_statistic_variant(self, rng):
        q = make_quadruple(rng, 15)
        p = permutation_test(q, n_perm=99, seed=2, statistic="max")
        assert 0 < p <= 1.0
        with pytest.raises(ValueError):
            permutation_test(q, n_perm=9, seed=2, statistic="median")

    def test_agrees_with_analytic_under_null(self, rng):
        for trial in range(5):
            x = rng.standard_normal((100, 10))
            y = rng.standard_normal((100, 10))
            q = quadruple_from_samples(x, y)
            res = git_test(q)
            p_perm = permutation_test(q, n_perm=1000, seed=trial)
            assert abs(res.p_analytic - p_perm) <= 3.0 / math.sqrt(1000)


class TestRelabelingInvariance:
    def test_joint_row_permutation(self, rng):
        x = rng.standard_normal((30, 6))
        y = rng.standard_normal((30, 6))
        res = run_test(x, y)
        perm = rng.permutation(30)
        res2 = run_test(x[perm], y[perm])
        assert res2.statistic == pytest.approx(res.statistic, rel=1e-10)
        assert res2.p_analytic == pytest.approx(res.p_analytic, rel=1e-10)
        for c1, c2 in zip(res.components, res2.components):
            assert c2.z == pytest.approx(c1.z, rel=1e-10, abs=1e-12)


class TestRunTest:
    def test_method_selects_p_values(self, rng):
        x = rng.standard_normal((20, 3))
        y = rng.standard_normal((20, 3))
        analytic = run_test(x, y, method="analytic")
        assert analytic.p_analytic is not None and analytic.p_permutation is None
        perm = run_test(x, y, method="permutation", n_perm=19, seed=1)
        assert perm.p_analytic is None and perm.p_permutation is not None
        both = run_test(x, y, method="both", n_perm=19, seed=1)
        assert both.p_analytic == analytic.p_analytic
        assert both.p_permutation == perm.p_permutation

    def test_misaligned_samples_rejected(self, rng):
        with pytest.raises(Exception, match="paired samples must align"):
            run_test(rng.standard_normal((10, 2)), rng.standard_normal((11, 2)))
