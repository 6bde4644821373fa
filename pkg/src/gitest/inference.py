"""The independence test: quadratic-form statistic, p-values, components.

The observed four generalized correlations are centered by their exact null
mean and whitened by the exact null covariance.  With a full-rank covariance
the statistic is referred to a chi-square law with 4 degrees of freedom;
rank-deficient covariances fall back to the Moore-Penrose pseudo-inverse with
degrees of freedom equal to the numerical rank.  Component tests standardize
each correlation separately and use two-sided normal p-values.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammainc, gammaincc

from .errors import DegenerateDataError, StructuralError
from .moments import NullMoments, QuadrupleInputs, RANK_TOL, null_moments, t_stats
from .rng import substream
from .scores import ScoreConfig, build_scores

COMPONENT_NAMES = ("RG1", "RG2", "RG3", "RG4")


def chi_square_cdf(x: float, df: int) -> float:
    """Chi-square CDF: the regularized lower incomplete gamma P(df/2, x/2)."""
    if x < 0:
        raise ValueError(f"chi-square CDF needs x >= 0, got {x}")
    if df < 1:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    return float(gammainc(df / 2.0, x / 2.0))


def standard_normal_cdf(x: float) -> float:
    """Phi(x) via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass(frozen=True)
class ComponentResult:
    """One standardized correlation with its two-sided normal p-value."""

    name: str
    z: float
    p: float


@dataclass(frozen=True)
class GitResult:
    """Everything the test produced for one paired sample."""

    t_obs: np.ndarray
    moments: NullMoments
    statistic: float
    df: int
    p_analytic: float | None
    p_permutation: float | None
    components: tuple[ComponentResult, ...]
    max_stat: float
    n: int
    config: ScoreConfig | None = None

    def to_json_dict(self) -> dict:
        cfg = self.config
        return {
            "t_obs": self.t_obs.tolist(),
            "mu": self.moments.mu.tolist(),
            "sigma": self.moments.sigma.tolist(),
            "statistic": self.statistic,
            "df": self.df,
            "p_analytic": self.p_analytic,
            "p_permutation": self.p_permutation,
            "components": [{"name": c.name, "z": c.z, "p": c.p} for c in self.components],
            "max_stat": self.max_stat,
            "n": self.n,
            "k": cfg.resolve_k(self.n) if cfg is not None else None,
            "lambda": cfg.lam if cfg is not None else None,
            "scheme": cfg.scheme if cfg is not None else None,
        }


def _whitening(moments: NullMoments):
    """Kept eigenpairs of the null covariance, or an error when degenerate."""
    sigma = moments.sigma
    if not np.any(np.diagonal(sigma) > 0):
        raise DegenerateDataError(
            "all four correlations are constant under the null; the scores are degenerate"
        )
    eigvals, eigvecs = np.linalg.eigh((sigma + sigma.T) / 2.0)
    kept = eigvals > RANK_TOL * float(eigvals[-1])
    if not np.any(kept):
        raise DegenerateDataError("null covariance has rank zero")
    return eigvals[kept], eigvecs[:, kept]


def _quadratic_form(t: np.ndarray, mu: np.ndarray, eigvals, eigvecs) -> float:
    proj = eigvecs.T @ (t - mu)
    return float((proj * proj / eigvals).sum())


def _component_z(t: np.ndarray, moments: NullMoments) -> np.ndarray:
    sd = np.sqrt(np.maximum(np.diagonal(moments.sigma), 0.0))
    z = np.zeros(4)
    nonzero = sd > 0
    z[nonzero] = (t[nonzero] - moments.mu[nonzero]) / sd[nonzero]
    return z


def git_test(q: QuadrupleInputs, config: ScoreConfig | None = None) -> GitResult:
    """Run the test on prebuilt score matrices; analytic p-value only."""
    moments = null_moments(q)
    eigvals, eigvecs = _whitening(moments)
    t = t_stats(q)
    statistic = _quadratic_form(t, moments.mu, eigvals, eigvecs)
    df = moments.rank
    p_analytic = float(gammaincc(df / 2.0, statistic / 2.0))
    z = _component_z(t, moments)
    components = tuple(
        ComponentResult(name, float(zi), math.erfc(abs(zi) / math.sqrt(2.0)))
        for name, zi in zip(COMPONENT_NAMES, z)
    )
    return GitResult(
        t_obs=t,
        moments=moments,
        statistic=statistic,
        df=df,
        p_analytic=p_analytic,
        p_permutation=None,
        components=components,
        max_stat=float(np.abs(z).max()),
        n=q.n,
        config=config,
    )


def permutation_test(q: QuadrupleInputs, n_perm: int, seed: int,
                     threads: int = 1, statistic: str = "quadratic") -> float:
    """Permutation p-value with the add-one estimator.

    Permutation b relabels the Y sample by a uniform permutation
    (Fisher-Yates shuffle on the PCG64 substream (seed, b)); the null mean
    and covariance are held fixed because they are invariant under that
    relabeling.  ``statistic`` selects the quadratic form or the maximum
    absolute standardized component.  Results do not depend on ``threads``.
    """
    if n_perm < 1:
        raise ValueError("n_perm must be positive")
    if statistic not in ("quadratic", "max"):
        raise ValueError(f"unknown statistic {statistic!r}")
    moments = null_moments(q)
    eigvals, eigvecs = _whitening(moments)
    n = q.n
    dx, sx = q.dx.values, q.sx.values
    dy, sy = q.dy.values, q.sy.values

    if statistic == "quadratic":
        def stat_of(t):
            return _quadratic_form(t, moments.mu, eigvals, eigvecs)
    else:
        def stat_of(t):
            return float(np.abs(_component_z(t, moments)).max())

    stat_obs = stat_of(t_stats(q))

    def exceeds(b: int) -> int:
        perm = substream(seed, b).permutation(n)
        ix = np.ix_(perm, perm)
        dyp, syp = dy[ix], sy[ix]
        t = np.array([
            (dx * dyp).sum(), (dx * syp).sum(), (sx * dyp).sum(), (sx * syp).sum(),
        ])
        return int(stat_of(t) >= stat_obs)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            count = sum(pool.map(exceeds, range(n_perm)))
    else:
        count = sum(exceeds(b) for b in range(n_perm))
    return (1 + count) / (n_perm + 1)


def quadruple_from_samples(x, y, cfg: ScoreConfig = ScoreConfig()) -> QuadrupleInputs:
    """Build the four score matrices for a paired sample."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2:
        raise StructuralError("samples must be 2-D (observations x features)")
    if x.shape[0] != y.shape[0]:
        raise StructuralError(
            f"paired samples must align: x has {x.shape[0]} rows, y has {y.shape[0]}"
        )
    if x.shape[0] < 4:
        raise StructuralError("need at least 4 paired observations")
    sim_x, dis_x = build_scores(x, cfg)
    sim_y, dis_y = build_scores(y, cfg)
    return QuadrupleInputs(sx=sim_x, dx=dis_x, sy=sim_y, dy=dis_y)


def run_test(x, y, cfg: ScoreConfig = ScoreConfig(), method: str = "analytic",
             n_perm: int = 500, seed: int = 0, threads: int = 1) -> GitResult:
    """End-to-end test on raw paired samples.

    ``method`` picks which p-values to report: "analytic", "permutation", or
    "both".
    """
    if method not in ("analytic", "permutation", "both"):
        raise ValueError(f"unknown method {method!r}")
    q = quadruple_from_samples(x, y, cfg)
    result = git_test(q, cfg)
    if method in ("permutation", "both"):
        p_perm = permutation_test(q, n_perm=n_perm, seed=seed, threads=threads)
        result = replace(result, p_permutation=p_perm)
    if method == "permutation":
        result = replace(result, p_analytic=None)
    return result


def chi_square_quantile(prob: float, df: int) -> float:
    """Inverse chi-square CDF by bisection on ``chi_square_cdf``."""
    if not 0 <= prob < 1:
        raise ValueError("prob must lie in [0, 1)")
    lo, hi = 0.0, 1.0
    while chi_square_cdf(hi, df) < prob:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi_square_cdf(mid, df) < prob:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
