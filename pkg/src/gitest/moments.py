"""Generalized correlations and their exact permutation-null moments.

Four sums pair the X-side score matrices with the Y-side ones:

    T1 = sum_{i != j} DX_ij DY_ij        T2 = sum_{i != j} DX_ij SY_ij
    T3 = sum_{i != j} SX_ij DY_ij        T4 = sum_{i != j} SX_ij SY_ij

Under a uniformly random relabeling of the Y sample the mean and covariance
of (T1..T4) have closed forms in the scalar summaries of the score matrices;
``brute_force_moments`` provides the exhaustive-enumeration oracle for them.
All formulas require symmetric matrices with zero diagonals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import StructuralError
from .matrixcore import ScoreMatrix, center, cross_summarize

#: eigenvalues below RANK_TOL times the largest count as zero
RANK_TOL = 1e-10

_PAIR_A = ("dx", "dx", "sx", "sx")
_PAIR_B = ("dy", "sy", "dy", "sy")


@dataclass(frozen=True)
class QuadrupleInputs:
    """The four score matrices, with the fixed pairing map

    A(1) = A(2) = dx,  A(3) = A(4) = sx,  B(1) = B(3) = dy,  B(2) = B(4) = sy.
    """

    sx: ScoreMatrix
    dx: ScoreMatrix
    sy: ScoreMatrix
    dy: ScoreMatrix

    def __post_init__(self):
        mats = [self.sx, self.dx, self.sy, self.dy]
        if len({m.n for m in mats}) != 1:
            raise StructuralError("all four score matrices must share one n")
        for name, m in zip(("sx", "dx", "sy", "dy"), mats):
            if not np.array_equal(m.values, m.values.T):
                raise StructuralError(f"{name} must be symmetric; symmetrize it first")

    @property
    def n(self) -> int:
        return self.sx.n

    def a_matrix(self, s: int) -> ScoreMatrix:
        return getattr(self, _PAIR_A[s - 1])

    def b_matrix(self, s: int) -> ScoreMatrix:
        return getattr(self, _PAIR_B[s - 1])


@dataclass(frozen=True)
class NullMoments:
    """Permutation-null mean vector and covariance of the four sums."""

    mu: np.ndarray
    sigma: np.ndarray
    rank: int
    condition_estimate: float


def t_stats(q: QuadrupleInputs) -> np.ndarray:
    """The observed four generalized correlations, in pairing order."""
    return np.array([
        float((q.a_matrix(s).values * q.b_matrix(s).values).sum()) for s in (1, 2, 3, 4)
    ])


def expected_t(A: ScoreMatrix, B: ScoreMatrix) -> float:
    """Null expectation of one sum: (grand sum of A)(grand sum of B) / (n(n-1))."""
    if A.n != B.n:
        raise StructuralError(f"dimension mismatch: {A.n} vs {B.n}")
    n = A.n
    return float(A.values.sum() * B.values.sum()) / (n * (n - 1))


def _cov_from_summaries(a1, a1p, a2, a3, b1, b1p, b2, b3, n: int) -> float:
    da3 = a3 - a1 * a1p / n
    db3 = b3 - b1 * b1p / n
    da2 = a2 - a1 * a1p / (n * (n - 1))
    db2 = b2 - b1 * b1p / (n * (n - 1))
    return (
        4.0 * (n + 1) * da3 * db3 / (n * (n - 1) * (n - 2) * (n - 3))
        + 2.0 * da2 * db2 / (n * (n - 3))
        - 4.0 * da2 * db3 / (n * (n - 2) * (n - 3))
        - 4.0 * da3 * db2 / (n * (n - 2) * (n - 3))
    )


def cov_t(As: ScoreMatrix, As2: ScoreMatrix, Bs: ScoreMatrix, Bs2: ScoreMatrix) -> float:
    """Exact null covariance of the sums paired as (As, Bs) and (As2, Bs2)."""
    ns = {As.n, As2.n, Bs.n, Bs2.n}
    if len(ns) != 1:
        raise StructuralError(f"dimension mismatch among inputs: {sorted(ns)}")
    n = As.n
    if n < 4:
        raise StructuralError(f"covariance needs n >= 4, got n={n}")
    ca = cross_summarize(As, As2)
    cb = cross_summarize(Bs, Bs2)
    return _cov_from_summaries(
        float(As.values.sum()), float(As2.values.sum()), ca.c2, ca.c3,
        float(Bs.values.sum()), float(Bs2.values.sum()), cb.c2, cb.c3, n,
    )


def _spectral_rank(sigma: np.ndarray) -> tuple[int, float, np.ndarray, np.ndarray]:
    eigvals, eigvecs = np.linalg.eigh((sigma + sigma.T) / 2.0)
    lam_max = float(eigvals[-1])
    tol = RANK_TOL * max(lam_max, 0.0)
    kept = eigvals > tol
    rank = int(kept.sum())
    if rank == 0:
        cond = 0.0
    else:
        cond = lam_max / float(eigvals[kept][0])
    return rank, cond, eigvals, eigvecs


def null_moments(q: QuadrupleInputs) -> NullMoments:
    """Mean vector and covariance matrix of (T1..T4) under the null.

    Summaries are computed once per distinct matrix pair; the ten unique
    covariance entries are mirrored into the symmetric 4x4 matrix.
    """
    n = q.n
    if n < 4:
        raise StructuralError(f"null moments need n >= 4, got n={n}")
    A = [q.a_matrix(s) for s in (1, 2, 3, 4)]
    B = [q.b_matrix(s) for s in (1, 2, 3, 4)]
    totals_a = [float(m.values.sum()) for m in A]
    totals_b = [float(m.values.sum()) for m in B]
    mu = np.array([totals_a[s] * totals_b[s] / (n * (n - 1)) for s in range(4)])

    cross_a: dict[tuple[str, str], object] = {}
    cross_b: dict[tuple[str, str], object] = {}

    def cached(cross, mats, names, s, sp):
        key = (names[s], names[sp])
        if key not in cross:
            cross[key] = cross_summarize(mats[s], mats[sp])
        return cross[key]

    sigma = np.empty((4, 4))
    for s in range(4):
        for sp in range(s, 4):
            ca = cached(cross_a, A, _PAIR_A, s, sp)
            cb = cached(cross_b, B, _PAIR_B, s, sp)
            val = _cov_from_summaries(
                totals_a[s], totals_a[sp], ca.c2, ca.c3,
                totals_b[s], totals_b[sp], cb.c2, cb.c3, n,
            )
            sigma[s, sp] = sigma[sp, s] = val
    rank, cond, _, _ = _spectral_rank(sigma)
    return NullMoments(mu=mu, sigma=sigma, rank=rank, condition_estimate=cond)


def brute_force_moments(q: QuadrupleInputs) -> NullMoments:
    """Exact moments by enumerating all n! relabelings of the Y sample.

    Oracle for ``null_moments``; guarded to n <= 8.
    """
    n = q.n
    if n > 8:
        raise ValueError(f"enumeration over {n}! permutations refused (n <= 8)")
    dx, sx = q.dx.values, q.sx.values
    dy, sy = q.dy.values, q.sy.values
    n_perm = math.factorial(n)
    T = np.empty((n_perm, 4))
    for idx, pi in enumerate(itertools.permutations(range(n))):
        p = np.asarray(pi)
        dyp = dy[np.ix_(p, p)]
        syp = sy[np.ix_(p, p)]
        T[idx, 0] = (dx * dyp).sum()
        T[idx, 1] = (dx * syp).sum()
        T[idx, 2] = (sx * dyp).sum()
        T[idx, 3] = (sx * syp).sum()
    mu = T.mean(axis=0)
    dev = T - mu
    sigma = dev.T @ dev / n_perm
    rank, cond, _, _ = _spectral_rank(sigma)
    return NullMoments(mu=mu, sigma=sigma, rank=rank, condition_estimate=cond)


@dataclass(frozen=True)
class DiagnosticsReport:
    """Raw finite-n quantities behind the normality and invertibility theory.

    All summaries are computed on the centered matrices.  ``gram2`` is the
    Gram matrix of the four unit-normalized flattened A-matrices tensored
    with their B counterparts; ``gram3`` the analogue built from row-sum
    vectors.  ``variance_regime_ratio`` compares the entrywise variance
    proxy 2 n^-2 A2 B2 against the row-sum proxy 4 n^-3 A3 B3 per statistic.
    """

    n: int
    c0_plus: dict
    c1_plus: dict
    c2: dict
    c2_plus: dict
    c3: dict
    c3_plus: dict
    gram2: np.ndarray
    gram3: np.ndarray
    gram2_eigenvalues: np.ndarray
    gram3_eigenvalues: np.ndarray
    variance_regime_ratio: dict
    degenerate: tuple

    def to_json_dict(self) -> dict:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return None
            return x

        return {
            "n": self.n,
            "c0_plus": self.c0_plus,
            "c1_plus": self.c1_plus,
            "c2": self.c2,
            "c2_plus": self.c2_plus,
            "c3": self.c3,
            "c3_plus": self.c3_plus,
            "gram2": self.gram2.tolist(),
            "gram3": self.gram3.tolist(),
            "gram2_eigenvalues": self.gram2_eigenvalues.tolist(),
            "gram3_eigenvalues": self.gram3_eigenvalues.tolist(),
            "variance_regime_ratio": {k: clean(v) for k, v in self.variance_regime_ratio.items()},
            "degenerate": list(self.degenerate),
        }


def diagnostics(q: QuadrupleInputs) -> DiagnosticsReport:
    """Summaries, Gram spectra and variance-regime ratios for the inputs."""
    A = [center(q.a_matrix(s)) for s in (1, 2, 3, 4)]
    B = [center(q.b_matrix(s)) for s in (1, 2, 3, 4)]
    sides = {"A": A, "B": B}

    c0_plus: dict = {"A": {}, "B": {}}
    c1_plus: dict = {"A": {}, "B": {}}
    for side, mats in sides.items():
        for s, m in enumerate(mats, start=1):
            absv = np.abs(m.values)
            c0_plus[side][str(s)] = float(absv.max())
            c1_plus[side][str(s)] = float(absv.sum(axis=1).max())

    c2: dict = {"A": {}, "B": {}}
    c2_plus: dict = {"A": {}, "B": {}}
    c3: dict = {"A": {}, "B": {}}
    c3_plus: dict = {"A": {}, "B": {}}
    cross = {"A": {}, "B": {}}
    for side, mats in sides.items():
        for s in range(1, 5):
            for sp in range(s, 5):
                cb = cross_summarize(mats[s - 1], mats[sp - 1])
                cross[side][(s, sp)] = cb
                key = f"{s}{sp}"
                c2[side][key] = cb.c2
                c2_plus[side][key] = cb.c2_plus
                c3[side][key] = cb.c3
                c3_plus[side][key] = cb.c3_plus

    degenerate = []
    for side in ("A", "B"):
        for s in range(1, 5):
            if cross[side][(s, s)].c2 == 0.0:
                degenerate.append(f"{side}{s}: zero entrywise normalizer")
            if cross[side][(s, s)].c3 == 0.0:
                degenerate.append(f"{side}{s}: zero row-sum normalizer")

    def gram(which: str) -> np.ndarray:
        g = np.zeros((4, 4))
        for s in range(1, 5):
            for sp in range(s, 5):
                val = 1.0
                for side in ("A", "B"):
                    num = getattr(cross[side][(s, sp)], which)
                    d1 = getattr(cross[side][(s, s)], which)
                    d2 = getattr(cross[side][(sp, sp)], which)
                    val *= num / math.sqrt(d1 * d2) if d1 > 0 and d2 > 0 else 0.0
                g[s - 1, sp - 1] = g[sp - 1, s - 1] = val
        return g

    gram2 = gram("c2")
    gram3 = gram("c3")
    n = q.n
    ratio = {}
    for s in range(1, 5):
        num = 2.0 * cross["A"][(s, s)].c2 * cross["B"][(s, s)].c2 / n**2
        den = 4.0 * cross["A"][(s, s)].c3 * cross["B"][(s, s)].c3 / n**3
        ratio[str(s)] = num / den if den > 0 else math.inf

    return DiagnosticsReport(
        n=n,
        c0_plus=c0_plus,
        c1_plus=c1_plus,
        c2=c2,
        c2_plus=c2_plus,
        c3=c3,
        c3_plus=c3_plus,
        gram2=gram2,
        gram3=gram3,
        gram2_eigenvalues=np.linalg.eigvalsh(gram2),
        gram3_eigenvalues=np.linalg.eigvalsh(gram3),
        variance_regime_ratio=ratio,
        degenerate=tuple(degenerate),
    )
