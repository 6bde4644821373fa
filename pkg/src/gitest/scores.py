"""Score-matrix constructions on neighbor graphs.

Five weighting schemes over three graph family pairs (plain neighbor graphs,
spanning-tree layers, robust neighbor graphs).  The headline configuration is
the default ScoreConfig: symmetrized within-neighborhood ranks on the robust
k-NN graph (similarity side) and robust k-farthest-point graph (dissimilarity
side), k = floor(sqrt(n)), hub penalty 0.3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, StructuralError
from .graphs import (
    Digraph,
    FARTHEST,
    NEAREST,
    UndirectedGraph,
    _neighbor_order,
    check_distance_matrix,
    kmst,
    knn_graph,
    pairwise_distances,
    robust_graph,
)
from .matrixcore import DISSIMILARITY, SIMILARITY, ScoreMatrix, symmetrize

SCHEMES = ("adjacency", "distance_weight", "kernel_weight", "graph_rank", "robust_rank")
FAMILIES = ("knn", "kfp", "kmst", "kmaxst", "robust_knn", "robust_kfp")

# each family names its (similarity graph, dissimilarity graph) pair
_FAMILY_PAIR = {
    "knn": ("knn", "kfp"),
    "kfp": ("knn", "kfp"),
    "kmst": ("kmst", "kmaxst"),
    "kmaxst": ("kmst", "kmaxst"),
    "robust_knn": ("robust_knn", "robust_kfp"),
    "robust_kfp": ("robust_knn", "robust_kfp"),
}


@dataclass(frozen=True)
class ScoreConfig:
    """How to turn a sample into similarity and dissimilarity scores.

    k may be an explicit neighbor count or "auto" for floor(sqrt(n)).
    ``lam`` is the hub penalty of the robust graphs.  ``kernel_bandwidths``
    are the squared bandwidths (similarity, dissimilarity) of the kernel
    scheme; when None a median heuristic over the graph edges is used.
    """

    scheme: str = "robust_rank"
    graph_family: str = "robust_knn"
    k: int | str = "auto"
    lam: float = 0.3
    kernel_bandwidths: tuple[float, float] | None = None
    symmetrize: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if self.graph_family not in FAMILIES:
            raise ValueError(f"unknown graph family {self.graph_family!r}")
        pair = _FAMILY_PAIR[self.graph_family]
        if self.scheme == "robust_rank" and pair[0] != "robust_knn":
            raise ValueError("robust_rank scores require the robust_knn/robust_kfp family")
        if self.scheme == "graph_rank" and pair[0] not in ("knn", "kmst"):
            raise ValueError("graph_rank scores require the knn/kfp or kmst/kmaxst family")
        if self.k != "auto" and (not isinstance(self.k, int) or self.k < 1):
            raise ValueError(f"k must be 'auto' or a positive integer, got {self.k!r}")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.kernel_bandwidths is not None:
            s, d = self.kernel_bandwidths
            if s <= 0 or d <= 0:
                raise ValueError("kernel bandwidths must be positive")

    def resolve_k(self, n: int) -> int:
        k = int(math.isqrt(n)) if self.k == "auto" else self.k
        if not 1 <= k <= n - 1:
            raise ValueError(f"k={k} out of range [1, {n - 1}]")
        return k


@dataclass(frozen=True)
class RankMatrix:
    """Nonnegative rank weights supported on graph edges; zero diagonal."""

    entries: np.ndarray
    max_rank: int

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if np.any(np.diagonal(e) != 0) or e.min() < 0 or e.max() > self.max_rank:
            raise StructuralError("rank entries must lie in [0, max_rank] with a zero diagonal")
        object.__setattr__(self, "entries", e)

    def to_score_matrix(self, role: str) -> ScoreMatrix:
        return ScoreMatrix(self.entries, role, bool(np.array_equal(self.entries, self.entries.T)))


def _directed_cells(G) -> list[tuple[int, int]]:
    """Cells a graph writes: out-edges for digraphs, both cells for undirected."""
    if isinstance(G, Digraph):
        return [(i, int(j)) for i in range(G.n) for j in G.out_neighbors[i]]
    if isinstance(G, UndirectedGraph):
        return [c for i, j in G.edges for c in ((i, j), (j, i))]
    raise TypeError(f"unsupported graph type {type(G).__name__}")


def adjacency_scores(G, role: str = SIMILARITY) -> ScoreMatrix:
    """0/1 matrix marking graph edges."""
    M = np.zeros((G.n, G.n))
    for i, j in _directed_cells(G):
        M[i, j] = 1.0
    return ScoreMatrix(M, role, bool(np.array_equal(M, M.T)))


def distance_weight_scores(G, D, role: str) -> ScoreMatrix:
    """Reciprocal distances on similarity edges, raw distances on dissimilarity edges."""
    D = check_distance_matrix(D)
    M = np.zeros((G.n, G.n))
    for i, j in _directed_cells(G):
        d = D[i, j]
        if role == SIMILARITY:
            if d == 0.0:
                raise DegenerateDataError(
                    f"zero distance between observations {i} and {j} on a similarity edge"
                )
            M[i, j] = 1.0 / d
        else:
            M[i, j] = d
    return ScoreMatrix(M, role, bool(np.array_equal(M, M.T)))


def kernel_scores(G, D, role: str, bandwidth: float) -> ScoreMatrix:
    """Gaussian kernel weights: decaying on similarity edges, growing on
    dissimilarity edges.  ``bandwidth`` is the squared scale."""
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    D = check_distance_matrix(D)
    sign = -1.0 if role == SIMILARITY else 1.0
    M = np.zeros((G.n, G.n))
    for i, j in _directed_cells(G):
        M[i, j] = math.exp(sign * D[i, j] ** 2 / (2.0 * bandwidth))
    return ScoreMatrix(M, role, bool(np.array_equal(M, M.T)))


def neighbor_layers(D, k: int, direction: str = NEAREST) -> list[Digraph]:
    """Layer l connects each node to its l-th nearest (or farthest) peer."""
    D = check_distance_matrix(D)
    n = D.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} out of range [1, {n - 1}]")
    order = _neighbor_order(D, direction)
    return [Digraph(n, 1, order[:, l : l + 1]) for l in range(k)]


def graph_rank_scores(layers) -> RankMatrix:
    """Rank weights from edge-disjoint graph layers.

    With k layers, an edge first appearing in layer l is contained in the
    cumulative unions l..k and scores k - l + 1; heavier weight goes to
    earlier (more similar) layers.  Overlapping layers are rejected.
    """
    layers = list(layers)
    if not layers:
        raise StructuralError("at least one layer required")
    k = len(layers)
    n = layers[0].n
    M = np.zeros((n, n))
    for l, layer in enumerate(layers, start=1):
        if layer.n != n:
            raise StructuralError("layers disagree on node count")
        for i, j in _directed_cells(layer):
            if M[i, j] != 0.0:
                raise StructuralError(f"edge ({i},{j}) appears in more than one layer")
            M[i, j] = k - l + 1
    return RankMatrix(M, k)


def robust_rank_scores(G: Digraph, D, direction: str = NEAREST) -> RankMatrix:
    """Within-neighborhood ranks on a robust graph's edges.

    For the nearest direction the closest out-neighbor of a node scores k and
    the farthest scores 1; reversed for the farthest direction.  Ties share
    the larger rank.
    """
    D = check_distance_matrix(D)
    sign = 1.0 if direction == NEAREST else -1.0
    M = np.zeros((G.n, G.n))
    for i in range(G.n):
        nb = G.out_neighbors[i]
        v = sign * D[i, nb]
        M[i, nb] = (v[:, None] <= v[None, :]).sum(axis=1)
    return RankMatrix(M, G.k)


def _median_sq_bandwidths(D: np.ndarray, gs, gd) -> tuple[float, float]:
    """Median squared edge distance per graph; overall median as fallback."""
    def med(G):
        cells = _directed_cells(G)
        if not cells:
            iu, ju = np.triu_indices(D.shape[0], 1)
            return float(np.median(D[iu, ju] ** 2))
        return float(np.median([D[i, j] ** 2 for i, j in cells]))

    return med(gs), med(gd)


def build_scores(Z, cfg: ScoreConfig = ScoreConfig()) -> tuple[ScoreMatrix, ScoreMatrix]:
    """Full pipeline: distances, graph pair, weights, optional symmetrization.

    Returns the (similarity, dissimilarity) score matrices for one sample.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] < 4:
        raise StructuralError("need a 2-D sample with at least 4 observations")
    D = pairwise_distances(Z)
    n = Z.shape[0]
    k = cfg.resolve_k(n)
    sim_family, _ = _FAMILY_PAIR[cfg.graph_family]

    if cfg.scheme == "robust_rank":
        gs = robust_graph(D, k, cfg.lam, NEAREST)
        gd = robust_graph(D, k, cfg.lam, FARTHEST)
        sim = robust_rank_scores(gs, D, NEAREST).to_score_matrix(SIMILARITY)
        dis = robust_rank_scores(gd, D, FARTHEST).to_score_matrix(DISSIMILARITY)
    elif cfg.scheme == "graph_rank":
        if sim_family == "knn":
            sim_layers = neighbor_layers(D, k, NEAREST)
            dis_layers = neighbor_layers(D, k, FARTHEST)
        else:
            sim_layers = kmst(D, k, "min")
            dis_layers = kmst(D, k, "max")
        sim = graph_rank_scores(sim_layers).to_score_matrix(SIMILARITY)
        dis = graph_rank_scores(dis_layers).to_score_matrix(DISSIMILARITY)
    else:
        if sim_family == "knn":
            gs = knn_graph(D, k, NEAREST)
            gd = knn_graph(D, k, FARTHEST)
        elif sim_family == "kmst":
            gs = _union_graph(kmst(D, k, "min"))
            gd = _union_graph(kmst(D, k, "max"))
        else:
            gs = robust_graph(D, k, cfg.lam, NEAREST)
            gd = robust_graph(D, k, cfg.lam, FARTHEST)
        if cfg.scheme == "adjacency":
            sim = adjacency_scores(gs, SIMILARITY)
            dis = adjacency_scores(gd, DISSIMILARITY)
        elif cfg.scheme == "distance_weight":
            sim = distance_weight_scores(gs, D, SIMILARITY)
            dis = distance_weight_scores(gd, D, DISSIMILARITY)
        else:
            bw = cfg.kernel_bandwidths or _median_sq_bandwidths(D, gs, gd)
            sim = kernel_scores(gs, D, SIMILARITY, bw[0])
            dis = kernel_scores(gd, D, DISSIMILARITY, bw[1])

    if cfg.symmetrize:
        sim, dis = symmetrize(sim), symmetrize(dis)
    return sim, dis


def _union_graph(layers: list[UndirectedGraph]) -> UndirectedGraph:
    edges: list[tuple[int, int]] = []
    for layer in layers:
        edges.extend(layer.edges)
    return UndirectedGraph(layers[0].n, tuple(edges))


def export_csv(M) -> str:
    """Matrix as n lines of n comma-separated decimal values, no header."""
    v = M.values if isinstance(M, ScoreMatrix) else np.asarray(M, dtype=np.float64)
    return "\n".join(",".join(f"{x:.17g}" for x in row) for row in v) + "\n"
