import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gitest.errors import DegenerateDataError, StructuralError
from gitest.graphs import (
    FARTHEST,
    NEAREST,
    UndirectedGraph,
    kmst,
    knn_graph,
    pairwise_distances,
    robust_graph,
)
from gitest.matrixcore import DISSIMILARITY, SIMILARITY
from gitest.scores import (
    ScoreConfig,
    adjacency_scores,
    build_scores,
    distance_weight_scores,
    export_csv,
    graph_rank_scores,
    kernel_scores,
    neighbor_layers,
    robust_rank_scores,
)

LINE = np.array([[0.0], [1.0], [3.0], [7.0]])


class TestScoreConfig:
    def test_defaults_describe_headline_method(self):
        cfg = ScoreConfig()
        assert cfg.scheme == "robust_rank"
        assert cfg.graph_family == "robust_knn"
        assert cfg.k == "auto"
        assert cfg.lam == 0.3
        assert cfg.symmetrize

    def test_auto_k_is_sqrt_n(self):
        assert ScoreConfig().resolve_k(4) == 2
        assert ScoreConfig().resolve_k(100) == 10
        assert ScoreConfig().resolve_k(150) == 12

    def test_incompatible_scheme_family(self):
        with pytest.raises(ValueError):
            ScoreConfig(scheme="robust_rank", graph_family="knn")
        with pytest.raises(ValueError):
            ScoreConfig(scheme="graph_rank", graph_family="robust_kfp")

    def test_bad_k(self):
        with pytest.raises(ValueError):
            ScoreConfig(k=0)
        with pytest.raises(ValueError):
            ScoreConfig(k="sqrt")


class TestAdjacency:
    def test_complete_digraph(self):
        D = pairwise_distances(LINE)
        G = knn_graph(D, 3, NEAREST)
        M = adjacency_scores(G)
        assert np.array_equal(M.values, 1.0 - np.eye(4))

    def test_empty_graph(self):
        M = adjacency_scores(UndirectedGraph(4, ()))
        assert np.array_equal(M.values, np.zeros((4, 4)))

    def test_one_nn_hand_example(self):
        G = knn_graph(pairwise_distances(LINE), 1, NEAREST)
        M = adjacency_scores(G)
        expected = np.zeros((4, 4))
        for i, j in [(0, 1), (1, 0), (2, 1), (3, 2)]:
            expected[i, j] = 1.0
        assert np.array_equal(M.values, expected)


class TestDistanceWeight:
    def test_reciprocal_and_raw(self):
        Z = np.array([[0.0], [2.0], [10.0], [20.0]])
        D = pairwise_distances(Z)
        G = knn_graph(D, 1, NEAREST)
        sim = distance_weight_scores(G, D, SIMILARITY)
        dis = distance_weight_scores(G, D, DISSIMILARITY)
        assert sim.values[0, 1] == 0.5
        assert dis.values[0, 1] == 2.0

    def test_zero_distance_similarity_edge_rejected(self):
        Z = np.array([[1.0], [1.0], [5.0], [9.0]])
        D = pairwise_distances(Z)
        G = knn_graph(D, 1, NEAREST)
        with pytest.raises(DegenerateDataError, match="0 and 1"):
            distance_weight_scores(G, D, SIMILARITY)
        # the dissimilarity side tolerates duplicates
        distance_weight_scores(G, D, DISSIMILARITY)


class TestKernel:
    def test_closed_form_values(self):
        sigma_sq = 2.0
        d = math.sqrt(2 * sigma_sq)
        Z = np.array([[0.0], [d], [5 * d], [9 * d]])
        D = pairwise_distances(Z)
        G = knn_graph(D, 1, NEAREST)
        sim = kernel_scores(G, D, SIMILARITY, sigma_sq)
        dis = kernel_scores(G, D, DISSIMILARITY, sigma_sq)
        assert sim.values[0, 1] == pytest.approx(math.exp(-1), rel=1e-12)
        assert dis.values[0, 1] == pytest.approx(math.e, rel=1e-12)

    def test_zero_distance_gives_one(self):
        Z = np.array([[1.0], [1.0], [5.0], [9.0]])
        D = pairwise_distances(Z)
        G = knn_graph(D, 1, NEAREST)
        assert kernel_scores(G, D, SIMILARITY, 1.0).values[0, 1] == 1.0

    def test_rejects_bad_bandwidth(self):
        D = pairwise_distances(LINE)
        G = knn_graph(D, 1, NEAREST)
        with pytest.raises(ValueError):
            kernel_scores(G, D, SIMILARITY, 0.0)

    def test_monotone_in_distance(self, rng):
        Z = rng.standard_normal((12, 3))
        D = pairwise_distances(Z)
        G = knn_graph(D, 11, NEAREST)
        sim = kernel_scores(G, D, SIMILARITY, 1.3)
        dis = kernel_scores(G, D, DISSIMILARITY, 1.3)
        pairs = [(i, j) for i in range(12) for j in range(12) if i != j]
        for a in pairs:
            for b in pairs:
                if D[a] < D[b]:
                    assert sim.values[a] >= sim.values[b]
                    assert dis.values[a] <= dis.values[b]


class TestGraphRank:
    def test_first_layer_gets_k(self):
        D = pairwise_distances(LINE)
        layers = neighbor_layers(D, 3, NEAREST)
        R = graph_rank_scores(layers)
        nearest = knn_graph(D, 1, NEAREST)
        for i in range(4):
            assert R.entries[i, nearest.out_neighbors[i, 0]] == 3

    def test_last_layer_gets_one_and_off_graph_zero(self):
        D = pairwise_distances(LINE)
        R = graph_rank_scores(neighbor_layers(D, 2, NEAREST))
        # k=2 on 4 points: one candidate per row stays off-graph with rank 0
        assert sorted(np.sort(R.entries, axis=1)[:, -2:].ravel().tolist()) == [1, 1, 1, 1, 2, 2, 2, 2]
        assert (R.entries == 0).sum() == 4 + 4  # diagonal + one unranked peer per row

    def test_overlapping_layers_rejected(self):
        D = pairwise_distances(LINE)
        layer = neighbor_layers(D, 1, NEAREST)[0]
        with pytest.raises(StructuralError, match="more than one layer"):
            graph_rank_scores([layer, layer])

    def test_matches_sort_oracle_on_knn_family(self, rng):
        Z = rng.standard_normal((15, 4))
        D = pairwise_distances(Z)
        k = 5
        R = graph_rank_scores(neighbor_layers(D, k, NEAREST))
        for i in range(15):
            order = sorted((j for j in range(15) if j != i), key=lambda j: (D[i, j], j))
            for pos, j in enumerate(order, start=1):
                expected = k - pos + 1 if pos <= k else 0
                assert R.entries[i, j] == expected

    def test_mst_layers_symmetric(self, rng):
        Z = rng.standard_normal((10, 3))
        R = graph_rank_scores(kmst(pairwise_distances(Z), 3, "min"))
        assert np.array_equal(R.entries, R.entries.T)


class TestRobustRank:
    def test_extreme_ranks(self):
        D = pairwise_distances(LINE)
        G = knn_graph(D, 3, NEAREST)
        R = robust_rank_scores(G, D, NEAREST)
        # node 0's neighborhood is {1, 2, 3}: nearest (1) scores k, farthest (3) scores 1
        assert R.entries[0, 1] == 3
        assert R.entries[0, 3] == 1
        rev = robust_rank_scores(G, D, FARTHEST)
        assert rev.entries[0, 1] == 1
        assert rev.entries[0, 3] == 3

    def test_ties_share_top_rank(self):
        Z = np.array([[0.0], [1.0], [-1.0], [9.0]])
        D = pairwise_distances(Z)
        G = knn_graph(D, 2, NEAREST)
        R = robust_rank_scores(G, D, NEAREST)
        # both members of node 0's neighborhood sit at distance 1
        assert R.entries[0, 1] == 2 and R.entries[0, 2] == 2

    def test_no_ties_gives_permutation(self, rng):
        Z = rng.standard_normal((20, 6))
        D = pairwise_distances(Z)
        k = 4
        G = robust_graph(D, k, 0.3, NEAREST)
        R = robust_rank_scores(G, D, NEAREST)
        for i in range(20):
            nonzero = sorted(R.entries[i][R.entries[i] > 0].tolist())
            assert nonzero == list(range(1, k + 1))


class TestBuildScores:
    def test_auto_k_and_symmetry(self, rng):
        Z = rng.standard_normal((16, 3))
        sim, dis = build_scores(Z, ScoreConfig())
        assert sim.symmetric and dis.symmetric
        assert sim.role == SIMILARITY and dis.role == DISSIMILARITY
        assert sim.values.max() <= 4  # k = floor(sqrt(16))

    def test_symmetrized_ranks_are_half_integers(self, rng):
        Z = rng.standard_normal((25, 4))
        sim, dis = build_scores(Z, ScoreConfig())
        for M in (sim.values, dis.values):
            assert np.all(np.abs(M * 2 - np.round(M * 2)) < 1e-12)
            assert M.max() <= 5

    def test_lambda_zero_matches_plain_graph_ranks(self, rng):
        Z = rng.standard_normal((12, 3))
        cfg = ScoreConfig(lam=0.0, symmetrize=False)
        sim, dis = build_scores(Z, cfg)
        D = pairwise_distances(Z)
        k = cfg.resolve_k(12)
        plain_sim = robust_rank_scores(knn_graph(D, k, NEAREST), D, NEAREST)
        plain_dis = robust_rank_scores(knn_graph(D, k, FARTHEST), D, FARTHEST)
        assert np.array_equal(sim.values, plain_sim.entries)
        assert np.array_equal(dis.values, plain_dis.entries)

    @pytest.mark.parametrize("scheme,family", [
        ("adjacency", "knn"),
        ("adjacency", "kmst"),
        ("distance_weight", "robust_knn"),
        ("kernel_weight", "knn"),
        ("graph_rank", "knn"),
        ("graph_rank", "kmst"),
    ])
    def test_all_schemes_produce_valid_pairs(self, scheme, family, rng):
        Z = rng.standard_normal((14, 3))
        sim, dis = build_scores(Z, ScoreConfig(scheme=scheme, graph_family=family))
        assert sim.n == dis.n == 14
        assert np.all(np.diagonal(sim.values) == 0)
        assert np.all(np.diagonal(dis.values) == 0)
        assert sim.symmetric and dis.symmetric

    def test_rejects_tiny_samples(self, rng):
        with pytest.raises(StructuralError):
            build_scores(rng.standard_normal((3, 2)), ScoreConfig())

    def test_minimum_sample_size_works(self, rng):
        sim, dis = build_scores(rng.standard_normal((4, 2)), ScoreConfig())
        assert sim.n == dis.n == 4  # auto k resolves to 2


class TestExportCsv:
    def test_round_trip(self, rng):
        Z = rng.standard_normal((6, 2))
        sim, _ = build_scores(Z, ScoreConfig(k=2))
        text = export_csv(sim)
        lines = text.strip().split("\n")
        assert len(lines) == 6
        parsed = np.array([[float(c) for c in ln.split(",")] for ln in lines])
        assert np.array_equal(parsed, sim.values)
