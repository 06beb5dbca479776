import math
from itertools import combinations

import numpy as np
import pytest

from graphlet_rf import (
    FeatureMapSpec,
    InputError,
    RngStream,
    SamplerSpec,
    build_atlas,
    canonical_code,
    exact_spectrum,
    from_edge_list,
    gsa_embed,
    induced_subgraph,
    mmd_sq_estimate,
    permute_graph,
    realize,
    run_concentration_trials,
    theorem1_bound,
)
from graphlet_rf.embedding import embed_dataset, read_embeddings, write_embeddings
from graphlet_rf.graphs import Graph, GraphletCode


def random_graph(v, p, seed):
    rng = np.random.default_rng(seed)
    adj = np.triu(rng.random((v, v)) < p, 1)
    return Graph(v, adj | adj.T)


K4 = from_edge_list(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
STAR3 = from_edge_list(4, [(0, 1), (0, 2), (0, 3)])


class TestGsaEmbed:
    def test_k4_always_triangle(self):
        atlas = build_atlas(3)
        rm = realize(FeatureMapSpec("match", 3, 4), atlas=atlas)
        emb = gsa_embed(K4, SamplerSpec("uniform", 3), rm, 50, RngStream(0, 0))
        expected = np.zeros(4)
        expected[3] = 1.0
        assert np.array_equal(emb.values, expected)

    def test_s1_equals_single_phi(self):
        rm = realize(FeatureMapSpec("opu", 3, 8, seed=1))
        rng = RngStream(5, 0)
        emb = gsa_embed(STAR3, SamplerSpec("uniform", 3), rm, 1, rng)
        rng2 = RngStream(5, 0)
        from graphlet_rf.sampling import sample_subsets
        from graphlet_rf import phi_opu_sim

        nodes = sample_subsets(STAR3, SamplerSpec("uniform", 3), 1, rng2)[0]
        code = induced_subgraph(STAR3, nodes)
        assert np.allclose(emb.values, phi_opu_sim(rm, code))

    def test_star_histogram_converges(self):
        atlas = build_atlas(3)
        rm = realize(FeatureMapSpec("match", 3, 4), atlas=atlas)
        emb = gsa_embed(STAR3, SamplerSpec("uniform", 3), rm, 20000, RngStream(1, 0))
        assert np.all(np.abs(emb.values - [0.25, 0.0, 0.75, 0.0]) < 0.02)

    def test_histogram_sums_to_one(self):
        atlas = build_atlas(4)
        rm = realize(FeatureMapSpec("match", 4, 11), atlas=atlas)
        g = random_graph(15, 0.3, 2)
        emb = gsa_embed(g, SamplerSpec("uniform", 4), rm, 777, RngStream(2, 0))
        assert emb.values.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(emb.values >= 0)

    def test_deterministic(self):
        rm = realize(FeatureMapSpec("gaussian", 3, 32, seed=3))
        g = random_graph(12, 0.4, 3)
        a = gsa_embed(g, SamplerSpec("uniform", 3), rm, 100, RngStream(7, 1))
        b = gsa_embed(g, SamplerSpec("uniform", 3), rm, 100, RngStream(7, 1))
        assert np.array_equal(a.values, b.values)

    def test_too_small_graph(self):
        rm = realize(FeatureMapSpec("opu", 5, 8, seed=0))
        with pytest.raises(InputError):
            gsa_embed(STAR3, SamplerSpec("uniform", 5), rm, 10, RngStream(0, 0))


class TestExactSpectrum:
    def test_k3_triangle(self):
        atlas = build_atlas(3)
        tri = from_edge_list(3, [(0, 1), (1, 2), (0, 2)])
        assert exact_spectrum(tri, atlas).values.tolist() == [0, 0, 0, 1]

    def test_star(self):
        atlas = build_atlas(3)
        assert exact_spectrum(STAR3, atlas).values.tolist() == [0.25, 0, 0.75, 0]

    def test_sums_to_one(self):
        atlas = build_atlas(4)
        g = random_graph(14, 0.35, 4)
        assert exact_spectrum(g, atlas).values.sum() == pytest.approx(1.0, abs=1e-12)

    def test_guard(self):
        atlas = build_atlas(8)
        g = random_graph(120, 0.1, 5)
        with pytest.raises(InputError, match="exceeds"):
            exact_spectrum(g, atlas)

    def test_permutation_invariance(self):
        atlas = build_atlas(4)
        rng = np.random.default_rng(6)
        for _ in range(5):
            g = random_graph(11, 0.4, int(rng.integers(1e6)))
            perm = rng.permutation(g.v)
            a = exact_spectrum(g, atlas).values
            b = exact_spectrum(permute_graph(g, perm), atlas).values
            assert np.array_equal(a, b)

    @pytest.mark.parametrize("k", [3, 4])
    def test_folding_consistency(self, k):
        # double bookkeeping: average labeled-code indicators, then fold
        # through canonical classes; must equal the exact class histogram
        atlas = build_atlas(k)
        g = random_graph(10, 0.45, 7)
        labeled: dict = {}
        total = 0
        for nodes in combinations(range(g.v), k):
            code = induced_subgraph(g, nodes)
            labeled[code.bits] = labeled.get(code.bits, 0) + 1
            total += 1
        folded = np.zeros(len(atlas))
        for bits, count in labeled.items():
            canon = canonical_code(GraphletCode(k, bits))
            folded[atlas._index[canon.bits]] += count / total
        assert np.allclose(folded, exact_spectrum(g, atlas).values, atol=1e-12)


class TestMmd:
    def test_identical_embeddings(self):
        atlas = build_atlas(3)
        e = exact_spectrum(STAR3, atlas)
        assert mmd_sq_estimate(e, e) == 0.0

    def test_permuted_copy_exact_match_is_zero(self):
        atlas = build_atlas(4)
        rng = np.random.default_rng(8)
        for _ in range(5):
            g = random_graph(12, 0.3, int(rng.integers(1e6)))
            gp = permute_graph(g, rng.permutation(g.v))
            assert mmd_sq_estimate(exact_spectrum(g, atlas), exact_spectrum(gp, atlas)) == 0.0

    def test_metric_axioms(self):
        atlas = build_atlas(3)
        e1 = exact_spectrum(STAR3, atlas)
        e2 = exact_spectrum(K4, atlas)
        assert mmd_sq_estimate(e1, e2) >= 0
        assert mmd_sq_estimate(e1, e2) == mmd_sq_estimate(e2, e1)

    def test_spec_mismatch(self):
        a3 = build_atlas(3)
        rm = realize(FeatureMapSpec("opu", 3, 4, seed=0))
        e1 = exact_spectrum(K4, a3)
        e2 = gsa_embed(K4, SamplerSpec("uniform", 3), rm, 5, RngStream(0, 0))
        with pytest.raises(InputError):
            mmd_sq_estimate(e1, e2)


class TestTheorem1Bound:
    def test_vanishes(self):
        assert theorem1_bound(10**12, 10**12, 0.05) < 1e-4

    def test_scaling(self):
        # quadrupling m = s halves the bound
        b1 = theorem1_bound(10000, 10000, 0.05)
        b4 = theorem1_bound(40000, 40000, 0.05)
        assert b1 / b4 == pytest.approx(2.0)

    def test_regression_value(self):
        assert theorem1_bound(10000, 10000, 0.05) == pytest.approx(
            0.39644843579932737, rel=1e-12
        )

    def test_feature_bound_scaling(self):
        assert theorem1_bound(100, 100, 0.1, feature_bound=math.sqrt(2)) == pytest.approx(
            2 * theorem1_bound(100, 100, 0.1)
        )

    def test_validation(self):
        with pytest.raises(InputError):
            theorem1_bound(10, 10, 0.0)
        with pytest.raises(InputError):
            theorem1_bound(0, 10, 0.1)


class TestConcentration:
    def test_match_small(self):
        # identical graphs: reference MMD is 0, deviations are the raw distances
        atlas = build_atlas(3)
        g = random_graph(12, 0.4, 9)
        spec = FeatureMapSpec("match", 3, 4, seed=0)
        report = run_concentration_trials(
            g, g, SamplerSpec("uniform", 3), spec, s=400, delta=0.1, trials=20,
            rng=RngStream(3, 0), atlas=atlas,
        )
        assert report.mmd_ref == 0.0
        assert np.array_equal(report.deviations, report.distances)
        assert report.violation_rate <= 0.1

    def test_gaussian_coverage_small(self):
        g1 = random_graph(15, 0.3, 10)
        g2 = random_graph(15, 0.5, 11)
        spec = FeatureMapSpec("gaussian", 3, 256, sigma2=0.01, seed=0)
        report = run_concentration_trials(
            g1, g2, SamplerSpec("uniform", 3), spec, s=256, delta=0.1, trials=30,
            rng=RngStream(4, 0),
        )
        assert report.feature_bound == pytest.approx(math.sqrt(2))
        assert report.violation_rate <= 0.1  # bound is loose; should be far below


class TestDatasetEmbedding:
    def test_skips_small_graphs(self):
        graphs = [random_graph(10, 0.3, 1), from_edge_list(3, [(0, 1)]),
                  random_graph(9, 0.3, 2)]
        rm = realize(FeatureMapSpec("opu", 5, 8, seed=0))
        X, kept = embed_dataset(graphs, SamplerSpec("uniform", 5), rm, 10, RngStream(0, 0))
        assert kept == [0, 2]
        assert X.shape == (2, 8)

    def test_independent_of_order(self):
        graphs = [random_graph(10, 0.3, i) for i in range(4)]
        rm = realize(FeatureMapSpec("gaussian", 3, 16, seed=0))
        X, _ = embed_dataset(graphs, SamplerSpec("uniform", 3), rm, 20, RngStream(1, 0))
        X2, _ = embed_dataset(graphs[:2], SamplerSpec("uniform", 3), rm, 20, RngStream(1, 0))
        assert np.array_equal(X[:2], X2)

    def test_csv_roundtrip(self, tmp_path):
        X = np.random.default_rng(0).normal(size=(3, 5))
        path = tmp_path / "emb.csv"
        write_embeddings(path, [0, 1, 2], [-1, 1, -1], X, {"map": "opu", "s": 10})
        gids, labels, X2, meta = read_embeddings(path)
        assert gids == [0, 1, 2]
        assert labels == [-1, 1, -1]
        assert np.array_equal(X, X2)  # 17 significant digits round-trips float64
        assert meta["map"] == "opu"
        assert meta["s"] == "10"
