import numpy as np
import pytest
from sklearn.base import clone

from graphlet_rf import (
    GraphletClassifier,
    GraphletEmbedder,
    HingeClassifier,
    InputError,
    SbmSpec,
    generate_sbm,
)


def toy_dataset():
    spec = SbmSpec(n_graphs=12, v=24, communities=6, expected_degree=8.0, seed=0)
    ds = generate_sbm(spec)
    return ds.graphs, ds.labels


class TestGraphletEmbedder:
    def test_get_params_and_clone(self):
        emb = GraphletEmbedder(map_kind="gaussian", k=3, m=16, s=10, seed=2)
        params = emb.get_params()
        assert params["map_kind"] == "gaussian" and params["m"] == 16
        emb2 = clone(emb)
        assert emb2.get_params() == params

    def test_fit_transform_shape(self):
        graphs, _ = toy_dataset()
        emb = GraphletEmbedder(map_kind="opu", k=3, m=16, s=25, seed=0)
        X = emb.fit_transform(graphs)
        assert X.shape == (len(graphs), 16)

    def test_match_dimension_is_atlas_size(self, tmp_path):
        graphs, _ = toy_dataset()
        emb = GraphletEmbedder(map_kind="match", k=3, s=25,
                               atlas_cache_dir=tmp_path)
        X = emb.fit_transform(graphs)
        assert X.shape[1] == 4
        assert np.allclose(X.sum(axis=1), 1.0)

    def test_transform_before_fit(self):
        graphs, _ = toy_dataset()
        with pytest.raises(InputError):
            GraphletEmbedder().transform(graphs)

    def test_deterministic(self):
        graphs, _ = toy_dataset()
        emb = GraphletEmbedder(map_kind="gaussian", k=3, m=8, s=20, seed=1)
        a = emb.fit_transform(graphs)
        b = clone(emb).fit_transform(graphs)
        assert np.array_equal(a, b)


class TestHingeClassifier:
    def test_fit_predict_score(self):
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(size=(20, 3)) - 3, rng.normal(size=(20, 3)) + 3])
        y = [-1] * 20 + [1] * 20
        clf = HingeClassifier().fit(X, y)
        assert clf.score(X, y) == 1.0
        assert set(clf.predict(X)) <= {-1, 1}
        assert np.array_equal(clf.classes_, [-1, 1])

    def test_clone_params(self):
        clf = HingeClassifier(lam=0.5, epochs=7, seed=9)
        assert clone(clf).get_params() == clf.get_params()


class TestGraphletClassifier:
    def test_end_to_end(self):
        graphs, labels = toy_dataset()
        clf = GraphletClassifier(map_kind="opu", k=3, m=32, s=50, seed=0)
        clf.fit(graphs, labels)
        preds = clf.predict(graphs)
        assert len(preds) == len(graphs)
        assert 0.0 <= clf.score(graphs, labels) <= 1.0

    def test_clone_compatible(self):
        clf = GraphletClassifier(k=4, m=10, s=5)
        assert clone(clf).get_params() == clf.get_params()
