"""Scikit-learn style wrappers around the functional core.

`GraphletEmbedder` is a transformer from lists of `Graph` objects to
embedding matrices; `HingeClassifier` is an estimator over embedding
vectors; `GraphletClassifier` chains the two for graph-in, label-out
use.  All three follow the fit/transform/predict and get_params
conventions so they compose with sklearn pipelines and model selection.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from . import classifier as _clf
from .atlas import load_or_build_atlas
from .embedding import embed_dataset
from .errors import InputError
from .feature_maps import MATCH, FeatureMapSpec, realize
from .rng import RngStream
from .sampling import SamplerSpec


class GraphletEmbedder(BaseEstimator, TransformerMixin):
    """Transform graphs into sampled graphlet-feature averages."""

    def __init__(self, map_kind="opu", k=5, m=2000, sigma2=0.01, sampler="uniform",
                 s=500, seed=0, atlas_cache_dir=None):
        self.map_kind = map_kind
        self.k = k
        self.m = m
        self.sigma2 = sigma2
        self.sampler = sampler
        self.s = s
        self.seed = seed
        self.atlas_cache_dir = atlas_cache_dir

    def fit(self, X, y=None):
        atlas = None
        m = self.m
        if self.map_kind == MATCH:
            atlas = load_or_build_atlas(self.k, self.atlas_cache_dir)
            m = len(atlas)
        spec = FeatureMapSpec(self.map_kind, self.k, m, sigma2=self.sigma2,
                              seed=self.seed)
        self.map_ = realize(spec, atlas=atlas)
        self.sampler_spec_ = SamplerSpec(kind=self.sampler, k=self.k)
        return self

    def transform(self, X):
        if not hasattr(self, "map_"):
            raise InputError("GraphletEmbedder is not fitted")
        rng = RngStream(self.seed, stream=1)
        emb, kept = embed_dataset(X, self.sampler_spec_, self.map_, self.s, rng)
        if len(kept) != len(X):
            raise InputError(
                f"{len(X) - len(kept)} graphs have fewer than k={self.k} nodes"
            )
        return emb


class HingeClassifier(BaseEstimator, ClassifierMixin):
    """Linear hinge-loss classifier on embedding vectors."""

    def __init__(self, lam=None, epochs=50, seed=0, standardize=True):
        self.lam = lam
        self.epochs = epochs
        self.seed = seed
        self.standardize = standardize

    def fit(self, X, y):
        config = _clf.TrainConfig(lam=self.lam, epochs=self.epochs, seed=self.seed,
                                  standardize=self.standardize)
        self.model_ = _clf.train(np.asarray(X), list(y), config)
        self.classes_ = np.array(self.model_.classes)
        return self

    def decision_function(self, X):
        return self.model_.decision_function(np.atleast_2d(X))

    def predict(self, X):
        return np.array(_clf.predict(self.model_, np.atleast_2d(X)))

    def score(self, X, y):
        return _clf.evaluate(self.model_, np.atleast_2d(X), list(y))


class GraphletClassifier(BaseEstimator, ClassifierMixin):
    """End-to-end pipeline: graphs -> embeddings -> linear classifier."""

    def __init__(self, map_kind="opu", k=5, m=2000, sigma2=0.01, sampler="uniform",
                 s=500, seed=0, lam=None, epochs=50, atlas_cache_dir=None):
        self.map_kind = map_kind
        self.k = k
        self.m = m
        self.sigma2 = sigma2
        self.sampler = sampler
        self.s = s
        self.seed = seed
        self.lam = lam
        self.epochs = epochs
        self.atlas_cache_dir = atlas_cache_dir

    def fit(self, X, y):
        self.embedder_ = GraphletEmbedder(
            map_kind=self.map_kind, k=self.k, m=self.m, sigma2=self.sigma2,
            sampler=self.sampler, s=self.s, seed=self.seed,
            atlas_cache_dir=self.atlas_cache_dir,
        ).fit(X)
        emb = self.embedder_.transform(X)
        self.head_ = HingeClassifier(lam=self.lam, epochs=self.epochs,
                                     seed=self.seed).fit(emb, y)
        self.classes_ = self.head_.classes_
        return self

    def predict(self, X):
        return self.head_.predict(self.embedder_.transform(X))

    def score(self, X, y):
        return self.head_.score(self.embedder_.transform(X), y)
