"""Per-graph embeddings: sampled averages of a graphlet feature map.

A graph's embedding is the mean of phi over s induced k-subgraphs drawn
by a sampler (the sampled k-spectrum when phi is the exact match map).
`exact_spectrum` averages over all C(v, k) subsets instead.  The squared
Euclidean distance between two embeddings estimates the squared MMD
between the samplers' graphlet distributions; `theorem1_bound` gives the
high-probability deviation bound and `run_concentration_trials` checks
it empirically.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .atlas import Atlas, match_index_batch
from .errors import InputError
from .feature_maps import (
    GAUSSIAN,
    GAUSSIAN_EIG,
    MATCH,
    OPU,
    FeatureMapSpec,
    RealizedMap,
    jacobi_eigenvalues,
    realize,
)
from .graphs import Graph, induced_adjacency_batch, induced_codes_batch
from .rng import RngStream, _splitmix64
from .sampling import SamplerSpec, sample_subsets

log = logging.getLogger(__name__)

EXACT_SPECTRUM_GUARD = 10_000_000
_CHUNK = 4096

# eigenvalue cache keyed by (k, packed code); graphlets repeat heavily
_eig_cache: dict = {}


@dataclass
class Embedding:
    values: np.ndarray
    map_hash: str
    sampler_kind: str
    k: int
    s: int
    graph_id: int = -1


def _eigs_for_codes(k: int, code_values: np.ndarray) -> np.ndarray:
    """Sorted eigenvalue vectors for packed codes, shape (n, k); cached."""
    from .graphs import GraphletCode

    uniq, inverse = np.unique(code_values, return_inverse=True)
    table = np.empty((len(uniq), k))
    for i, c in enumerate(uniq.tolist()):
        key = (k, c)
        lam = _eig_cache.get(key)
        if lam is None:
            lam = jacobi_eigenvalues(GraphletCode(k, c).adjacency())
            _eig_cache[key] = lam
        table[i] = lam
    return table[inverse]


def _phi_sum(rmap: RealizedMap, g: Graph, nodes_mat: np.ndarray) -> np.ndarray:
    """Sum of phi over the sampled subsets (single chunk)."""
    spec = rmap.spec
    if spec.kind == MATCH:
        codes = induced_codes_batch(g, nodes_mat)
        idx = match_index_batch(rmap.atlas, codes)
        return np.bincount(idx, minlength=rmap.m).astype(np.float64)
    if spec.kind == GAUSSIAN_EIG:
        codes = induced_codes_batch(g, nodes_mat)
        x = _eigs_for_codes(spec.k, codes)
    else:
        x = induced_adjacency_batch(g, nodes_mat).reshape(len(nodes_mat), -1)
    proj = x @ rmap.weights.T + rmap.biases
    if spec.kind == OPU:
        feats = (np.square(proj.real) + np.square(proj.imag)) / math.sqrt(rmap.m)
    else:
        feats = math.sqrt(2.0 / rmap.m) * np.cos(proj)
    return feats.sum(axis=0)


def gsa_embed(
    g: Graph,
    sampler: SamplerSpec,
    rmap: RealizedMap,
    s: int,
    rng: RngStream,
    graph_id: int = -1,
) -> Embedding:
    """Mean of phi over s sampled induced subgraphs (sample-and-average)."""
    if s < 1:
        raise InputError(f"sample count must be >= 1, got {s}")
    if g.v < sampler.k:
        raise InputError(f"graph has v={g.v} < k={sampler.k} nodes")
    if rmap.spec.k != sampler.k:
        raise InputError(f"map k={rmap.spec.k} != sampler k={sampler.k}")
    acc = np.zeros(rmap.m)
    done = 0
    while done < s:
        n = min(_CHUNK, s - done)
        nodes_mat = sample_subsets(g, sampler, n, rng)
        acc += _phi_sum(rmap, g, nodes_mat)
        done += n
    return Embedding(
        values=acc / s,
        map_hash=rmap.spec_hash,
        sampler_kind=sampler.kind,
        k=sampler.k,
        s=s,
        graph_id=graph_id,
    )


def exact_spectrum(g: Graph, atlas: Atlas, graph_id: int = -1) -> Embedding:
    """Exhaustive class histogram over all C(v, k) induced subgraphs."""
    k = atlas.k
    if g.v < k:
        raise InputError(f"graph has v={g.v} < k={k} nodes")
    total = math.comb(g.v, k)
    if total > EXACT_SPECTRUM_GUARD:
        raise InputError(
            f"C({g.v}, {k}) = {total} exceeds the exact-spectrum guard "
            f"of {EXACT_SPECTRUM_GUARD}"
        )
    counts = np.zeros(len(atlas))
    subs = np.fromiter(
        (n for comb in combinations(range(g.v), k) for n in comb),
        dtype=np.int64,
        count=total * k,
    ).reshape(total, k)
    for lo in range(0, total, _CHUNK):
        chunk = subs[lo : lo + _CHUNK]
        codes = induced_codes_batch(g, chunk)
        idx = match_index_batch(atlas, codes)
        counts += np.bincount(idx, minlength=len(atlas))
    spec = FeatureMapSpec(MATCH, k, len(atlas), seed=0)
    return Embedding(
        values=counts / total,
        map_hash=spec.hash(),
        sampler_kind="exact",
        k=k,
        s=total,
        graph_id=graph_id,
    )


def mmd_sq_estimate(e1: Embedding, e2: Embedding) -> float:
    """Squared Euclidean distance between two same-map embeddings."""
    if e1.map_hash != e2.map_hash:
        raise InputError("embeddings come from different feature maps")
    if e1.values.shape != e2.values.shape:
        raise InputError("embedding length mismatch")
    diff = e1.values - e2.values
    return float(diff @ diff)


def theorem1_bound(m: int, s: int, delta: float, feature_bound: float = 1.0) -> float:
    """High-probability bound on |dist^2 - MMD^2| for bounded features.

    For features with |xi_w| <= 1 the bound is
    4 sqrt(log(6/delta)) / sqrt(m) + 8 (1 + sqrt(2 log(3/delta))) / sqrt(s);
    a general bound B rescales both terms by B^2 (homogeneity of the
    squared distances).
    """
    if m < 1 or s < 1:
        raise InputError("m and s must be >= 1")
    if not 0.0 < delta < 1.0:
        raise InputError(f"delta must be in (0, 1), got {delta}")
    b2 = feature_bound * feature_bound
    term_m = 4.0 * math.sqrt(math.log(6.0 / delta)) / math.sqrt(m)
    term_s = 8.0 * (1.0 + math.sqrt(2.0 * math.log(3.0 / delta))) / math.sqrt(s)
    return b2 * (term_m + term_s)


@dataclass
class ConcentrationReport:
    trials: int
    m: int
    s: int
    delta: float
    feature_bound: float
    bound: float
    mmd_ref: float
    deviations: np.ndarray
    distances: np.ndarray

    @property
    def violation_rate(self) -> float:
        return float(np.mean(self.deviations > self.bound))

    @property
    def median_deviation(self) -> float:
        return float(np.median(self.deviations))


def default_feature_bound(kind: str) -> float:
    """sqrt(2) for cosine features (the sqrt(2) cos normalization), 1 for match.

    OPU features are unbounded; the returned sqrt(2) placeholder keeps the
    bound computable but the theorem does not cover that map.
    """
    if kind == MATCH:
        return 1.0
    return math.sqrt(2.0)


def reference_mmd_sq(
    g1: Graph,
    g2: Graph,
    sampler: SamplerSpec,
    map_spec: FeatureMapSpec,
    s: int,
    rng: RngStream,
    atlas: Atlas | None = None,
    m_ref_factor: int = 16,
    s_ref_factor: int = 16,
) -> float:
    """High-precision MMD^2 reference via oversized m and s.

    Match maps with uniform sampling use exact spectra (zero sampling
    error); other maps use a fresh realization with m_ref = factor * m
    and s_ref = factor * s samples.
    """
    if map_spec.kind == MATCH:
        if atlas is None:
            raise InputError("match reference requires an atlas")
        if sampler.kind == "uniform":
            return mmd_sq_estimate(exact_spectrum(g1, atlas), exact_spectrum(g2, atlas))
        rmap = realize(map_spec, atlas=atlas)
    else:
        ref_spec = replace(
            map_spec,
            m=map_spec.m * m_ref_factor,
            seed=_splitmix64(map_spec.seed ^ 0xA5A5A5A5A5A5A5A5),
        )
        rmap = realize(ref_spec)
    s_ref = s * s_ref_factor
    e1 = gsa_embed(g1, sampler, rmap, s_ref, rng.derive(0))
    e2 = gsa_embed(g2, sampler, rmap, s_ref, rng.derive(1))
    return mmd_sq_estimate(e1, e2)


def run_concentration_trials(
    g1: Graph,
    g2: Graph,
    sampler: SamplerSpec,
    map_spec: FeatureMapSpec,
    s: int,
    delta: float,
    trials: int,
    rng: RngStream,
    atlas: Atlas | None = None,
    feature_bound: float | None = None,
    mmd_ref: float | None = None,
) -> ConcentrationReport:
    """Repeatedly re-realize the map, re-sample, and measure deviations.

    Each trial draws a fresh map realization (fresh seed) and fresh
    samples for both graphs, then records |dist^2 - MMD^2_ref| against
    the theorem bound at (m, s, delta).
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    if feature_bound is None:
        feature_bound = default_feature_bound(map_spec.kind)
    if mmd_ref is None:
        mmd_ref = reference_mmd_sq(
            g1, g2, sampler, map_spec, s, rng.derive(999_983), atlas=atlas,
        )
    bound = theorem1_bound(map_spec.m, s, delta, feature_bound)
    distances = np.empty(trials)
    for t in range(trials):
        if map_spec.kind == MATCH:
            rmap = realize(map_spec, atlas=atlas)
        else:
            rmap = realize(replace(map_spec, seed=_splitmix64(map_spec.seed + t + 1)))
        e1 = gsa_embed(g1, sampler, rmap, s, rng.derive(2 * t))
        e2 = gsa_embed(g2, sampler, rmap, s, rng.derive(2 * t + 1))
        distances[t] = mmd_sq_estimate(e1, e2)
    deviations = np.abs(distances - mmd_ref)
    return ConcentrationReport(
        trials=trials,
        m=map_spec.m,
        s=s,
        delta=delta,
        feature_bound=feature_bound,
        bound=bound,
        mmd_ref=mmd_ref,
        deviations=deviations,
        distances=distances,
    )


def embed_dataset(graphs, sampler: SamplerSpec, rmap: RealizedMap, s: int,
                  base_rng: RngStream):
    """Embed every graph with a per-graph derived stream.

    Graphs with fewer than k nodes are skipped with a warning.  Returns
    (X, kept_indices) where X has one row per kept graph; results do not
    depend on iteration batching because each graph gets stream
    base_rng.derive(graph index).
    """
    rows = []
    kept = []
    skipped = 0
    for i, g in enumerate(graphs):
        if g.v < sampler.k:
            skipped += 1
            continue
        emb = gsa_embed(g, sampler, rmap, s, base_rng.derive(i), graph_id=i)
        rows.append(emb.values)
        kept.append(i)
    if skipped:
        log.warning("skipped %d graphs with fewer than k=%d nodes", skipped, sampler.k)
    if not rows:
        raise InputError(f"no graph has at least k={sampler.k} nodes")
    return np.vstack(rows), kept


def write_embeddings(path, graph_ids, labels, X, meta: dict) -> None:
    """CSV with 17-significant-digit values plus a key=value sidecar."""
    import os

    X = np.atleast_2d(X)
    header = "graph_id,label," + ",".join(f"f_{j}" for j in range(X.shape[1]))
    tmp = str(path) + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(header + "\n")
        for gid, label, row in zip(graph_ids, labels, X):
            fh.write(f"{gid},{label}," + ",".join(f"{v:.17g}" for v in row) + "\n")
    os.replace(tmp, path)
    meta_lines = [f"{k}={v}" for k, v in meta.items()]
    with open(str(path) + ".meta.tmp", "w") as fh:
        fh.write("\n".join(meta_lines) + "\n")
    os.replace(str(path) + ".meta.tmp", str(path) + ".meta")


def read_embeddings(path):
    """Returns (graph_ids, labels, X, meta)."""
    import os

    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("graph_id,label,"):
            raise InputError(f"{path}: unexpected embedding header")
        gids, labels, rows = [], [], []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            gids.append(int(parts[0]))
            labels.append(int(parts[1]))
            rows.append([float(v) for v in parts[2:]])
    meta = {}
    meta_path = str(path) + ".meta"
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    key, _, val = line.partition("=")
                    meta[key] = val
    return gids, labels, np.array(rows), meta
