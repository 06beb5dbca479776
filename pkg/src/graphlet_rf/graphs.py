"""Graphs and bit-packed small-subgraph codes.

A :class:`Graph` is an unlabeled, undirected, simple graph stored both as
a boolean adjacency matrix (O(1) pair lookup) and per-node neighbor
arrays (O(deg) iteration).  Induced subgraphs of size k <= 8 are packed
into a single integer: bit ``i*k - i*(i+1)/2 + (j - i - 1)`` holds the
adjacency of the node pair (i, j), i < j, in the order the nodes were
listed.  Both types are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InputError

MAX_K = 8


def n_pair_bits(k: int) -> int:
    return k * (k - 1) // 2


@lru_cache(maxsize=None)
def pair_positions(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column indices (i, j), i < j, ordered by packed bit position."""
    iu = np.triu_indices(k, 1)
    return iu[0].copy(), iu[1].copy()


@lru_cache(maxsize=None)
def bit_weights(k: int) -> np.ndarray:
    """Power-of-two weight of each packed bit position, as float64 (exact)."""
    return (2.0 ** np.arange(n_pair_bits(k))).astype(np.float64)


@dataclass(frozen=True)
class GraphletCode:
    """Bit-packed upper-triangular adjacency of a k-node subgraph, k <= 8."""

    k: int
    bits: int

    def __post_init__(self):
        if not 2 <= self.k <= MAX_K:
            raise InputError(f"graphlet size must be in [2, {MAX_K}], got {self.k}")
        if self.bits >> n_pair_bits(self.k):
            raise InputError(f"code 0x{self.bits:x} has bits beyond k={self.k} capacity")

    def adjacency(self) -> np.ndarray:
        """Full symmetric k x k 0/1 adjacency matrix (float64)."""
        k = self.k
        a = np.zeros((k, k))
        rows, cols = pair_positions(k)
        vals = (self.bits >> np.arange(n_pair_bits(k))) & 1
        a[rows, cols] = vals
        a[cols, rows] = vals
        return a

    def bit_vector(self) -> np.ndarray:
        """Packed bits as a 0/1 uint8 vector, position order."""
        return ((self.bits >> np.arange(n_pair_bits(self.k))) & 1).astype(np.uint8)

    @property
    def n_edges(self) -> int:
        return int(self.bits).bit_count()


def code_from_adjacency(a: np.ndarray) -> GraphletCode:
    """Pack a symmetric k x k 0/1 matrix into a GraphletCode."""
    k = a.shape[0]
    rows, cols = pair_positions(k)
    bits = 0
    for pos, (i, j) in enumerate(zip(rows, cols)):
        if a[i, j]:
            bits |= 1 << pos
    return GraphletCode(k, bits)


class Graph:
    """Immutable simple undirected graph on nodes 0..v-1."""

    __slots__ = ("v", "adj", "neighbors", "degrees", "n_edges")

    def __init__(self, v: int, adj: np.ndarray):
        if v <= 0:
            raise InputError(f"node count must be positive, got {v}")
        adj = np.asarray(adj, dtype=bool)
        if adj.shape != (v, v):
            raise InputError(f"adjacency shape {adj.shape} does not match v={v}")
        if np.any(np.diagonal(adj)):
            raise InputError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise InputError("adjacency must be symmetric")
        self.v = v
        self.adj = adj
        self.adj.setflags(write=False)
        self.neighbors = [np.flatnonzero(adj[i]) for i in range(v)]
        self.degrees = adj.sum(axis=1).astype(np.int64)
        self.n_edges = int(self.degrees.sum()) // 2

    def __repr__(self) -> str:
        return f"Graph(v={self.v}, edges={self.n_edges})"

    def edge_list(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(np.triu(self.adj, 1))
        return list(zip(rows.tolist(), cols.tolist()))


def from_edge_list(v: int, edges) -> Graph:
    """Build a Graph from (u, w) pairs; duplicates collapse, loops are errors."""
    adj = np.zeros((v, v), dtype=bool)
    for u, w in edges:
        if not (0 <= u < v and 0 <= w < v):
            raise InputError(f"edge ({u}, {w}) has endpoint outside 0..{v - 1}")
        if u == w:
            raise InputError(f"self-loop at node {u}")
        adj[u, w] = True
        adj[w, u] = True
    return Graph(v, adj)


def induced_subgraph(g: Graph, nodes) -> GraphletCode:
    """Code of the subgraph induced by `nodes`; their order fixes the labeling."""
    nodes = np.asarray(nodes, dtype=np.int64)
    k = len(nodes)
    if not 2 <= k <= MAX_K:
        raise InputError(f"subgraph size must be in [2, {MAX_K}], got {k}")
    if len(set(nodes.tolist())) != k:
        raise InputError("node ids must be distinct")
    if nodes.max() >= g.v or nodes.min() < 0:
        raise InputError("node id out of range")
    sub = g.adj[np.ix_(nodes, nodes)]
    rows, cols = pair_positions(k)
    vals = sub[rows, cols]
    bits = int(np.dot(vals.astype(np.float64), bit_weights(k)))
    return GraphletCode(k, bits)


def induced_codes_batch(g: Graph, nodes_mat: np.ndarray) -> np.ndarray:
    """Packed code values for many node subsets at once; shape (s,) int64."""
    sub = g.adj[nodes_mat[:, :, None], nodes_mat[:, None, :]]
    k = nodes_mat.shape[1]
    rows, cols = pair_positions(k)
    vals = sub[:, rows, cols].astype(np.float64)
    return (vals @ bit_weights(k)).astype(np.int64)


def induced_adjacency_batch(g: Graph, nodes_mat: np.ndarray) -> np.ndarray:
    """Full k x k induced adjacency matrices for many subsets; (s, k, k) float64."""
    return g.adj[nodes_mat[:, :, None], nodes_mat[:, None, :]].astype(np.float64)


def permute_graph(g: Graph, perm) -> Graph:
    """Relabeled copy: node i of the result is node perm[i] of `g`."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(g.v)):
        raise InputError("perm must be a permutation of 0..v-1")
    return Graph(g.v, g.adj[np.ix_(perm, perm)])


def flatten_adjacency(code: GraphletCode) -> np.ndarray:
    """Row-major flattening of the full k x k adjacency; length k**2."""
    return code.adjacency().reshape(-1)
