"""Random k-subset samplers over a graph's nodes.

Two samplers are provided: exact uniform sampling of k-node subsets
(partial Fisher-Yates), and a random-walk sampler that collects distinct
visited nodes until k are seen, which favors connected induced subgraphs.

The random-walk stopping rule: walk from a uniform start node, moving to
a uniformly random neighbor each step, adding every newly visited node.
If the walk hits an isolated node or exhausts `rw_max_steps` before
collecting k nodes, it restarts from a fresh uniform start (keeping the
visited set), under a global budget of 10 * rw_max_steps steps; any
remaining shortfall is padded with uniform draws from the unvisited
nodes.  On a connected graph with the default budget, padding never
triggers and the induced subgraph is always connected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graphs import Graph
from .rng import RngStream

UNIFORM = "uniform"
RANDOM_WALK = "rw"


@dataclass(frozen=True)
class SamplerSpec:
    kind: str = UNIFORM
    k: int = 5
    rw_max_steps: int | None = None  # default 100 * k * v, resolved per graph

    def __post_init__(self):
        if self.kind not in (UNIFORM, RANDOM_WALK):
            raise InputError(f"unknown sampler kind {self.kind!r}")
        if self.k < 2:
            raise InputError(f"sampler k must be >= 2, got {self.k}")
        if self.rw_max_steps is not None and self.rw_max_steps < self.k:
            raise InputError("rw_max_steps must be at least k")

    def resolved_max_steps(self, v: int) -> int:
        if self.rw_max_steps is not None:
            return self.rw_max_steps
        return 100 * self.k * v


def sample_uniform(g: Graph, k: int, rng: RngStream) -> np.ndarray:
    """One uniform k-subset of nodes, in sampled order; consumes k uniforms."""
    if g.v < k:
        raise InputError(f"graph has v={g.v} < k={k} nodes")
    pool = np.arange(g.v)
    for t in range(k):
        u = rng.uniform()
        j = t + int(u * (g.v - t))
        pool[t], pool[j] = pool[j], pool[t]
    return pool[:k].copy()


def sample_uniform_batch(g: Graph, k: int, s: int, rng: RngStream) -> np.ndarray:
    """`s` uniform k-subsets, shape (s, k); bit-identical to s scalar draws."""
    if g.v < k:
        raise InputError(f"graph has v={g.v} < k={k} nodes")
    u = rng.uniform(s * k).reshape(s, k)
    pool = np.broadcast_to(np.arange(g.v), (s, g.v)).copy()
    rows = np.arange(s)
    for t in range(k):
        j = t + (u[:, t] * (g.v - t)).astype(np.int64)
        tmp = pool[rows, t].copy()
        pool[rows, t] = pool[rows, j]
        pool[rows, j] = tmp
    return pool[:, :k].copy()


def sample_rw(g: Graph, spec: SamplerSpec, rng: RngStream) -> np.ndarray:
    """One random-walk k-subset of nodes, in first-visit order."""
    k = spec.k
    if g.v < k:
        raise InputError(f"graph has v={g.v} < k={k} nodes")
    max_steps = spec.resolved_max_steps(g.v)
    global_budget = 10 * max_steps
    visited: list[int] = []
    seen = np.zeros(g.v, dtype=bool)
    steps_total = 0

    def visit(node: int) -> None:
        if not seen[node]:
            seen[node] = True
            visited.append(node)

    while len(visited) < k and steps_total < global_budget:
        current = int(rng.uniform() * g.v)
        visit(current)
        steps_walk = 0
        while len(visited) < k and steps_walk < max_steps and steps_total < global_budget:
            nbrs = g.neighbors[current]
            if len(nbrs) == 0:
                break  # isolated node: restart
            current = int(nbrs[int(rng.uniform() * len(nbrs))])
            visit(current)
            steps_walk += 1
            steps_total += 1
    if len(visited) < k:
        # pad with uniform draws from the unvisited nodes
        remaining = np.flatnonzero(~seen)
        for t in range(k - len(visited)):
            u = rng.uniform()
            j = t + int(u * (len(remaining) - t))
            remaining[t], remaining[j] = remaining[j], remaining[t]
            visited.append(int(remaining[t]))
    return np.array(visited[:k], dtype=np.int64)


def sample_subsets(g: Graph, spec: SamplerSpec, s: int, rng: RngStream) -> np.ndarray:
    """`s` node subsets under `spec`, shape (s, k)."""
    if spec.kind == UNIFORM:
        # batch only when the pool matrix stays small
        if s * g.v <= 50_000_000:
            return sample_uniform_batch(g, spec.k, s, rng)
        return np.stack([sample_uniform(g, spec.k, rng) for _ in range(s)])
    return np.stack([sample_rw(g, spec, rng) for _ in range(s)])
