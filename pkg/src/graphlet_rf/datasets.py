"""Dataset construction and persistence.

Three sources of labeled graph datasets:

* a two-class stochastic block model generator where both classes share
  the same expected node degree (so degree alone cannot separate them)
  and differ only through the within/between-community edge
  probabilities, controlled by the similarity ratio r = p_in_1 / p_in_0;
* the TU benchmark text layout (DS_A.txt / DS_graph_indicator.txt /
  DS_graph_labels.txt);
* a plain edge-list cache format with one section per graph.

Labels are normalized to {-1, +1} internally.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .graphs import Graph, from_edge_list
from .rng import RngStream


@dataclass(frozen=True)
class SbmSpec:
    n_graphs: int = 300
    v: int = 60
    communities: int = 6
    expected_degree: float = 10.0
    p_in_1: float = 0.3
    r: float = 1.1
    seed: int = 0

    def __post_init__(self):
        if self.v % self.communities != 0:
            raise InputError(
                f"v={self.v} must be divisible by communities={self.communities}"
            )
        if self.n_graphs < 2 or self.n_graphs % 2 != 0:
            raise InputError("n_graphs must be even and >= 2")
        if self.r <= 0:
            raise InputError(f"similarity ratio must be positive, got {self.r}")


@dataclass
class LabeledDataset:
    graphs: list
    labels: list
    name: str = ""
    provenance: str = ""

    def __post_init__(self):
        if len(self.graphs) != len(self.labels):
            raise InputError("graphs and labels must have equal length")
        if any(l not in (-1, 1) for l in self.labels):
            raise InputError("labels must be -1 or +1")

    def __len__(self) -> int:
        return len(self.graphs)


def solve_sbm_probs(spec: SbmSpec):
    """Edge probabilities ((p_in_0, p_out_0), (p_in_1, p_out_1)).

    A node has (community size - 1) same-community candidate neighbors
    and v - community size cross-community ones, so the expected degree
    constraint is (c_s - 1) p_in + (v - c_s) p_out = d for each class.
    """
    c_s = spec.v // spec.communities
    same = c_s - 1
    cross = spec.v - c_s
    out = []
    for p_in in (spec.p_in_1 / spec.r, spec.p_in_1):
        p_out = (spec.expected_degree - same * p_in) / cross
        for name, p in (("p_in", p_in), ("p_out", p_out)):
            if not 0.0 <= p <= 1.0:
                raise InputError(f"{name}={p} outside [0, 1] for spec {spec}")
        out.append((p_in, p_out))
    return tuple(out)


def _sbm_graph(v, communities, p_in, p_out, rng: RngStream) -> Graph:
    c_s = v // communities
    comm = np.arange(v) // c_s
    rows, cols = np.triu_indices(v, 1)
    p = np.where(comm[rows] == comm[cols], p_in, p_out)
    edges_mask = rng.uniform(len(rows)) < p
    adj = np.zeros((v, v), dtype=bool)
    adj[rows[edges_mask], cols[edges_mask]] = True
    adj |= adj.T
    return Graph(v, adj)


def generate_sbm(spec: SbmSpec, rng: RngStream | None = None) -> LabeledDataset:
    """Half the graphs per class; class 0 -> label -1, class 1 -> label +1."""
    (p_in_0, p_out_0), (p_in_1, p_out_1) = solve_sbm_probs(spec)
    if rng is None:
        rng = RngStream(spec.seed, stream=0)
    graphs = []
    labels = []
    half = spec.n_graphs // 2
    for g_idx in range(spec.n_graphs):
        cls = 0 if g_idx < half else 1
        p_in, p_out = (p_in_0, p_out_0) if cls == 0 else (p_in_1, p_out_1)
        graphs.append(_sbm_graph(spec.v, spec.communities, p_in, p_out,
                                 rng.derive(g_idx)))
        labels.append(-1 if cls == 0 else 1)
    prov = (
        f"sbm n={spec.n_graphs} v={spec.v} c={spec.communities} "
        f"d={spec.expected_degree} p_in_1={spec.p_in_1} r={spec.r} seed={spec.seed}"
    )
    return LabeledDataset(graphs, labels, name=f"sbm_r{spec.r}", provenance=prov)


def _find_tu_prefix(path: Path) -> str:
    hits = sorted(path.glob("*_A.txt"))
    if not hits:
        raise InputError(f"{path}: no *_A.txt file found")
    return hits[0].name[: -len("_A.txt")]


def load_tu_dataset(path) -> LabeledDataset:
    """Parse the TU text layout; node ids are remapped densely per graph."""
    path = Path(path)
    if not path.is_dir():
        raise InputError(f"{path}: not a directory")
    ds = _find_tu_prefix(path)
    ind_path = path / f"{ds}_graph_indicator.txt"
    lab_path = path / f"{ds}_graph_labels.txt"
    adj_path = path / f"{ds}_A.txt"
    for p in (ind_path, lab_path):
        if not p.exists():
            raise InputError(f"missing file {p}")

    node_graph = []  # 0-based graph index per 1-based node id
    with open(ind_path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                node_graph.append(int(line) - 1)
            except ValueError:
                raise InputError(f"{ind_path}:{ln}: bad graph indicator {line!r}")
    n_graphs = max(node_graph) + 1 if node_graph else 0
    if sorted(set(node_graph)) != list(range(n_graphs)):
        raise InputError(f"{ind_path}: graph indicators are not contiguous from 1")

    # dense per-graph node ids, in file order
    local_id = np.empty(len(node_graph), dtype=np.int64)
    sizes = [0] * n_graphs
    for node, gi in enumerate(node_graph):
        local_id[node] = sizes[gi]
        sizes[gi] += 1

    edge_sets: list[set] = [set() for _ in range(n_graphs)]
    with open(adj_path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                a, b = (int(t) for t in line.replace(",", " ").split())
            except ValueError:
                raise InputError(f"{adj_path}:{ln}: bad edge line {line!r}")
            if not (1 <= a <= len(node_graph) and 1 <= b <= len(node_graph)):
                raise InputError(f"{adj_path}:{ln}: node id out of range")
            ga, gb = node_graph[a - 1], node_graph[b - 1]
            if ga != gb:
                raise InputError(f"{adj_path}:{ln}: edge crosses graphs {ga + 1} and {gb + 1}")
            u, w = int(local_id[a - 1]), int(local_id[b - 1])
            if u == w:
                raise InputError(f"{adj_path}:{ln}: self-loop on node {a}")
            edge_sets[ga].add((min(u, w), max(u, w)))

    raw_labels = []
    with open(lab_path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw_labels.append(int(line))
            except ValueError:
                raise InputError(f"{lab_path}:{ln}: bad label {line!r}")
    if len(raw_labels) != n_graphs:
        raise InputError(
            f"{lab_path}: {len(raw_labels)} labels for {n_graphs} graphs"
        )
    distinct = sorted(set(raw_labels))
    if len(distinct) != 2:
        raise InputError(f"{lab_path}: need exactly 2 label values, got {distinct}")
    remap = {distinct[0]: -1, distinct[1]: 1}

    graphs = [from_edge_list(sizes[i], sorted(edge_sets[i])) for i in range(n_graphs)]
    labels = [remap[l] for l in raw_labels]
    return LabeledDataset(graphs, labels, name=ds, provenance=f"tu:{path}")


def save_tu_dataset(dataset: LabeledDataset, path, name: str = "DS") -> None:
    """Write the dataset back out in TU layout (round-trip support)."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    offset = 0
    a_lines = []
    ind_lines = []
    for gi, g in enumerate(dataset.graphs):
        for u, w in g.edge_list():
            a_lines.append(f"{offset + u + 1}, {offset + w + 1}")
            a_lines.append(f"{offset + w + 1}, {offset + u + 1}")
        ind_lines.extend([str(gi + 1)] * g.v)
        offset += g.v
    (path / f"{name}_A.txt").write_text("\n".join(a_lines) + "\n")
    (path / f"{name}_graph_indicator.txt").write_text("\n".join(ind_lines) + "\n")
    (path / f"{name}_graph_labels.txt").write_text(
        "\n".join(str(l) for l in dataset.labels) + "\n"
    )


def save_edge_list(dataset: LabeledDataset, path) -> None:
    """Cache format: `# graph <id> <label>` sections with 0-indexed `u w` lines."""
    lines = []
    for gi, (g, label) in enumerate(zip(dataset.graphs, dataset.labels)):
        lines.append(f"# graph {gi} {label} v={g.v}")
        for u, w in g.edge_list():
            lines.append(f"{u} {w}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_edge_list(path) -> LabeledDataset:
    path = Path(path)
    graphs = []
    labels = []
    cur_edges = None
    cur_v = None
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("# graph"):
                if cur_edges is not None:
                    graphs.append(from_edge_list(cur_v, cur_edges))
                parts = line.split()
                try:
                    labels.append(int(parts[3]))
                    cur_v = int(parts[4].removeprefix("v="))
                except (IndexError, ValueError):
                    raise InputError(f"{path}:{ln}: bad graph header {line!r}")
                cur_edges = []
            else:
                if cur_edges is None:
                    raise InputError(f"{path}:{ln}: edge before any graph header")
                try:
                    u, w = (int(t) for t in line.split())
                except ValueError:
                    raise InputError(f"{path}:{ln}: bad edge line {line!r}")
                cur_edges.append((u, w))
    if cur_edges is not None:
        graphs.append(from_edge_list(cur_v, cur_edges))
    return LabeledDataset(graphs, labels, name=path.stem, provenance=f"edgelist:{path}")


def split_indices(labels, train_fraction: float, seed: int):
    """Stratified deterministic train/test index lists (both sorted)."""
    if not 0.0 < train_fraction < 1.0:
        raise InputError(f"train fraction must be in (0, 1), got {train_fraction}")
    rng = RngStream(seed, stream=0)
    by_class: dict = {}
    for i, l in enumerate(labels):
        by_class.setdefault(l, []).append(i)
    if len(by_class) < 2:
        raise InputError("stratified split needs at least 2 classes")
    train_idx = []
    test_idx = []
    for label in sorted(by_class):
        members = by_class[label]
        if len(members) < 2:
            raise InputError(f"class {label} has fewer than 2 members")
        idx = np.array(members)
        for i in range(len(idx) - 1):
            j = i + int(rng.uniform() * (len(idx) - i))
            idx[i], idx[j] = idx[j], idx[i]
        n_train = round(train_fraction * len(idx))
        n_train = min(max(n_train, 1), len(idx) - 1)
        train_idx.extend(idx[:n_train].tolist())
        test_idx.extend(idx[n_train:].tolist())
    train_idx.sort()
    test_idx.sort()
    return train_idx, test_idx


def split(dataset: LabeledDataset, train_fraction: float, seed: int):
    """Stratified deterministic train/test split."""
    train_idx, test_idx = split_indices(dataset.labels, train_fraction, seed)

    def subset(indices, tag):
        return LabeledDataset(
            [dataset.graphs[i] for i in indices],
            [dataset.labels[i] for i in indices],
            name=f"{dataset.name}:{tag}",
            provenance=dataset.provenance,
        )

    return subset(train_idx, "train"), subset(test_idx, "test")
