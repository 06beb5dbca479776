import numpy as np
import pytest

from graphlet_rf import (
    GraphletCode,
    InputError,
    canonical_code,
    flatten_adjacency,
    from_edge_list,
    induced_subgraph,
    permute_graph,
)
from graphlet_rf.graphs import code_from_adjacency, induced_codes_batch


def test_triangle_from_edge_list():
    g = from_edge_list(3, [(0, 1), (1, 2), (0, 2)])
    assert g.v == 3
    assert g.n_edges == 3
    assert g.adj[0, 1] and g.adj[1, 0]


def test_empty_graph():
    g = from_edge_list(4, [])
    assert g.n_edges == 0
    assert all(len(nb) == 0 for nb in g.neighbors)


def test_duplicate_edges_collapse():
    g = from_edge_list(3, [(0, 1), (0, 1), (1, 0)])
    assert g.n_edges == 1


def test_edge_list_errors():
    with pytest.raises(InputError):
        from_edge_list(3, [(0, 3)])
    with pytest.raises(InputError):
        from_edge_list(3, [(1, 1)])
    with pytest.raises(InputError):
        from_edge_list(3, [(-1, 0)])


def test_neighbor_lists_match_adjacency():
    rng = np.random.default_rng(0)
    for _ in range(10):
        v = int(rng.integers(2, 12))
        adj = rng.random((v, v)) < 0.4
        adj = np.triu(adj, 1)
        adj = adj | adj.T
        g = from_edge_list(v, list(zip(*np.nonzero(np.triu(adj, 1)))))
        for i in range(v):
            assert set(g.neighbors[i].tolist()) == set(np.flatnonzero(adj[i]).tolist())


def test_induced_subgraph_triangle():
    g = from_edge_list(3, [(0, 1), (1, 2), (0, 2)])
    code = induced_subgraph(g, [0, 1, 2])
    assert code.bits == 0b111


def test_induced_subgraph_empty():
    g = from_edge_list(5, [])
    assert induced_subgraph(g, [0, 2, 4]).bits == 0


def test_induced_subgraph_star():
    star = from_edge_list(4, [(0, 1), (0, 2), (0, 3)])
    assert induced_subgraph(star, [1, 2, 3]).bits == 0
    code = induced_subgraph(star, [0, 1, 2])
    # edges (0-1) and (0-2) occupy bit positions 0 and 1
    assert code.bits == 0b011


def test_induced_subgraph_order_fixes_labeling():
    g = from_edge_list(4, [(0, 1), (2, 3)])
    c1 = induced_subgraph(g, [0, 1, 2])
    c2 = induced_subgraph(g, [2, 0, 1])
    assert c1.bits != c2.bits  # not canonicalized here


def test_induced_subgraph_duplicate_node():
    g = from_edge_list(4, [(0, 1)])
    with pytest.raises(InputError):
        induced_subgraph(g, [0, 0, 1])


def test_relabeling_invariance_bruteforce():
    # induced_subgraph(G, perm(nodes)) equals the permuted code
    rng = np.random.default_rng(1)
    for _ in range(25):
        v = int(rng.integers(5, 11))
        k = int(rng.integers(2, 6))
        edges = [
            (i, j)
            for i in range(v)
            for j in range(i + 1, v)
            if rng.random() < 0.4
        ]
        g = from_edge_list(v, edges)
        nodes = rng.permutation(v)[:k]
        perm = rng.permutation(k)
        direct = induced_subgraph(g, nodes[perm])
        base = induced_subgraph(g, nodes).adjacency()
        expected = code_from_adjacency(base[np.ix_(perm, perm)])
        assert direct.bits == expected.bits


def test_flatten_adjacency_examples():
    k3 = GraphletCode(3, 0b111)
    assert flatten_adjacency(k3).tolist() == [0, 1, 1, 1, 0, 1, 1, 1, 0]
    assert flatten_adjacency(GraphletCode(3, 0)).tolist() == [0.0] * 9
    single = GraphletCode(3, 0b001)
    assert flatten_adjacency(single).tolist() == [0, 1, 0, 1, 0, 0, 0, 0, 0]


def test_flatten_symmetric_zero_diagonal():
    rng = np.random.default_rng(2)
    for _ in range(10):
        k = int(rng.integers(2, 8))
        bits = int(rng.integers(0, 1 << (k * (k - 1) // 2)))
        a = flatten_adjacency(GraphletCode(k, bits)).reshape(k, k)
        assert np.array_equal(a, a.T)
        assert np.all(np.diagonal(a) == 0)


def test_code_roundtrip():
    rng = np.random.default_rng(3)
    for _ in range(20):
        k = int(rng.integers(2, 9))
        bits = int(rng.integers(0, 1 << (k * (k - 1) // 2)))
        code = GraphletCode(k, bits)
        assert code_from_adjacency(code.adjacency()).bits == bits


def test_code_validation():
    with pytest.raises(InputError):
        GraphletCode(9, 0)
    with pytest.raises(InputError):
        GraphletCode(3, 1 << 3)  # only 3 bits allowed at k=3


def test_batch_codes_agree_with_scalar():
    g = from_edge_list(8, [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (0, 7)])
    rng = np.random.default_rng(4)
    nodes_mat = np.array([rng.permutation(8)[:4] for _ in range(30)])
    batch = induced_codes_batch(g, nodes_mat)
    for row, val in zip(nodes_mat, batch):
        assert induced_subgraph(g, row).bits == int(val)


def test_permute_graph():
    g = from_edge_list(4, [(0, 1), (1, 2)])
    p = permute_graph(g, [3, 2, 1, 0])
    assert p.adj[3, 2] and p.adj[2, 1]
    assert p.n_edges == g.n_edges
    with pytest.raises(InputError):
        permute_graph(g, [0, 0, 1, 2])
