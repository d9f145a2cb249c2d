import random

import numpy as np
import pytest

from oracles import (
    brute_articulation,
    brute_bridges,
    brute_components,
    gf2_cycle_rank,
    random_graph,
)
from topoformer.errors import ParameterError
from topoformer.graphs import Graph, generate_csl, generate_rook_4x4
from topoformer.topology import (
    articulation_vertices,
    bridges,
    clique_adjacency,
    connected_components,
    cycle_basis,
    cycle_length_histogram,
    delete_edge,
    delete_vertex,
    euler_invariant,
)

C4 = Graph(4, ((0, 1), (1, 2), (2, 3), (0, 3)))
TRIANGLE = Graph(3, ((0, 1), (1, 2), (0, 2)))
P3 = Graph(3, ((0, 1), (1, 2)))
BOWTIE = Graph(5, ((0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)))
TWO_TRIANGLES = Graph(6, ((0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)))


def cycles_are_closed_walks(g, basis):
    edge_set = set(g.edges)
    for cyc in basis.cycles:
        assert len(cyc) >= 3
        assert len(set(cyc)) == len(cyc)
        for a, b in zip(cyc, cyc[1:] + (cyc[0],)):
            assert tuple(sorted((a, b))) in edge_set


def test_tree_has_empty_basis():
    tree = Graph(5, ((0, 1), (0, 2), (1, 3), (1, 4)))
    assert len(cycle_basis(tree)) == 0


def test_c4_basis_single_cycle():
    basis = cycle_basis(C4)
    assert len(basis) == 1
    assert sorted(basis.cycles[0]) == [0, 1, 2, 3]


def test_csl_basis_size():
    basis = cycle_basis(generate_csl(41, 2))
    assert len(basis) == 42  # 82 - 41 + 1


def test_clique_adjacency_triangle_is_own_adjacency():
    ac = clique_adjacency(cycle_basis(TRIANGLE), 3).matrix
    assert ac.tolist() == [[0, 1, 1], [1, 0, 1], [1, 1, 0]]


def test_clique_adjacency_c4_completes_to_k4():
    ac = clique_adjacency(cycle_basis(C4), 4).matrix
    assert ac.sum() == 12  # K4 has 6 undirected edges


def test_clique_adjacency_bounded_variant_filters():
    ac = clique_adjacency(cycle_basis(C4), 4, max_cycle_len=3).matrix
    assert ac.sum() == 0


def test_clique_adjacency_acyclic_zero():
    ac = clique_adjacency(cycle_basis(P3), 3).matrix
    assert ac.sum() == 0


def test_euler_invariant_examples():
    assert euler_invariant(TRIANGLE) == 1
    assert euler_invariant(TWO_TRIANGLES) == 2
    assert euler_invariant(generate_rook_4x4()) == 33


def test_articulation_and_bridges_small():
    assert articulation_vertices(P3) == [1]
    assert bridges(P3) == [(0, 1), (1, 2)]
    c5 = Graph(5, tuple((i, (i + 1) % 5) for i in range(5)))
    assert articulation_vertices(c5) == []
    assert bridges(c5) == []
    assert articulation_vertices(BOWTIE) == [2]


def test_delete_vertex_examples():
    g = delete_vertex(P3, 1)
    assert (g.num_nodes, g.num_edges) == (2, 0)
    g = delete_vertex(C4, 0)
    assert (g.num_nodes, g.num_edges) == (3, 2)
    g = delete_vertex(BOWTIE, 2)
    assert (g.num_nodes, g.num_edges) == (4, 2)
    assert len(connected_components(g)) == 2


def test_delete_edge():
    g = delete_edge(C4, (3, 0))
    assert g.num_edges == 3
    with pytest.raises(ParameterError):
        delete_edge(C4, (0, 2))
    with pytest.raises(ParameterError):
        delete_vertex(C4, 9)


def test_cycle_length_histogram():
    assert cycle_length_histogram(cycle_basis(C4)) == {4: 1}
    assert cycle_length_histogram(cycle_basis(TWO_TRIANGLES)) == {3: 2}


def test_basis_determinism():
    g = generate_csl(17, 3)
    assert cycle_basis(g).cycles == cycle_basis(g).cycles


def test_euler_and_gf2_on_random_graphs():
    """Basis size matches |E|-|V|+c and spans the cycle space over GF(2)."""
    rng = random.Random(42)
    for _ in range(300):
        n, edges = random_graph(rng, max_nodes=12)
        g = Graph(n, edges)
        basis = cycle_basis(g)
        cycles_are_closed_walks(g, basis)
        expected = g.num_edges - n + len(brute_components(n, edges))
        assert len(basis) == expected
        assert euler_invariant(g) == expected
        assert gf2_cycle_rank(n, g.edges, basis.cycles) == expected


def test_clique_adjacency_dominates_cycle_edges():
    """Every non-bridge edge must appear in the clique adjacency."""
    rng = random.Random(7)
    for _ in range(100):
        n, edges = random_graph(rng, max_nodes=10)
        g = Graph(n, edges)
        ac = clique_adjacency(cycle_basis(g), n).matrix
        bridge_set = set(bridges(g))
        for u, v in g.edges:
            if (u, v) not in bridge_set:
                assert ac[u, v] == 1


def test_articulation_matches_brute_force():
    rng = random.Random(11)
    for _ in range(200):
        n, edges = random_graph(rng, max_nodes=10)
        g = Graph(n, edges)
        assert articulation_vertices(g) == sorted(brute_articulation(n, edges))
        assert bridges(g) == sorted(brute_bridges(n, edges))


def test_deletions_preserve_euler_identity():
    rng = random.Random(23)
    for _ in range(100):
        n, edges = random_graph(rng, max_nodes=10, min_nodes=3)
        g = Graph(n, edges)
        v = rng.randrange(n)
        gv = delete_vertex(g, v)
        assert len(cycle_basis(gv)) == euler_invariant(gv)
        if g.num_edges:
            e = g.edges[rng.randrange(g.num_edges)]
            ge = delete_edge(g, e)
            assert len(cycle_basis(ge)) == euler_invariant(ge)


def test_clique_adjacency_symmetric_zero_diag():
    rng = random.Random(5)
    for _ in range(50):
        n, edges = random_graph(rng, max_nodes=10)
        ac = clique_adjacency(cycle_basis(Graph(n, edges)), n).matrix
        assert np.array_equal(ac, ac.T)
        assert np.all(np.diag(ac) == 0)
