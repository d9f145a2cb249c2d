"""Cycle-space machinery: fundamental cycle bases, clique adjacency matrices,
Euler-characteristic accounting, and biconnectivity analysis.

The basis extraction is the spanning-tree method: one fundamental cycle per
non-tree edge.  Cycle bases are not unique, so the traversal is pinned down
(BFS from the lowest-index node of each component, non-tree edges in sorted
order) to make outputs deterministic.  Fundamental cycles may contain chords;
callers that need chordless cycles should use the enumeration in
``expressiveness``.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .graphs import Graph, adjacency_lists, graph_key

__all__ = [
    "CycleBasis",
    "CliqueAdjacency",
    "cycle_basis",
    "clique_adjacency",
    "euler_invariant",
    "connected_components",
    "articulation_vertices",
    "bridges",
    "delete_vertex",
    "delete_edge",
    "cycle_length_histogram",
]


@dataclass(frozen=True)
class CycleBasis:
    """A list of simple cycles spanning the cycle space of a graph.

    Each cycle is a node tuple; consecutive nodes (and last -> first) are
    edges of the parent graph.  ``parent_graph_id`` is the content hash of
    the graph the basis was extracted from.
    """

    cycles: tuple[tuple[int, ...], ...]
    parent_graph_id: str

    def __len__(self) -> int:
        return len(self.cycles)


@dataclass(frozen=True)
class CliqueAdjacency:
    """Adjacency matrix of the union of complete graphs, one per basis cycle."""

    matrix: np.ndarray

    @property
    def num_nodes(self) -> int:
        return self.matrix.shape[0]


def _bfs_tree(adj, root, seen):
    """BFS from root; returns (component nodes, parent map, depth map)."""
    parent = {root: root}
    depth = {root: 0}
    seen[root] = True
    order = [root]
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                depth[y] = depth[x] + 1
                order.append(y)
                queue.append(y)
    return order, parent, depth


def cycle_basis(g: Graph) -> CycleBasis:
    """Fundamental cycle basis from BFS spanning trees.

    For each non-tree edge (u, v), the cycle is the tree path u -> lca plus
    the reversed tree path v -> lca.  Forests yield an empty basis.  The
    basis size always equals ``euler_invariant(g)``.
    """
    adj = adjacency_lists(g)
    seen = [False] * g.num_nodes
    cycles = []
    for root in range(g.num_nodes):
        if seen[root]:
            continue
        comp, parent, depth = _bfs_tree(adj, root, seen)
        compset = set(comp)
        tree = {tuple(sorted((x, parent[x]))) for x in comp if parent[x] != x}
        for u, v in g.edges:
            if u not in compset or (u, v) in tree:
                continue
            pu, pv = u, v
            side_u, side_v = [u], [v]
            while depth[pu] > depth[pv]:
                pu = parent[pu]
                side_u.append(pu)
            while depth[pv] > depth[pu]:
                pv = parent[pv]
                side_v.append(pv)
            while pu != pv:
                pu = parent[pu]
                side_u.append(pu)
                pv = parent[pv]
                side_v.append(pv)
            # side_u ends at the lca; append v's path back down, excluding it
            cycles.append(tuple(side_u + side_v[-2::-1]))
    return CycleBasis(tuple(cycles), graph_key(g))


def clique_adjacency(
    basis: CycleBasis, num_nodes: int, max_cycle_len: int | None = None
) -> CliqueAdjacency:
    """Entry (u, v) is 1 iff u != v co-occur in some basis cycle.

    With ``max_cycle_len`` set, only cycles of at most that many nodes
    contribute (the bounded variant).  An empty basis gives a zero matrix.
    """
    m = np.zeros((num_nodes, num_nodes), dtype=float)
    for cyc in basis.cycles:
        if max_cycle_len is not None and len(cyc) > max_cycle_len:
            continue
        if any(not 0 <= x < num_nodes for x in cyc):
            raise ParameterError(f"basis cycle {cyc} references nodes outside 0..{num_nodes - 1}")
        for i, u in enumerate(cyc):
            for v in cyc[i + 1:]:
                m[u, v] = 1.0
                m[v, u] = 1.0
    return CliqueAdjacency(m)


def connected_components(g: Graph) -> list[list[int]]:
    adj = adjacency_lists(g)
    seen = [False] * g.num_nodes
    comps = []
    for root in range(g.num_nodes):
        if not seen[root]:
            comp, _, _ = _bfs_tree(adj, root, seen)
            comps.append(sorted(comp))
    return comps


def euler_invariant(g: Graph) -> int:
    """|E| - |V| + (number of connected components) = cycle space dimension."""
    return g.num_edges - g.num_nodes + len(connected_components(g))


def _dfs_lowlink(g: Graph):
    """Iterative DFS computing discovery times and low-links.

    Returns (articulation vertex set, bridge list).
    """
    adj = adjacency_lists(g)
    n = g.num_nodes
    disc = [-1] * n
    low = [0] * n
    parent = [-1] * n
    arti = set()
    bridge_list = []
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        root_children = 0
        stack = [(root, iter(adj[root]))]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    parent[w] = v
                    if v == root:
                        root_children += 1
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
                elif w != parent[v]:
                    low[v] = min(low[v], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    u = stack[-1][0]
                    low[u] = min(low[u], low[v])
                    if low[v] > disc[u]:
                        bridge_list.append(tuple(sorted((u, v))))
                    if u != root and low[v] >= disc[u]:
                        arti.add(u)
        if root_children >= 2:
            arti.add(root)
    return arti, sorted(bridge_list)


def articulation_vertices(g: Graph) -> list[int]:
    """Nodes whose removal increases the number of connected components."""
    arti, _ = _dfs_lowlink(g)
    return sorted(arti)


def bridges(g: Graph) -> list[tuple[int, int]]:
    """Edges whose removal increases the number of connected components."""
    _, bridge_list = _dfs_lowlink(g)
    return bridge_list


def delete_vertex(g: Graph, v: int) -> Graph:
    """Induced subgraph on all nodes but v, reindexed to 0..n-2."""
    if not 0 <= v < g.num_nodes:
        raise ParameterError(f"vertex {v} not in graph with {g.num_nodes} nodes")
    remap = {old: new for new, old in enumerate(x for x in range(g.num_nodes) if x != v)}
    edges = tuple((remap[a], remap[b]) for a, b in g.edges if a != v and b != v)
    feats = None
    if g.node_features is not None:
        keep = [x for x in range(g.num_nodes) if x != v]
        feats = g.node_features[keep]
    return Graph(g.num_nodes - 1, edges, feats)


def delete_edge(g: Graph, e: tuple[int, int]) -> Graph:
    """Same nodes, one edge removed."""
    key = (min(e), max(e))
    if key not in set(g.edges):
        raise ParameterError(f"edge {e} not in graph")
    edges = tuple(x for x in g.edges if x != key)
    return Graph(g.num_nodes, edges, g.node_features)


def cycle_length_histogram(basis: CycleBasis) -> dict[int, int]:
    """Multiset of basis cycle lengths as a length -> count map."""
    return dict(sorted(Counter(len(c) for c in basis.cycles).items()))
