"""Immutable undirected graphs, benchmark generators, and edge-list file I/O.

Node indices are 0-based contiguous integers.  Edge lists are canonicalized
on construction (u < v, sorted lexicographically) so that structurally equal
graphs compare and hash identically, which keeps golden files and cached
artifacts stable.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError, ParseError

__all__ = [
    "Graph",
    "LabeledGraph",
    "graph_key",
    "adjacency_matrix",
    "degree_sequence",
    "adjacency_lists",
    "permute_graph",
    "generate_csl",
    "generate_rook_4x4",
    "generate_shrikhande",
    "generate_csl_dataset",
    "read_graph",
    "write_graph",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """An undirected simple graph.

    ``edges`` may be passed in any order/orientation; it is stored sorted
    with u < v.  ``node_features`` is an optional (num_nodes, feature_dim)
    float array.
    """

    num_nodes: int
    edges: tuple[tuple[int, int], ...]
    node_features: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.num_nodes < 0:
            raise ParameterError(f"num_nodes must be non-negative, got {self.num_nodes}")
        canon = []
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ParameterError(f"self-loop at node {u}")
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
                raise ParameterError(
                    f"edge ({u}, {v}) has an endpoint outside 0..{self.num_nodes - 1}"
                )
            canon.append((u, v) if u < v else (v, u))
        canon.sort()
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise ParameterError(f"duplicate edge {a}")
        object.__setattr__(self, "edges", tuple(canon))
        if self.node_features is not None:
            feats = np.asarray(self.node_features, dtype=float)
            if feats.ndim != 2 or feats.shape[0] != self.num_nodes:
                raise ParameterError(
                    f"node_features must be (num_nodes, dim), got {feats.shape}"
                )
            feats = feats.copy()
            feats.flags.writeable = False
            object.__setattr__(self, "node_features", feats)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        e = (u, v) if u < v else (v, u)
        return e in self._edge_set()

    def _edge_set(self) -> frozenset:
        cached = self.__dict__.get("_edges_frozen")
        if cached is None:
            cached = frozenset(self.edges)
            self.__dict__["_edges_frozen"] = cached
        return cached

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        if self.num_nodes != other.num_nodes or self.edges != other.edges:
            return False
        a, b = self.node_features, other.node_features
        if (a is None) != (b is None):
            return False
        return a is None or np.array_equal(a, b)

    def __repr__(self) -> str:
        return f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"


@dataclass(frozen=True)
class LabeledGraph:
    """A dataset sample: a graph, its class label, and provenance.

    ``permutation`` maps representative node i to this copy's node
    ``permutation[i]``, so isomorphism to the class representative is
    checkable by construction.
    """

    graph: Graph
    label: int
    skip: int
    permutation: tuple[int, ...]


def graph_key(g: Graph) -> str:
    """Deterministic content hash of a graph's canonical edge list."""
    text = f"{g.num_nodes} {g.num_edges} " + " ".join(f"{u},{v}" for u, v in g.edges)
    return hashlib.sha1(text.encode()).hexdigest()[:16]


def adjacency_matrix(g: Graph) -> np.ndarray:
    """Dense symmetric 0/1 adjacency matrix with zero diagonal."""
    a = np.zeros((g.num_nodes, g.num_nodes), dtype=float)
    for u, v in g.edges:
        a[u, v] = 1.0
        a[v, u] = 1.0
    return a


def degree_sequence(g: Graph) -> list[int]:
    degs = [0] * g.num_nodes
    for u, v in g.edges:
        degs[u] += 1
        degs[v] += 1
    return degs


def adjacency_lists(g: Graph) -> list[list[int]]:
    """Sorted neighbor lists, one per node."""
    adj: list[list[int]] = [[] for _ in range(g.num_nodes)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    return [sorted(nbrs) for nbrs in adj]


def permute_graph(g: Graph, permutation) -> Graph:
    """Relabel nodes: node i of ``g`` becomes ``permutation[i]``."""
    perm = list(permutation)
    if sorted(perm) != list(range(g.num_nodes)):
        raise ParameterError("permutation must be a bijection on 0..num_nodes-1")
    edges = [(perm[u], perm[v]) for u, v in g.edges]
    feats = None
    if g.node_features is not None:
        feats = np.empty_like(g.node_features)
        for i, p in enumerate(perm):
            feats[p] = g.node_features[i]
    return Graph(g.num_nodes, tuple(edges), feats)


def generate_csl(num_nodes: int, skip: int) -> Graph:
    """Circular skip-link graph: ring edges plus chords of a fixed skip.

    Node i is adjacent to (i +- 1) mod n and (i +- skip) mod n, giving a
    4-regular graph with 2n edges.  Requires 2 <= skip < n/2.
    """
    n = num_nodes
    if n < 5:
        raise ParameterError(f"CSL needs at least 5 nodes, got {n}")
    if not 2 <= skip < n / 2:
        raise ParameterError(f"skip must satisfy 2 <= skip < {n / 2:g}, got {skip}")
    edges = set()
    for i in range(n):
        edges.add(tuple(sorted((i, (i + 1) % n))))
        edges.add(tuple(sorted((i, (i + skip) % n))))
    return Graph(n, tuple(sorted(edges)))


def generate_rook_4x4() -> Graph:
    """The 4x4 rook's graph: cells of a 4x4 board, adjacent iff same row or column."""
    idx = lambda r, c: 4 * r + c
    edges = []
    for r in range(4):
        for c1 in range(4):
            for c2 in range(c1 + 1, 4):
                edges.append((idx(r, c1), idx(r, c2)))
                edges.append((idx(c1, r), idx(c2, r)))
    return Graph(16, tuple(edges))


def generate_shrikhande() -> Graph:
    """The Shrikhande graph: Cayley graph of Z4 x Z4 with connection set
    {+-(1,0), +-(0,1), +-(1,1)}.  Strongly regular with the same parameters
    as the 4x4 rook's graph but not isomorphic to it."""
    idx = lambda a, b: 4 * (a % 4) + (b % 4)
    gens = [(1, 0), (0, 1), (1, 1)]
    edges = set()
    for a in range(4):
        for b in range(4):
            for da, db in gens:
                edges.add(tuple(sorted((idx(a, b), idx(a + da, b + db)))))
    return Graph(16, tuple(sorted(edges)))


def generate_csl_dataset(
    num_nodes: int,
    skips: list[int],
    copies_per_class: int,
    seed: int,
) -> list[LabeledGraph]:
    """Labeled CSL classification dataset.

    One representative per skip length; each class consists of
    ``copies_per_class`` node-permuted isomorphic copies (the first copy is
    the representative itself).  All graphs carry constant node features
    (value 1.0), so classes are distinguishable only through structure.
    """
    if len(set(skips)) != len(skips):
        raise ParameterError("skip lengths must be distinct")
    if copies_per_class < 1:
        raise ParameterError("copies_per_class must be >= 1")
    rng = random.Random(seed)
    features = np.ones((num_nodes, 1))
    samples = []
    for label, skip in enumerate(skips):
        rep = generate_csl(num_nodes, skip)
        rep = Graph(rep.num_nodes, rep.edges, features)
        identity = tuple(range(num_nodes))
        samples.append(LabeledGraph(rep, label, skip, identity))
        for _ in range(copies_per_class - 1):
            perm = list(range(num_nodes))
            rng.shuffle(perm)
            samples.append(LabeledGraph(permute_graph(rep, perm), label, skip, tuple(perm)))
    return samples


def read_graph(path) -> Graph:
    """Parse the edge-list text format: a header line "n m" followed by
    m lines "u v".  Raises ParseError carrying the offending line number."""
    lines = Path(path).read_text().splitlines()
    rows = [(i + 1, ln.strip()) for i, ln in enumerate(lines) if ln.strip()]
    if not rows:
        raise ParseError("empty graph file", line=1)
    lineno, header = rows[0]
    parts = header.split()
    if len(parts) != 2:
        raise ParseError(f"expected header 'n m', got {header!r}", line=lineno)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"non-integer header {header!r}", line=lineno) from None
    body = rows[1:]
    if len(body) != m:
        raise ParseError(f"header promises {m} edges, file has {len(body)}", line=lineno)
    edges = []
    seen = set()
    for lineno, row in body:
        parts = row.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {row!r}", line=lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer endpoint in {row!r}", line=lineno) from None
        if u == v:
            raise ParseError(f"self-loop at node {u}", line=lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"endpoint out of range in ({u}, {v})", line=lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError(f"duplicate edge ({u}, {v})", line=lineno)
        seen.add(key)
        edges.append(key)
    return Graph(n, tuple(edges))


def write_graph(g: Graph, path) -> None:
    """Write a graph in the edge-list text format (canonical edge order)."""
    out = [f"{g.num_nodes} {g.num_edges}"]
    out += [f"{u} {v}" for u, v in g.edges]
    Path(path).write_text("\n".join(out) + "\n")
