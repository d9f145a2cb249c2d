"""Isomorphism-test oracles and mechanical checks of the expressiveness claims.

Color refinement uses content-addressed colors: each round's color is a
stable 64-bit digest of (previous color, sorted neighbor colors).  Colors are
therefore canonical across graphs and across runs, so stable color histograms
from two separate refinements can be compared directly.

The pair-refinement test here is folklore 2-WL, which matches the
discriminative power of the 3-WL test; it is size-guarded because its cost
grows with n^3 color updates per round.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, HypothesisError, ParameterError, TopoformerError
from .graphs import Graph, adjacency_lists, adjacency_matrix, degree_sequence
from .topology import clique_adjacency, connected_components, cycle_basis, euler_invariant

__all__ = [
    "ColorRefinement",
    "Verdict",
    "RrwpEncoding",
    "StationaryDistribution",
    "ConvergenceReport",
    "wl1_refine",
    "wl1_with_clique_augmentation",
    "wl1_distinguishes",
    "wl3_distinguishes",
    "chordless_cycles",
    "chordless_length_profile",
    "distinguish_by_cycles",
    "distinguish_by_biconnectivity",
    "rrwp",
    "stationary",
    "rrwp_convergence_report",
]

WL3_MAX_NODES = 20


def _digest(obj) -> int:
    """Stable 64-bit hash of a (nested) tuple of ints."""
    return int.from_bytes(hashlib.sha1(repr(obj).encode()).digest()[:8], "big")


@dataclass(frozen=True)
class ColorRefinement:
    """Outcome of a color refinement run.

    ``rounds_to_stabilize`` counts the rounds that strictly refined the
    partition; ``stable_histogram`` is the multiset of stable colors and is
    invariant under node relabeling of the input graph.
    """

    colors: tuple[int, ...]
    rounds_to_stabilize: int
    stable_histogram: dict[int, int]


@dataclass(frozen=True)
class Verdict:
    distinguished: bool
    witness: str
    detail: dict = field(default_factory=dict, compare=False)


def _partition(colors) -> list[tuple[int, ...]]:
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(colors):
        groups.setdefault(c, []).append(i)
    return sorted(tuple(v) for v in groups.values())


def _refine(num_nodes, neighborhoods, initial_colors=None) -> ColorRefinement:
    """Joint color refinement over one or more neighborhood systems."""
    colors = list(initial_colors) if initial_colors is not None else [0] * num_nodes
    if len(colors) != num_nodes:
        raise ParameterError(f"expected {num_nodes} initial colors, got {len(colors)}")
    rounds = 0
    while True:
        new = [
            _digest(
                (colors[v],)
                + tuple(tuple(sorted(colors[u] for u in nbh[v])) for nbh in neighborhoods)
            )
            for v in range(num_nodes)
        ]
        if _partition(new) == _partition(colors):
            return ColorRefinement(tuple(new), rounds, dict(Counter(new)))
        colors = new
        rounds += 1


def wl1_refine(g: Graph, initial_colors=None) -> ColorRefinement:
    """Standard 1-WL color refinement over the adjacency neighborhoods."""
    return _refine(g.num_nodes, [adjacency_lists(g)], initial_colors)


def wl1_with_clique_augmentation(g: Graph) -> ColorRefinement:
    """1-WL refinement over the pair (adjacency, clique adjacency) jointly.

    The clique adjacency comes from the fundamental cycle basis of ``g``;
    each node's two neighbor multisets are hashed together, which is at
    least as discriminative as refining the entrywise OR of both matrices.
    """
    basis = cycle_basis(g)
    ac = clique_adjacency(basis, g.num_nodes).matrix
    ac_lists = [np.flatnonzero(ac[v]).tolist() for v in range(g.num_nodes)]
    return _refine(g.num_nodes, [adjacency_lists(g), ac_lists])


def wl1_distinguishes(g: Graph, h: Graph, augmented: bool = False) -> bool:
    run = wl1_with_clique_augmentation if augmented else wl1_refine
    return run(g).stable_histogram != run(h).stable_histogram


def _wl3_histogram(g: Graph) -> Counter:
    """Stable pair-color histogram of folklore 2-WL."""
    n = g.num_nodes
    a = adjacency_matrix(g)
    colors = {}
    for u in range(n):
        for v in range(n):
            colors[u, v] = 2 if u == v else (1 if a[u, v] else 0)
    while True:
        new = {}
        for u in range(n):
            for v in range(n):
                around = sorted((colors[u, w], colors[w, v]) for w in range(n))
                new[u, v] = _digest((colors[u, v], tuple(around)))
        if _partition(list(new.values())) == _partition(list(colors.values())):
            return Counter(new.values())
        colors = new


def wl3_distinguishes(g: Graph, h: Graph) -> bool:
    """True iff the 3-WL-equivalent pair refinement separates g and h."""
    for x in (g, h):
        if x.num_nodes > WL3_MAX_NODES:
            raise CapabilityError(
                f"pair refinement is limited to {WL3_MAX_NODES} nodes, got {x.num_nodes}"
            )
    return _wl3_histogram(g) != _wl3_histogram(h)


def chordless_cycles(g: Graph, max_len: int | None = None) -> list[tuple[int, ...]]:
    """All chordless (induced) cycles of length >= 3, each reported once.

    DFS over paths anchored at the cycle's minimum node, extended only with
    larger node ids, and emitted in one orientation (second node < last
    node).  A path is abandoned as soon as a chord would be forced.
    """
    n = g.num_nodes
    adj = [set(nbrs) for nbrs in adjacency_lists(g)]
    bound = max_len if max_len is not None else n
    if bound < 3:
        return []
    out = []
    for v0 in range(n):
        for v1 in sorted(adj[v0]):
            if v1 < v0:
                continue
            stack = [(v1, (v0, v1))]
            while stack:
                last, path = stack.pop()
                for w in sorted(adj[last]):
                    if w <= v0 or w in path:
                        continue
                    # a chord to any internal node kills both closure and extension
                    if any(w in adj[p] for p in path[1:-1]):
                        continue
                    if v0 in adj[w]:
                        if path[1] < w:
                            out.append(path + (w,))
                        continue
                    if len(path) + 1 < bound:
                        stack.append((w, path + (w,)))
    return out


def chordless_length_profile(g: Graph, max_len: int | None = None) -> dict[int, int]:
    return dict(sorted(Counter(len(c) for c in chordless_cycles(g, max_len)).items()))


def distinguish_by_cycles(g: Graph, h: Graph, max_len: int | None = None) -> Verdict:
    """Compare the chordless-cycle length classes of two graphs.

    A length present in exactly one graph witnesses a cycle without proper
    subcycles that the other graph cannot represent in any cycle basis.
    ``max_len`` truncates the enumeration; a difference found under a bound
    is conclusive, while agreement under a bound is only up to that bound.
    """
    if g.num_nodes != h.num_nodes or g.num_edges != h.num_edges:
        raise HypothesisError(
            "graphs must have equal node and edge counts "
            f"(got {g.num_nodes}/{g.num_edges} vs {h.num_nodes}/{h.num_edges})"
        )
    pg = chordless_length_profile(g, max_len)
    ph = chordless_length_profile(h, max_len)
    detail = {
        "chordless_profile_g": pg,
        "chordless_profile_h": ph,
        "basis_histogram_g": dict(Counter(len(c) for c in cycle_basis(g).cycles)),
        "basis_histogram_h": dict(Counter(len(c) for c in cycle_basis(h).cycles)),
        "max_len": max_len,
    }
    diff = sorted(set(pg) ^ set(ph))
    if diff:
        length = diff[0]
        side = "first" if length in pg else "second"
        return Verdict(
            True,
            f"chordless cycle length {length} occurs only in the {side} graph",
            detail,
        )
    scope = f"up to length {max_len}" if max_len is not None else "at every length"
    return Verdict(False, f"chordless cycle length sets agree {scope}", detail)


def _deletion_profiles(g: Graph):
    from .topology import delete_edge, delete_vertex

    vertex_profile = Counter()
    for v in range(g.num_nodes):
        residual = delete_vertex(g, v)
        vertex_profile[
            len(connected_components(residual)), euler_invariant(residual)
        ] += 1
    edge_profile = Counter()
    for e in g.edges:
        residual = delete_edge(g, e)
        edge_profile[
            len(connected_components(residual)), euler_invariant(residual)
        ] += 1
    return vertex_profile, edge_profile


def distinguish_by_biconnectivity(g: Graph, h: Graph) -> Verdict:
    """Compare multisets of (component count, cycle space dimension) over all
    single vertex deletions and all single edge deletions."""
    if g.num_nodes != h.num_nodes or g.num_edges != h.num_edges:
        raise HypothesisError("graphs must have equal node and edge counts")
    cg, ch = len(connected_components(g)), len(connected_components(h))
    if cg != ch:
        raise HypothesisError(f"graphs must have equal component counts ({cg} vs {ch})")
    vg, eg = _deletion_profiles(g)
    vh, eh = _deletion_profiles(h)
    detail = {
        "vertex_profile_g": sorted(vg.items()),
        "vertex_profile_h": sorted(vh.items()),
        "edge_profile_g": sorted(eg.items()),
        "edge_profile_h": sorted(eh.items()),
    }
    if vg != vh:
        return Verdict(True, "vertex-deletion profiles differ", detail)
    if eg != eh:
        return Verdict(True, "edge-deletion profiles differ", detail)
    return Verdict(False, "vertex- and edge-deletion profiles agree", detail)


@dataclass(frozen=True)
class RrwpEncoding:
    """Stacked random-walk powers: tensor[:, :, l] = M^l with M = D^-1 A."""

    steps: int
    tensor: np.ndarray

    def __post_init__(self):
        rowsums = self.tensor.sum(axis=1)
        if not np.allclose(rowsums, 1.0, atol=1e-9):
            raise TopoformerError("random-walk slices must be row-stochastic")


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray

    def __post_init__(self):
        if not math.isclose(float(self.pi.sum()), 1.0, abs_tol=1e-9):
            raise TopoformerError("stationary distribution must sum to 1")


@dataclass(frozen=True)
class ConvergenceReport:
    deviations: tuple[float, ...]
    fitted_rate: float
    envelope_constant: float


def _walk_matrix(g: Graph) -> np.ndarray:
    degs = np.array(degree_sequence(g), dtype=float)
    if np.any(degs == 0):
        raise ParameterError("graph has an isolated node; walk matrix undefined")
    return adjacency_matrix(g) / degs[:, None]


def rrwp(g: Graph, K: int) -> RrwpEncoding:
    """Random-walk probability stack [I, M, M^2, ..., M^(K-1)]."""
    if K < 1:
        raise ParameterError(f"K must be >= 1, got {K}")
    m = _walk_matrix(g)
    n = g.num_nodes
    tensor = np.empty((n, n, K))
    power = np.eye(n)
    for l in range(K):
        tensor[:, :, l] = power
        if l + 1 < K:
            power = power @ m
    return RrwpEncoding(K, tensor)


def stationary(g: Graph) -> StationaryDistribution:
    """pi_j = degree(j) / (2 |E|), the random-walk stationary distribution."""
    degs = np.array(degree_sequence(g), dtype=float)
    if np.any(degs == 0):
        raise ParameterError("graph has an isolated node; stationary distribution undefined")
    return StationaryDistribution(degs / (2.0 * g.num_edges))


def _is_bipartite(g: Graph) -> bool:
    adj = adjacency_lists(g)
    color = [-1] * g.num_nodes
    for root in range(g.num_nodes):
        if color[root] != -1:
            continue
        color[root] = 0
        queue = [root]
        while queue:
            x = queue.pop()
            for y in adj[x]:
                if color[y] == -1:
                    color[y] = 1 - color[x]
                    queue.append(y)
                elif color[y] == color[x]:
                    return False
    return True


def rrwp_convergence_report(g: Graph, K: int) -> ConvergenceReport:
    """Per-step worst-entry deviation from the stationary distribution plus a
    fitted geometric decay rate.

    Requires a connected, non-bipartite graph (an odd cycle); on a bipartite
    graph the walk is periodic and never converges.
    """
    if len(connected_components(g)) != 1:
        raise ParameterError("graph must be connected")
    if _is_bipartite(g):
        raise ParameterError("graph is bipartite; the walk is periodic and does not converge")
    if K < 2:
        raise ParameterError(f"need K >= 2 to fit a rate, got {K}")
    m = _walk_matrix(g)
    pi = stationary(g).pi
    deviations = []
    power = np.eye(g.num_nodes)
    for _ in range(K):
        deviations.append(float(np.abs(power - pi[None, :]).max()))
        power = power @ m
    steps = [l for l, d in enumerate(deviations) if d > 1e-12]
    if len(steps) >= 2:
        xs = np.array(steps, dtype=float)
        ys = np.log([deviations[l] for l in steps])
        slope = np.polyfit(xs, ys, 1)[0]
        rate = float(np.exp(slope))
    else:
        rate = 0.0
    if not 0.0 <= rate < 1.0:
        raise TopoformerError(f"fitted rate {rate:.6f} is not a geometric decay")
    envelope = max(
        (deviations[l] / rate**l for l in steps), default=0.0
    ) if rate > 0 else (deviations[0] if deviations else 0.0)
    for l in steps:
        if deviations[l] > envelope * rate**l * (1 + 1e-9):
            raise TopoformerError("deviation exceeds the fitted geometric envelope")
    return ConvergenceReport(tuple(deviations), rate, float(envelope))
