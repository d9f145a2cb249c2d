"""Independent brute-force oracles used by the test suite.

Everything here is deliberately naive and self-contained so the tests do not
share code paths with the library under test.
"""

from itertools import combinations, permutations

import numpy as np


def brute_components(num_nodes, edges):
    """Connected components by repeated sweeps over the edge list."""
    label = list(range(num_nodes))
    changed = True
    while changed:
        changed = False
        for u, v in edges:
            lo = min(label[u], label[v])
            if label[u] != lo or label[v] != lo:
                label[u] = label[v] = lo
                changed = True
    roots = {}
    for i in range(num_nodes):
        # compress chains: walk labels down to the fixed point
        r = i
        while label[r] != r:
            r = label[r]
        roots.setdefault(r, []).append(i)
    return list(roots.values())


def brute_articulation(num_nodes, edges):
    """Delete each vertex in turn and count components of what remains."""
    base = len(brute_components(num_nodes, edges))
    out = []
    for v in range(num_nodes):
        kept = [(a, b) for a, b in edges if a != v and b != v]
        remaining = [x for x in range(num_nodes) if x != v]
        remap = {x: i for i, x in enumerate(remaining)}
        comps = brute_components(num_nodes - 1, [(remap[a], remap[b]) for a, b in kept])
        if len(comps) > base:
            out.append(v)
    return out


def brute_bridges(num_nodes, edges):
    base = len(brute_components(num_nodes, edges))
    out = []
    for e in edges:
        kept = [x for x in edges if x != e]
        if len(brute_components(num_nodes, kept)) > base:
            out.append(e)
    return out


def gf2_cycle_rank(num_nodes, edges, cycles):
    """Rank over GF(2) of the edge-incidence vectors of the given cycles."""
    index = {tuple(sorted(e)): i for i, e in enumerate(edges)}
    rows = []
    for cyc in cycles:
        vec = 0
        for a, b in zip(cyc, cyc[1:] + (cyc[0],)):
            vec ^= 1 << index[tuple(sorted((a, b)))]
        rows.append(vec)
    basis = []
    for row in rows:
        cur = row
        for b in basis:
            cur = min(cur, cur ^ b)
        if cur:
            basis.append(cur)
    return len(basis)


def brute_isomorphic(g_edges, h_edges, num_nodes):
    """Exhaustive permutation search (num_nodes <= 8)."""
    ge = {tuple(sorted(e)) for e in g_edges}
    he = {tuple(sorted(e)) for e in h_edges}
    if len(ge) != len(he):
        return False
    for perm in permutations(range(num_nodes)):
        if {tuple(sorted((perm[a], perm[b]))) for a, b in ge} == he:
            return True
    return False


def brute_simple_cycles(num_nodes, edges):
    """All simple cycles as canonical vertex tuples (tiny graphs only)."""
    adj = {i: set() for i in range(num_nodes)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    found = set()

    def canonical(path):
        k = len(path)
        best = None
        for i in range(k):
            for seq in (path[i:] + path[:i], tuple(reversed(path[i:] + path[:i]))):
                if best is None or seq < best:
                    best = seq
        return best

    def extend(path):
        last = path[-1]
        for w in adj[last]:
            if w == path[0] and len(path) >= 3:
                found.add(canonical(tuple(path)))
            elif w not in path and w > path[0]:
                extend(path + [w])

    for start in range(num_nodes):
        extend([start])
    return found


def brute_chordless_cycles(num_nodes, edges):
    adj = {i: set() for i in range(num_nodes)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    out = set()
    for cyc in brute_simple_cycles(num_nodes, edges):
        chord = False
        k = len(cyc)
        for i, j in combinations(range(k), 2):
            neighbors_on_cycle = (j - i) % k in (1, k - 1)
            if not neighbors_on_cycle and cyc[j] in adj[cyc[i]]:
                chord = True
                break
        if not chord:
            out.add(cyc)
    return out


def random_graph(rng, max_nodes=12, min_nodes=2, p=None):
    """Erdos-Renyi style random graph as (num_nodes, edge tuple)."""
    n = rng.randint(min_nodes, max_nodes)
    prob = p if p is not None else rng.uniform(0.15, 0.6)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < prob]
    return n, tuple(edges)


def finite_difference(fn, arrays, which, eps=1e-4):
    """Central finite differences of scalar fn w.r.t. arrays[which]."""
    base = arrays[which]
    grad = np.zeros_like(base)
    flat = base.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = fn(*arrays)
        flat[i] = orig - eps
        lo = fn(*arrays)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2 * eps)
    return grad
