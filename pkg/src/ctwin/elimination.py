"""Elimination orders: the elimination process, minfill, order lifting to
twin/N-world networks, and exact treewidth for small graphs.

Internally graphs are converted to bitmask adjacency (one int per node)
so that fill-in and cluster bookkeeping stay cheap on the benchmark
sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Dag, ModelError
from .worlds import MoralGraph, twin_name, world_name


@dataclass(frozen=True)
class EliminationOrder:
    sequence: tuple[str, ...]


@dataclass(frozen=True)
class ClusterSequence:
    clusters: tuple[frozenset[str], ...]
    width: int


def _bit_adjacency(g: MoralGraph):
    index = {v: i for i, v in enumerate(g.nodes)}
    adj = [0] * len(g.nodes)
    for v, nbs in g.adjacency.items():
        m = 0
        for u in nbs:
            m |= 1 << index[u]
        adj[index[v]] = m
    return index, adj


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def eliminate(g: MoralGraph, order: EliminationOrder) -> ClusterSequence:
    """Replay the elimination process on a working copy of g and collect
    the induced cluster sequence."""
    if sorted(order.sequence) != sorted(g.nodes):
        raise ModelError("order is not a permutation of the graph's nodes")
    index, adj = _bit_adjacency(g)
    clusters = []
    width = 0
    for v in order.sequence:
        i = index[v]
        nb = adj[i]
        cluster = frozenset([v] + [g.nodes[j] for j in _bits(nb)])
        clusters.append(cluster)
        width = max(width, len(cluster) - 1)
        bit_i = 1 << i
        for j in _bits(nb):
            adj[j] = (adj[j] | nb) & ~((1 << j) | bit_i)
        adj[i] = 0
    return ClusterSequence(tuple(clusters), width)


def minfill_order(g: MoralGraph) -> EliminationOrder:
    """Greedy minfill. Ties: smallest resulting cluster, then smallest id."""
    index, adj = _bit_adjacency(g)
    nodes = g.nodes
    alive = set(range(len(nodes)))
    seq = []
    while alive:
        best = None
        for i in sorted(alive, key=lambda k: nodes[k]):
            nb = adj[i]
            fill = 0
            for j in _bits(nb):
                fill += bin(nb & ~adj[j] & ~(1 << j)).count("1")
            fill //= 2
            key = (fill, bin(nb).count("1"))
            if best is None or key < best[0]:
                best = (key, i)
        i = best[1]
        nb = adj[i]
        bit_i = 1 << i
        for j in _bits(nb):
            adj[j] = (adj[j] | nb) & ~((1 << j) | bit_i)
        adj[i] = 0
        alive.remove(i)
        seq.append(nodes[i])
    return EliminationOrder(tuple(seq))


def twin_order(order: EliminationOrder, base: Dag) -> EliminationOrder:
    """Replace each non-root X in the order by X, X'; roots appear once."""
    roots = set(base.roots())
    seq = []
    for v in order.sequence:
        seq.append(v)
        if v not in roots:
            seq.append(twin_name(v))
    return EliminationOrder(tuple(seq))


def n_world_order(order: EliminationOrder, base: Dag, shared_roots, n_worlds: int) -> EliminationOrder:
    """Replace each non-shared X by its N world copies, consecutively."""
    roots = set(base.roots())
    shared = set(shared_roots)
    bad = shared - roots
    if bad:
        raise ModelError(f"shared set contains non-root ids: {sorted(bad)}")
    seq = []
    for v in order.sequence:
        if v in shared:
            seq.append(v)
        else:
            seq.extend(world_name(v, j) for j in range(1, n_worlds + 1))
    return EliminationOrder(tuple(seq))


def exact_treewidth(g: MoralGraph, node_limit: int = 12) -> int:
    """Minimum width over all elimination orders, by branch-and-bound over
    eliminated-node sets (the filled graph depends only on the set)."""
    n = len(g.nodes)
    if n > node_limit:
        raise ModelError(f"graph has {n} nodes, exceeds limit {node_limit}")
    if n == 0:
        return 0
    _, adj0 = _bit_adjacency(g)
    upper = eliminate(g, minfill_order(g)).width
    full = (1 << n) - 1
    seen: dict[int, int] = {}

    def search(adj, done: int, worst: int, best: int) -> int:
        if done == full:
            return worst
        prev = seen.get(done)
        if prev is not None and prev <= worst:
            return best
        seen[done] = worst
        # candidates sorted by current degree: cheap most-promising-first
        cand = sorted(
            (i for i in range(n) if not done >> i & 1),
            key=lambda i: bin(adj[i]).count("1"),
        )
        for i in cand:
            size = bin(adj[i]).count("1")  # cluster size - 1
            w = max(worst, size)
            if w >= best:
                continue
            nb = adj[i]
            nxt = list(adj)
            bit_i = 1 << i
            for j in _bits(nb):
                nxt[j] = (nxt[j] | nb) & ~((1 << j) | bit_i)
            nxt[i] = 0
            best = min(best, search(nxt, done | bit_i, w, best))
        return best

    return search(adj0, 0, 0, upper)
