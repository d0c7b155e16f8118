"""Jointrees with leaf-hosted families: construction from elimination
orders, separator/cluster/width computation, the base-to-twin jointree
conversion, and the direct twin separator lifting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .elimination import EliminationOrder, eliminate
from .model import Dag, ModelError
from .worlds import moral_graph, twin_name


def edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class Jointree:
    """Tree plus family hosting. Only leaves host; each leaf hosts exactly
    one family; a family may be hosted at several leaves (replicas).

    For twin jointrees produced by `make_twin_jointree`, `edge_class`
    labels every edge duplicated / duplicate / invariant,
    `duplicate_base` maps each duplicate edge to the edge it copies, and
    `var_dup` maps every base variable to its duplicate (roots to
    themselves).
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    hosts: dict[str, tuple[str, ...]]  # family child id -> host leaves
    families: dict[str, frozenset[str]]  # family child id -> members
    edge_class: dict[tuple[str, str], str] | None = None
    duplicate_base: dict[tuple[str, str], tuple[str, str]] | None = None
    var_dup: dict[str, str] | None = None

    def neighbors(self) -> dict[str, list[str]]:
        nb: dict[str, list[str]] = {v: [] for v in self.nodes}
        for a, b in self.edges:
            nb[a].append(b)
            nb[b].append(a)
        return nb

    def leaf_family(self) -> dict[str, str]:
        """Map each host leaf to the single family child it hosts."""
        out: dict[str, str] = {}
        for child, leaves in self.hosts.items():
            for leaf in leaves:
                if leaf in out:
                    raise ModelError(f"leaf {leaf!r} hosts two families")
                out[leaf] = child
        return out

    def check(self) -> None:
        """Raise on any violated jointree invariant."""
        nb = self.neighbors()
        if len(self.edges) != len(self.nodes) - 1:
            raise ModelError("tree must have n-1 edges")
        if self.nodes:
            seen = {self.nodes[0]}
            stack = [self.nodes[0]]
            while stack:
                for u in nb[stack.pop()]:
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
            if len(seen) != len(self.nodes):
                raise ModelError("tree is not connected")
        lf = self.leaf_family()
        for leaf in lf:
            if len(nb[leaf]) > 1:
                raise ModelError(f"host {leaf!r} is not a leaf")
        for v in self.nodes:
            if len(nb[v]) <= 1 and v not in lf:
                raise ModelError(f"leaf {v!r} hosts no family")
        for child in self.families:
            if not self.hosts.get(child):
                raise ModelError(f"family of {child!r} has no host")


@dataclass(frozen=True)
class SeparatorAssignment:
    separators: dict[tuple[str, str], frozenset[str]]
    clusters: dict[str, frozenset[str]]
    width: int
    normalized_width: float


def _log2_big(total: int) -> float:
    shift = max(total.bit_length() - 53, 0)
    return math.log2(total >> shift) + shift


def _widths(clusters: dict[str, frozenset[str]]) -> tuple[int, float]:
    sizes = [len(c) for c in clusters.values()]
    width = max(sizes) - 1 if sizes else 0
    normalized = _log2_big(sum(1 << s for s in sizes)) if sizes else 0.0
    return width, normalized


def _assemble(jt: Jointree, separators) -> SeparatorAssignment:
    lf = jt.leaf_family()
    nb = jt.neighbors()
    clusters = {}
    for v in jt.nodes:
        if v in lf and len(nb[v]) <= 1:
            clusters[v] = jt.families[lf[v]]
        else:
            c: frozenset[str] = frozenset()
            for u in nb[v]:
                c |= separators[edge_key(v, u)]
            clusters[v] = c
    width, normalized = _widths(clusters)
    return SeparatorAssignment(dict(separators), clusters, width, normalized)


def classical_separators(jt: Jointree) -> SeparatorAssignment:
    """S_ij = variables hosted on both sides of edge (i, j)."""
    lf = jt.leaf_family()
    nb = jt.neighbors()
    if not jt.nodes:
        return SeparatorAssignment({}, {}, 0, 0.0)
    hosted = {leaf: jt.families[child] for leaf, child in lf.items()}
    root = jt.nodes[0]
    parent: dict[str, str | None] = {root: None}
    order = [root]
    for v in order:
        for u in nb[v]:
            if u not in parent:
                parent[u] = v
                order.append(u)
    below: dict[str, frozenset[str]] = {}
    for v in reversed(order):
        s = hosted.get(v, frozenset())
        for u in nb[v]:
            if parent.get(u) == v:
                s |= below[u]
        below[v] = s
    above: dict[str, frozenset[str]] = {root: frozenset()}
    for v in order:
        kids = [u for u in nb[v] if parent.get(u) == v]
        base = above[v] | hosted.get(v, frozenset())
        for u in kids:
            s = base
            for w in kids:
                if w is not u:
                    s |= below[w]
            above[u] = s
    separators = {
        edge_key(v, parent[v]): below[v] & above[v]
        for v in order
        if parent[v] is not None
    }
    return _assemble(jt, separators)


def jointree_from_order(dag: Dag, order: EliminationOrder) -> Jointree:
    """Cluster-tree construction: link each elimination cluster to the
    cluster of its earliest-eliminated remaining member, then hang one
    host leaf per family off a cluster that contains it."""
    cs = eliminate(moral_graph(dag), order)
    pos = {v: i for i, v in enumerate(order.sequence)}
    n = len(order.sequence)
    cname = [f"c{i}" for i in range(n)]
    nodes = list(cname)
    edges = []
    linked = [False] * n
    for i in range(n):
        rest = [pos[v] for v in cs.clusters[i] if v != order.sequence[i]]
        if rest:
            j = min(rest)
            edges.append(edge_key(cname[i], cname[j]))
            linked[i] = True
    # connect remaining components (clusters that ended a component) in a chain
    tails = [i for i in range(n) if not linked[i]]
    for a, b in zip(tails, tails[1:]):
        edges.append(edge_key(cname[a], cname[b]))

    families = {v: frozenset((v,) + dag.parents[v]) for v in dag.nodes}
    hosts = {}
    for v in dag.nodes:
        i = min(pos[m] for m in families[v])
        assert families[v] <= cs.clusters[i]
        leaf = f"f_{v}"
        nodes.append(leaf)
        edges.append(edge_key(leaf, cname[i]))
        hosts[v] = (leaf,)

    # prune childless skeleton leaves; hosts must be the only leaves
    host_leaves = {leaf for hs in hosts.values() for leaf in hs}
    nodes_set = set(nodes)
    edge_set = set(edges)
    changed = True
    while changed and len(nodes_set) > 1:
        changed = False
        deg: dict[str, int] = {v: 0 for v in nodes_set}
        for a, b in edge_set:
            deg[a] += 1
            deg[b] += 1
        for v in list(nodes_set):
            if deg[v] <= 1 and v not in host_leaves and len(nodes_set) > 1:
                nodes_set.remove(v)
                edge_set = {e for e in edge_set if v not in e}
                changed = True
    nodes = [v for v in nodes if v in nodes_set]
    edges = sorted(edge_set)
    jt = Jointree(tuple(nodes), tuple(edges), hosts, families)
    jt.check()
    return jt


def _twin_families(base: Dag) -> dict[str, frozenset[str]]:
    roots = set(base.roots())
    fams = {v: frozenset((v,) + base.parents[v]) for v in base.nodes}
    for v in base.nodes:
        if v not in roots:
            fams[twin_name(v)] = frozenset(
                [twin_name(v)] + [p if p in roots else twin_name(p) for p in base.parents[v]]
            )
    return fams


def make_twin_jointree(jt: Jointree, base: Dag) -> Jointree:
    """Convert a base jointree into a twin jointree by duplicating the
    maximal subtrees whose leaves host only internal families."""
    roots = set(base.roots())
    families = _twin_families(base)
    var_dup = {v: (v if v in roots else twin_name(v)) for v in base.nodes}

    lf = jt.leaf_family()
    if all(child in roots for child in lf.values()):
        return replace(
            jt,
            edge_class={e: "invariant" for e in jt.edges},
            duplicate_base={},
            var_dup=var_dup,
        )

    nodes = list(jt.nodes)
    edges = [edge_key(*e) for e in jt.edges]
    hosts = {c: list(hs) for c, hs in jt.hosts.items()}
    nb = {v: set() for v in nodes}
    for a, b in edges:
        nb[a].add(b)
        nb[b].add(a)

    if len(nodes) == 2:
        # no internal tree node to serve as the initial root
        aux = "aux0"
        a, b = edges[0]
        edges = [edge_key(a, aux), edge_key(aux, b)]
        nodes.append(aux)
        nb = {a: {aux}, b: {aux}, aux: {a, b}}

    root = next(v for v in nodes if len(nb[v]) > 1)
    parent: dict[str, str | None] = {root: None}
    order = [root]
    for v in order:
        for u in sorted(nb[v]):
            if u not in parent:
                parent[u] = v
                order.append(u)
    children = {v: [u for u in sorted(nb[v]) if parent.get(u) == v] for v in nodes}

    edge_class: dict[tuple[str, str], str] = {}
    duplicate_base: dict[tuple[str, str], tuple[str, str]] = {}

    def leaves_below(r):
        out, stack = [], [r]
        while stack:
            v = stack.pop()
            kids = children[v]
            if not kids:
                out.append(v)
            stack.extend(kids)
        return out

    def duplicate_subtree(r, p):
        sub = [r]
        stack = [r]
        while stack:
            v = stack.pop()
            for k in children[v]:
                sub.append(k)
                stack.append(k)
        dup = {v: v + "'" for v in sub}
        nodes.extend(dup[v] for v in sub)
        inner = [(v, k) for v in sub for k in children[v]]
        for a, b in inner + [(p, r)]:
            e = edge_key(a, b)
            da, db = dup.get(a, a), dup.get(b, b)
            de = edge_key(da, db)
            edges.append(de)
            edge_class[e] = "duplicated"
            edge_class[de] = "duplicate"
            duplicate_base[de] = e
        for v in sub:
            if v in lf:
                child = lf[v]
                hosts.setdefault(twin_name(child), []).append(dup[v])

    def visit(r, p):
        ls = leaves_below(r) if children[r] else [r]
        kinds = {lf[l] in roots for l in ls}
        if kinds == {True}:
            return
        if kinds == {False}:
            duplicate_subtree(r, p)
            return
        for k in children[r]:
            visit(k, r)

    visit(root, None)
    for e in edges:
        edge_class.setdefault(e, "invariant")

    out = Jointree(
        tuple(nodes),
        tuple(edges),
        {c: tuple(hs) for c, hs in hosts.items()},
        families,
        edge_class=edge_class,
        duplicate_base=duplicate_base,
        var_dup=var_dup,
    )
    out.check()
    return out


def _primed(s: frozenset[str], var_dup: dict[str, str]) -> frozenset[str]:
    return frozenset(var_dup[v] for v in s)


def lift_separators(base_separators, twin_jt: Jointree) -> dict:
    """Separator lifting shared by the classical (Thm-2) and thinned
    (Thm-3) paths: duplicated edges keep S, duplicate edges carry S',
    invariant edges carry S union S'."""
    if twin_jt.edge_class is None or twin_jt.var_dup is None:
        raise ModelError("twin jointree lacks edge classes; use make_twin_jointree")
    out = {}
    for e in twin_jt.edges:
        cls = twin_jt.edge_class[e]
        if cls == "duplicated":
            out[e] = base_separators[e]
        elif cls == "duplicate":
            out[e] = _primed(base_separators[twin_jt.duplicate_base[e]], twin_jt.var_dup)
        else:
            s = base_separators[e]
            out[e] = s | _primed(s, twin_jt.var_dup)
    return out


def twin_separators_direct(base_seps: SeparatorAssignment, twin_jt: Jointree) -> SeparatorAssignment:
    """Thm-2 style twin separators computed from the base separators."""
    return _assemble(twin_jt, lift_separators(base_seps.separators, twin_jt))
