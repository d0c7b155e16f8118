"""Family replication, the two separator-thinning rules applied to
fixpoint, lifting thinned base separators to thinned twin separators,
and the width report for the replicate-and-thin pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .elimination import EliminationOrder
from .jointree import (
    Jointree,
    SeparatorAssignment,
    _assemble,
    classical_separators,
    edge_key,
    jointree_from_order,
    lift_separators,
)
from .model import Dag, ModelError


@dataclass(frozen=True)
class ThinnedJointree:
    jointree: Jointree
    thinned: SeparatorAssignment
    functional_set: frozenset[str]
    log: tuple[dict, ...]  # removal audit: {edge, variable, rule, witness}


def replicate(jt: Jointree, dag: Dag, chain_bound: int, functional=None) -> Jointree:
    """Host functional families at extra leaves placed next to the hosts
    of their children's families, so chains of functional variables get
    replicated up to depth chain_bound."""
    if chain_bound < 0:
        raise ModelError("chain_bound must be >= 0")
    functional = set(dag.internals() if functional is None else functional)
    topo = dag.topological_order()
    assert topo is not None

    nodes = list(jt.nodes)
    edges = [edge_key(*e) for e in jt.edges]
    hosts = {c: list(hs) for c, hs in jt.hosts.items()}
    nb: dict[str, set[str]] = {v: set() for v in nodes}
    for a, b in edges:
        nb[a].add(b)
        nb[b].add(a)
    leaf_of = jt.leaf_family()
    host_depth = {leaf: 0 for leaf in leaf_of}
    counter = 0

    def attach_point(h: str) -> str | None:
        """Internal node next to host leaf h, inserting an auxiliary node
        when h's only neighbor is itself a host leaf."""
        nonlocal counter
        if not nb[h]:
            return None
        if len(nb[h]) != 1:
            raise ModelError(f"host {h!r} is not a leaf")
        (u,) = nb[h]
        if u in leaf_of:
            aux = f"rx{counter}"
            counter += 1
            nodes.append(aux)
            edges.remove(edge_key(h, u))
            edges.append(edge_key(h, aux))
            edges.append(edge_key(aux, u))
            nb[h] = {aux}
            nb[u] = (nb[u] - {h}) | {aux}
            nb[aux] = {h, u}
            return aux
        return u

    for x in reversed(topo):
        if x not in functional:
            continue
        kids = sorted(dag.children_of(x))
        for y in kids:
            # one replica per (family, child): extend the deepest chain
            eligible = [h for h in hosts.get(y, ()) if host_depth[h] < chain_bound]
            if not eligible:
                continue
            h = min(eligible, key=lambda l: (-host_depth[l], l))
            depth = host_depth[h] + 1
            u = attach_point(h)
            if u is None:
                continue
            if any(w in leaf_of and leaf_of[w] == x for w in nb[u]):
                continue  # a host of f_x already sits here
            leaf = f"r{counter}_{x}"
            counter += 1
            nodes.append(leaf)
            edges.append(edge_key(leaf, u))
            nb[leaf] = {u}
            nb[u].add(leaf)
            hosts[x].append(leaf)
            leaf_of[leaf] = x
            host_depth[leaf] = depth

    out = replace(
        jt,
        nodes=tuple(nodes),
        edges=tuple(sorted(edges)),
        hosts={c: tuple(hs) for c, hs in hosts.items()},
    )
    out.check()
    return out


def thin(jt: Jointree, functional) -> ThinnedJointree:
    """Apply the two thinning rules to exhaustion, sweeping edges in
    canonical order, rule 1 before rule 2, until a pass removes nothing.

    A removal only commits if it keeps message passing sound: every side
    of the edge whose hosted families mention X must contain a host of
    f_X that can re-derive X from the remaining separator (parents in
    the separator or themselves re-derivable the same way). Every
    removal is logged with its justification."""
    functional = frozenset(functional)
    base = classical_separators(jt)
    sep: dict[tuple[str, str], set[str]] = {e: set(s) for e, s in base.separators.items()}
    nb = jt.neighbors()
    hosts = jt.hosts
    lf = jt.leaf_family()
    var_edges: dict[str, set[tuple[str, str]]] = {}
    for e, s in sep.items():
        for v in s:
            var_edges.setdefault(v, set()).add(e)
    log: list[dict] = []

    def sound(x: str, e: tuple[str, str]) -> bool:
        """Would removing x from e keep every x-region anchored?

        An x-region is a maximal set of tree nodes connected by edges
        whose separators still carry x, together with the leaves whose
        hosted families mention x. The sum over x inside a region is
        exact only if the region holds a copy of f_x, so each region
        must keep at least one host of f_x."""
        x_edges = var_edges[x] - {e}
        mention = {l for l in lf if x in jt.families[lf[l]]}
        comp: dict[str, int] = {}
        cid = 0
        for start in sorted({n for ed in x_edges for n in ed} | mention):
            if start in comp:
                continue
            stack = [start]
            comp[start] = cid
            while stack:
                v = stack.pop()
                for u in nb[v]:
                    if u not in comp and edge_key(v, u) in x_edges:
                        comp[u] = cid
                        stack.append(u)
            cid += 1
        anchored = {comp[h] for h in hosts.get(x, ()) if h in comp}
        return all(comp[l] in anchored for l in mention)

    def rule1(x: str, e: tuple[str, str]):
        xhosts = hosts.get(x, ())
        if len(xhosts) < 2:
            return None
        # components of the X-separator edge subgraph, split at e
        adj: dict[str, list[str]] = {}
        for a, b in var_edges[x]:
            if (a, b) == e:
                continue
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)

        def side(start):
            seen = {start}
            stack = [start]
            while stack:
                for u in adj.get(stack.pop(), ()):
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
            return seen

        left, right = side(e[0]), side(e[1])
        lh = sorted(h for h in xhosts if h in left)
        rh = sorted(h for h in xhosts if h in right)
        if lh and rh:
            return (lh[0], rh[0])
        return None

    def rule2(x: str, e: tuple[str, str]):
        for end in e:
            if not any(
                edge_key(end, u) != e and x in sep[edge_key(end, u)]
                for u in nb[end]
            ):
                return end
        return None

    changed = True
    while changed:
        changed = False
        for e in sorted(sep):
            for x in sorted(sep[e]):
                if x not in functional:
                    continue
                witness = rule1(x, e)
                rule = 1
                if witness is None:
                    witness = rule2(x, e)
                    rule = 2
                if witness is None or not sound(x, e):
                    continue
                sep[e].discard(x)
                var_edges[x].discard(e)
                log.append({"edge": e, "variable": x, "rule": rule, "witness": witness})
                changed = True

    assignment = _assemble(jt, {e: frozenset(s) for e, s in sep.items()})
    return ThinnedJointree(jt, assignment, functional, tuple(log))


def thinned_twin_separators(base: ThinnedJointree, twin_jt: Jointree) -> ThinnedJointree:
    """Thm-3 lifting: thinned base separators carry over to the twin
    jointree by the duplicated/duplicate/invariant edge rules."""
    lifted = lift_separators(base.thinned.separators, twin_jt)
    assignment = _assemble(twin_jt, lifted)
    var_dup = twin_jt.var_dup or {}
    functional = base.functional_set | frozenset(
        var_dup[v] for v in base.functional_set if v in var_dup
    )
    return ThinnedJointree(twin_jt, assignment, functional, ())


@dataclass(frozen=True)
class WidthReport:
    classical_width: int
    replicated_width: int
    thinned_width: int
    normalized_width: float
    thinned_normalized_width: float


def causal_width_report(
    dag: Dag,
    functional,
    chain_bound: int,
    heuristic_order: EliminationOrder,
) -> WidthReport:
    """Widths along the jointree -> replicate -> thin pipeline; exposes
    all three so the w < w_t <= w_r pathology stays observable."""
    jt = jointree_from_order(dag, heuristic_order)
    base = classical_separators(jt)
    rep = replicate(jt, dag, chain_bound, functional) if chain_bound > 0 else jt
    rep_width = classical_separators(rep).width if chain_bound > 0 else base.width
    thinned = thin(rep, functional)
    return WidthReport(
        classical_width=base.width,
        replicated_width=rep_width,
        thinned_width=thinned.thinned.width,
        normalized_width=base.normalized_width,
        thinned_normalized_width=thinned.thinned.normalized_width,
    )
