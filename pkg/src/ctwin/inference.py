"""Factor arithmetic, variable elimination, jointree propagation over
classical or thinned separators, the counterfactual query pipeline, and
brute-force oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from math import prod

import numpy as np

from .elimination import EliminationOrder, eliminate, minfill_order, n_world_order, twin_order
from .jointree import Jointree, SeparatorAssignment, classical_separators, edge_key, jointree_from_order, make_twin_jointree
from .model import Evidence, Factor, ModelError, Scm, scm_factors
from .thinning import ThinnedJointree, replicate, thin, thinned_twin_separators
from .worlds import WorldMap, moral_graph, mutilate, n_world_network, twin_network


class ZeroEvidenceError(ModelError):
    """Conditional query against evidence of probability zero."""


@dataclass(frozen=True)
class CounterfactualQuery:
    world_count: int
    shared_roots: frozenset[str]
    observations: tuple[Evidence, ...]  # one per world
    interventions: tuple[Evidence, ...]  # one per world
    target: tuple[tuple[int, str, int], ...]  # (world, variable, state)
    mode: str = "conditional"  # "conditional" | "joint"

    def __post_init__(self):
        if self.world_count < 1:
            raise ModelError("world count must be >= 1")
        if len(self.observations) != self.world_count or len(self.interventions) != self.world_count:
            raise ModelError("need one observation/intervention set per world")
        for w, _, _ in self.target:
            if not (1 <= w <= self.world_count):
                raise ModelError(f"target world {w} out of range")
        if self.mode not in ("conditional", "joint"):
            raise ModelError(f"unknown query mode {self.mode!r}")


@dataclass(frozen=True)
class InferenceResult:
    value: float
    evidence_probability: float
    method: str


# ---------------------------------------------------------------- factors

def multiply(a: Factor, b: Factor) -> Factor:
    scope = a.scope + tuple(v for v in b.scope if v not in a.scope)
    av = a.values.reshape(a.values.shape + (1,) * (len(scope) - len(a.scope)))
    perm = [b.scope.index(v) if v in b.scope else None for v in scope]
    bshape = tuple(
        b.values.shape[p] if p is not None else 1 for p in perm
    )
    src = [p for p in perm if p is not None]
    bv = np.transpose(b.values, src).reshape(bshape)
    return Factor(scope, av * bv)


def sum_out(f: Factor, v: str) -> Factor:
    if v not in f.scope:
        return f
    axis = f.scope.index(v)
    return Factor(tuple(x for x in f.scope if x != v), f.values.sum(axis=axis))


def reduce_factor(f: Factor, e: Evidence) -> Factor:
    """Select the evidence-consistent slice and drop those variables."""
    idx = tuple(
        e.assignments[v] if v in e.assignments else slice(None) for v in f.scope
    )
    scope = tuple(v for v in f.scope if v not in e.assignments)
    return Factor(scope, f.values[idx])


def factor_value(f: Factor) -> float:
    if f.scope:
        raise ModelError("factor still has free variables")
    return float(f.values)


# ---------------------------------------------------------------- VE

def _check_states(scm: Scm, e: Evidence):
    for v, s in e.items():
        if v not in scm.variables:
            raise ModelError(f"unknown variable {v!r}")
        if not (0 <= s < scm.card(v)):
            raise ModelError(f"state {s} out of range for {v!r}")


def _eliminate_all(factors: list[Factor], order: tuple[str, ...]) -> tuple[float, int]:
    """Sum out every variable in order; returns (value, peak scope size)."""
    peak = max((len(f.scope) for f in factors), default=0)
    pool = list(factors)
    for v in order:
        touching = [f for f in pool if v in f.scope]
        if not touching:
            continue
        pool = [f for f in pool if v not in f.scope]
        f = touching[0]
        for g in touching[1:]:
            f = multiply(f, g)
        peak = max(peak, len(f.scope))
        pool.append(sum_out(f, v))
    out = 1.0
    for f in pool:
        out *= factor_value(f)
    return out, peak


def ve_query(
    scm: Scm,
    evidence: Evidence,
    order: EliminationOrder,
    target: Evidence,
    mode: str = "conditional",
) -> InferenceResult:
    """Pr(target, evidence) and Pr(evidence) by variable elimination.

    The largest intermediate factor is asserted to stay within the
    order's width + 1 (the complexity contract made checkable)."""
    _check_states(scm, evidence)
    _check_states(scm, target)
    if set(order.sequence) != set(scm.dag.nodes):
        raise ModelError("order does not cover the network's variables")
    width = eliminate(moral_graph(scm.dag), order).width
    factors = scm_factors(scm)

    both = Evidence({**evidence.assignments, **target.assignments})
    for v in both.assignments:
        if v in evidence.assignments and v in target.assignments:
            if evidence.assignments[v] != target.assignments[v]:
                return InferenceResult(0.0, _prob(factors, order, evidence, width), "ve")

    p_both = _prob(factors, order, both, width)
    p_e = _prob(factors, order, evidence, width)
    if mode == "joint":
        return InferenceResult(p_both, p_e, "ve")
    if p_e <= 0.0:
        raise ZeroEvidenceError("evidence has probability zero")
    return InferenceResult(p_both / p_e, p_e, "ve")


def _prob(factors: list[Factor], order: EliminationOrder, e: Evidence, width: int) -> float:
    reduced = [reduce_factor(f, e) for f in factors]
    value, peak = _eliminate_all(reduced, order.sequence)
    assert peak <= width + 1, f"peak scope {peak} exceeds width bound {width + 1}"
    return value


# ---------------------------------------------------------------- jointree

def _leaf_factors(jt: Jointree, factors: dict[str, Factor]) -> dict[str, Factor]:
    """Assign the family factor for each child to every one of its host
    leaves; replicated families must be deterministic (0/1 tables)."""
    out: dict[str, Factor] = {}
    for child, leaves in jt.hosts.items():
        f = factors[child]
        if len(leaves) > 1:
            vals = f.values
            if not np.all((vals == 0.0) | (vals == 1.0)):
                raise ModelError(f"replicated family {child!r} is not deterministic")
        for leaf in leaves:
            out[leaf] = f
    return out


def jointree_propagate(
    jt_or_thinned,
    scm: Scm,
    evidence: Evidence,
    target: Evidence,
    mode: str = "conditional",
    separators: SeparatorAssignment | None = None,
) -> InferenceResult:
    """Message passing over (possibly thinned) separators. Targets are
    asserted as additional evidence so any leaf can produce the joint."""
    if isinstance(jt_or_thinned, ThinnedJointree):
        jt = jt_or_thinned.jointree
        seps = jt_or_thinned.thinned
        method = "jointree-thinned"
    else:
        jt = jt_or_thinned
        seps = separators if separators is not None else classical_separators(jt)
        method = "jointree"
    _check_states(scm, evidence)
    _check_states(scm, target)
    factors = {f.scope[-1]: f for f in scm_factors(scm)}
    for child in jt.hosts:
        if child not in factors:
            raise ModelError(f"no factor for hosted family {child!r}")
    leaf_factor = _leaf_factors(jt, factors)

    sep_width = max((len(s) for s in seps.separators.values()), default=0)

    def prob(e: Evidence) -> float:
        local = {leaf: reduce_factor(f, e) for leaf, f in leaf_factor.items()}
        sink = jt.nodes[0]
        nb = jt.neighbors()
        parent: dict[str, str | None] = {sink: None}
        order = [sink]
        for v in order:
            for u in nb[v]:
                if u not in parent:
                    parent[u] = v
                    order.append(u)
        msg: dict[str, Factor] = {}
        for v in reversed(order):
            if parent[v] is None:
                continue
            f = local.get(v, Factor.unit())
            for u in nb[v]:
                if u != parent[v]:
                    f = multiply(f, msg[u])
            sep = seps.separators[edge_key(v, parent[v])]
            for x in list(f.scope):
                if x not in sep or x in e.assignments:
                    f = sum_out(f, x)
            assert len(f.scope) <= sep_width
            msg[v] = f
        f = local.get(sink, Factor.unit())
        for u in nb[sink]:
            f = multiply(f, msg[u])
        for x in list(f.scope):
            f = sum_out(f, x)
        return factor_value(f)

    for v in target.assignments:
        if v in evidence.assignments and evidence.assignments[v] != target.assignments[v]:
            return InferenceResult(0.0, prob(evidence), method)
    both = Evidence({**evidence.assignments, **target.assignments})
    p_both = prob(both)
    p_e = prob(evidence)
    if mode == "joint":
        return InferenceResult(p_both, p_e, method)
    if p_e <= 0.0:
        raise ZeroEvidenceError("evidence has probability zero")
    return InferenceResult(p_both / p_e, p_e, method)


# ---------------------------------------------------------------- queries

def _is_twin_case(scm: Scm, q: CounterfactualQuery) -> bool:
    return q.world_count == 2 and q.shared_roots == frozenset(scm.dag.roots())


def build_query_network(scm: Scm, q: CounterfactualQuery):
    """N-world network (twin naming when N=2 with all roots shared),
    mutilated by the per-world interventions, plus mapped evidence and
    target. Returns (network, world_map, evidence, target)."""
    if _is_twin_case(scm, q):
        net, wmap = twin_network(scm)
    else:
        net, wmap = n_world_network(scm, q.shared_roots, q.world_count)
    do = {}
    for w, ev in enumerate(q.interventions, start=1):
        for v, s in ev.items():
            do[wmap.lookup(v, w)] = s
    obs = {}
    for w, ev in enumerate(q.observations, start=1):
        for v, s in ev.items():
            nid = wmap.lookup(v, w)
            if obs.get(nid, s) != s:
                raise ModelError(f"conflicting observations on {nid!r}")
            obs[nid] = s
    tgt = {}
    for w, v, s in q.target:
        nid = wmap.lookup(v, w)
        if tgt.get(nid, s) != s:
            raise ModelError(f"conflicting target states on {nid!r}")
        tgt[nid] = s
    return mutilate(net, Evidence(do)), wmap, Evidence(obs), Evidence(tgt)


def counterfactual(scm: Scm, q: CounterfactualQuery, engine: str = "ve") -> InferenceResult:
    """Evaluate a counterfactual query on the mutilated N-world network.

    Engines: "ve" uses a lifted base minfill order; "jointree" and
    "jointree-thinned" lift the base jointree through the twin jointree
    construction when N=2 with all roots shared, and otherwise build a
    jointree from the lifted order."""
    net, wmap, obs, tgt = build_query_network(scm, q)
    base_order = minfill_order(moral_graph(scm.dag))
    twin_case = _is_twin_case(scm, q)
    if twin_case:
        order = twin_order(base_order, scm.dag)
    else:
        order = n_world_order(base_order, scm.dag, q.shared_roots, q.world_count)

    if engine == "ve":
        res = ve_query(net, obs, order, tgt, mode=q.mode)
        tag = "ve-twin" if twin_case else "ve-nworld"
        return InferenceResult(res.value, res.evidence_probability, tag)
    if engine == "oracle":
        return brute_force_counterfactual(scm, q)

    base_jt = jointree_from_order(scm.dag, base_order)
    if engine == "jointree":
        if twin_case:
            jt = make_twin_jointree(base_jt, scm.dag)
        else:
            jt = jointree_from_order(net.dag, order)
        return jointree_propagate(jt, net, obs, tgt, mode=q.mode)
    if engine == "jointree-thinned":
        if twin_case:
            rep = replicate(base_jt, scm.dag, 10)
            thinned_base = thin(rep, scm.dag.internals())
            twin_jt = make_twin_jointree(rep, scm.dag)
            thinned = thinned_twin_separators(thinned_base, twin_jt)
        else:
            jt = jointree_from_order(net.dag, order)
            rep = replicate(jt, net.dag, 10)
            thinned = thin(rep, net.dag.internals())
        return jointree_propagate(thinned, net, obs, tgt, mode=q.mode)
    raise ModelError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------- oracles

def brute_force_joint(scm: Scm) -> Factor:
    """Full joint by multiplying every network factor, full enumeration."""
    space = prod(scm.card(v) for v in scm.dag.nodes)
    if space > 1 << 24:
        raise ModelError(f"joint state space {space} exceeds the 2^24 guard")
    f = Factor.unit()
    for g in scm_factors(scm):
        f = multiply(f, g)
    perm = [f.scope.index(v) for v in scm.dag.nodes]
    return Factor(scm.dag.nodes, np.transpose(f.values, perm))


def _exogenous_enumeration(net: Scm, evidence: Evidence, target: Evidence):
    """Pr(target, evidence) and Pr(evidence) by enumerating root
    instantiations and propagating internals deterministically."""
    roots = net.dag.roots()
    space = prod(net.card(r) for r in roots)
    if space > 1 << 24:
        raise ModelError(f"exogenous state space {space} exceeds the 2^24 guard")
    topo = net.dag.topological_order()
    p_e = 0.0
    p_te = 0.0
    for combo in iproduct(*(range(net.card(r)) for r in roots)):
        p = 1.0
        state = dict(zip(roots, combo))
        for r, s in state.items():
            p *= net.root_tables[r][s]
        if p == 0.0:
            continue
        for v in topo:
            if v not in state:
                state[v] = net.child_state(v, state)
        if all(state[v] == s for v, s in evidence.items()):
            p_e += p
            if all(state[v] == s for v, s in target.items()):
                p_te += p
    return p_te, p_e


def brute_force_counterfactual(scm: Scm, q: CounterfactualQuery) -> InferenceResult:
    """Abduction-intervention-prediction collapsed into one enumeration
    over the exogenous states of the mutilated N-world network."""
    net, _, obs, tgt = build_query_network(scm, q)
    p_te, p_e = _exogenous_enumeration(net, obs, tgt)
    if q.mode == "joint":
        return InferenceResult(p_te, p_e, "oracle")
    if p_e <= 0.0:
        raise ZeroEvidenceError("evidence has probability zero")
    return InferenceResult(p_te / p_e, p_e, "oracle")
