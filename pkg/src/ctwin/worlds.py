"""Graph-level constructions: moral graphs, twin networks, N-world
networks, generalized N-world networks, and intervention mutilation.

Naming scheme for duplicates: the twin duplicate of X is "X'"; in an
N-world network world 1 keeps the base id and world j >= 2 uses "X__j"
(the id grammar has no caret, so a superscript-style suffix is spelled
with a double underscore).
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Dag, Evidence, ModelError, Scm, Variable


def twin_name(v: str) -> str:
    return v + "'"


def world_name(v: str, j: int) -> str:
    return v if j == 1 else f"{v}__{j}"


@dataclass(frozen=True)
class MoralGraph:
    nodes: tuple[str, ...]
    adjacency: dict[str, frozenset[str]]


def moral_graph(dag: Dag) -> MoralGraph:
    """Marry common parents, drop edge directions."""
    adj: dict[str, set[str]] = {v: set() for v in dag.nodes}
    for v in dag.nodes:
        ps = dag.parents[v]
        for p in ps:
            adj[v].add(p)
            adj[p].add(v)
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                adj[ps[i]].add(ps[j])
                adj[ps[j]].add(ps[i])
    return MoralGraph(dag.nodes, {v: frozenset(s) for v, s in adj.items()})


@dataclass(frozen=True)
class WorldMap:
    """Mapping from (base id, world index) to network ids.

    Shared variables map to themselves in every world.
    """

    world_count: int
    shared: frozenset[str]
    duplicate_of: dict[tuple[str, int], str]

    def lookup(self, base_id: str, world: int) -> str:
        if not (1 <= world <= self.world_count):
            raise ModelError(f"world index {world} out of range")
        if base_id in self.shared:
            return base_id
        key = (base_id, world)
        if key not in self.duplicate_of:
            raise ModelError(f"unknown base variable {base_id!r}")
        return self.duplicate_of[key]

    def to_dict(self) -> dict:
        return {
            "worlds": self.world_count,
            "shared": sorted(self.shared),
            "duplicates": [
                {"base": b, "world": w, "id": nid}
                for (b, w), nid in sorted(self.duplicate_of.items())
            ],
        }


def twin_network(scm: Scm) -> tuple[Scm, WorldMap]:
    """Duplicate every internal variable; roots are shared (Def 1 style)."""
    dag = scm.dag
    roots = set(dag.roots())
    nodes = list(dag.nodes)
    parents = {v: dag.parents[v] for v in dag.nodes}
    variables = dict(scm.variables)
    cpts = dict(scm.internal_cpts)
    state_names = dict(scm.state_names)
    dup = {}
    for v in dag.nodes:
        for w in (1, 2):
            dup[(v, w)] = v
    for v in dag.nodes:
        if v in roots:
            continue
        d = twin_name(v)
        nodes.append(d)
        parents[d] = tuple(p if p in roots else twin_name(p) for p in dag.parents[v])
        variables[d] = Variable(d, scm.card(v), "endogenous-internal", True)
        cpts[d] = scm.internal_cpts[v]
        if v in state_names:
            state_names[d] = state_names[v]
        dup[(v, 2)] = d
    out = Scm(Dag(tuple(nodes), parents), variables, dict(scm.root_tables), cpts, state_names)
    return out, WorldMap(2, frozenset(roots), dup)


def n_world_network(scm: Scm, shared_roots, n_worlds: int) -> tuple[Scm, WorldMap]:
    """Share the roots in `shared_roots` across worlds and duplicate every
    other variable N times (Def 3 style)."""
    dag = scm.dag
    roots = set(dag.roots())
    shared = set(shared_roots)
    bad = shared - roots
    if bad:
        raise ModelError(f"shared set contains non-root ids: {sorted(bad)}")
    if n_worlds < 1:
        raise ModelError("world count must be >= 1")

    def name(v, j):
        return v if v in shared else world_name(v, j)

    nodes, parents = [], {}
    variables, tables, cpts, state_names = {}, {}, {}, {}
    dup = {}
    for v in dag.nodes:
        worlds = (1,) if v in shared else tuple(range(1, n_worlds + 1))
        for j in range(1, n_worlds + 1):
            dup[(v, j)] = name(v, j)
        for j in worlds:
            nid = name(v, j)
            nodes.append(nid)
            parents[nid] = tuple(name(p, j) for p in dag.parents[v])
            var = scm.variables[v]
            variables[nid] = Variable(nid, var.cardinality, var.kind, var.functional)
            if v in scm.root_tables:
                tables[nid] = scm.root_tables[v]
            else:
                cpts[nid] = scm.internal_cpts[v]
            if v in scm.state_names:
                state_names[nid] = scm.state_names[v]
    out = Scm(Dag(tuple(nodes), parents), variables, tables, cpts, state_names)
    return out, WorldMap(n_worlds, frozenset(shared), dup)


def generalized_n_world(dag: Dag, duplicated, n_worlds: int, cross_edges=()) -> Dag:
    """Duplicate only the chosen nodes; cross edges connect duplicates of
    the same variable from an earlier world to a later one (Appendix-D
    style). Returns a structure only; no parameters are defined for the
    cross edges."""
    dup = set(duplicated)
    unknown = dup - set(dag.nodes)
    if unknown:
        raise ModelError(f"unknown duplicated ids: {sorted(unknown)}")

    def name(v, j):
        return world_name(v, j) if v in dup else v

    nodes, parents = [], {}
    for v in dag.nodes:
        worlds = tuple(range(1, n_worlds + 1)) if v in dup else (1,)
        for j in worlds:
            nid = name(v, j)
            nodes.append(nid)
            parents[nid] = tuple(name(p, j) for p in dag.parents[v])
    for v, i, j in cross_edges:
        if v not in dup:
            raise ModelError(f"cross edge on non-duplicated variable {v!r}")
        if not (1 <= i < j <= n_worlds):
            raise ModelError(f"cross edge worlds must satisfy i < j: {(i, j)}")
        parents[name(v, j)] = parents[name(v, j)] + (name(v, i),)
    return Dag(tuple(nodes), parents)


def mutilate(scm: Scm, interventions: Evidence) -> Scm:
    """Cut incoming edges of intervened variables and fix their states."""
    dag = scm.dag
    parents = dict(dag.parents)
    variables = dict(scm.variables)
    tables = dict(scm.root_tables)
    cpts = dict(scm.internal_cpts)
    for v, state in interventions.items():
        if v not in variables:
            raise ModelError(f"unknown intervened variable {v!r}")
        card = variables[v].cardinality
        if not (0 <= state < card):
            raise ModelError(f"intervened state {state} out of range for {v!r}")
        parents[v] = ()
        point = tuple(1.0 if s == state else 0.0 for s in range(card))
        tables[v] = point
        cpts.pop(v, None)
        variables[v] = Variable(v, card, "exogenous-root", False)
    return Scm(Dag(dag.nodes, parents), variables, tables, cpts, dict(scm.state_names))
