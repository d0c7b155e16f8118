"""Core data model: DAGs, variables, SCMs, factors, evidence, and file I/O.

All structures are plain immutable-after-construction containers. State
indices are 0-based; instantiation enumeration is lexicographic with the
last scope variable varying fastest (C order).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from math import prod

import numpy as np

ID_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_']*$")


class ModelError(Exception):
    """Invalid model file or violated model invariant."""


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over variable ids."""

    nodes: tuple[str, ...]
    parents: dict[str, tuple[str, ...]]

    def __post_init__(self):
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ModelError("duplicate node ids")
        for v, ps in self.parents.items():
            if v not in known:
                raise ModelError(f"parents listed for unknown node {v!r}")
            if len(set(ps)) != len(ps):
                raise ModelError(f"duplicate parent in list of {v!r}")
            if v in ps:
                raise ModelError(f"self-loop at {v!r}")
            for p in ps:
                if p not in known:
                    raise ModelError(f"unknown parent {p!r} of {v!r}")
        if self.topological_order() is None:
            raise ModelError("graph contains a directed cycle")

    @staticmethod
    def of(nodes, parents) -> "Dag":
        return Dag(tuple(nodes), {v: tuple(parents.get(v, ())) for v in nodes})

    def parents_of(self, v: str) -> tuple[str, ...]:
        if v not in self.parents:
            raise ModelError(f"unknown variable {v!r}")
        return self.parents[v]

    def children_of(self, v: str) -> tuple[str, ...]:
        return tuple(c for c in self.nodes if v in self.parents[c])

    def roots(self) -> tuple[str, ...]:
        return tuple(v for v in self.nodes if not self.parents[v])

    def internals(self) -> tuple[str, ...]:
        return tuple(v for v in self.nodes if self.parents[v])

    def edges(self) -> list[tuple[str, str]]:
        return [(p, v) for v in self.nodes for p in self.parents[v]]

    def topological_order(self) -> list[str] | None:
        """Kahn's algorithm; None if the graph is cyclic."""
        indeg = {v: len(self.parents[v]) for v in self.nodes}
        children: dict[str, list[str]] = {v: [] for v in self.nodes}
        for v in self.nodes:
            for p in self.parents[v]:
                children[p].append(v)
        ready = [v for v in self.nodes if indeg[v] == 0]
        out = []
        while ready:
            v = ready.pop()
            out.append(v)
            for c in children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        return out if len(out) == len(self.nodes) else None


@dataclass(frozen=True)
class Variable:
    id: str
    cardinality: int
    kind: str  # "exogenous-root" | "endogenous-internal"
    functional: bool


@dataclass(frozen=True)
class Family:
    child: str
    members: frozenset[str]


def family_of(dag: Dag, v: str) -> Family:
    return Family(v, frozenset((v,) + dag.parents_of(v)))


@dataclass(frozen=True)
class Evidence:
    assignments: dict[str, int]

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))

    def __bool__(self):
        return bool(self.assignments)

    def items(self):
        return self.assignments.items()


@dataclass(frozen=True)
class Scm:
    """Fully specified structural causal model.

    Roots carry distributions; internals carry deterministic CPTs stored
    as one child-state index per parent instantiation (lexicographic in
    the listed parent order, last parent fastest).
    """

    dag: Dag
    variables: dict[str, Variable]
    root_tables: dict[str, tuple[float, ...]]
    internal_cpts: dict[str, tuple[int, ...]]
    state_names: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def card(self, v: str) -> int:
        return self.variables[v].cardinality

    def is_root(self, v: str) -> bool:
        return not self.dag.parents[v]

    def cpt_index(self, v: str, parent_states: dict[str, int]) -> int:
        idx = 0
        for p in self.dag.parents[v]:
            idx = idx * self.card(p) + parent_states[p]
        return idx

    def child_state(self, v: str, parent_states: dict[str, int]) -> int:
        return self.internal_cpts[v][self.cpt_index(v, parent_states)]


def validate(scm: Scm) -> list[str]:
    """Return a list of invariant violations; empty means valid."""
    out = []
    dag = scm.dag
    if dag.topological_order() is None:
        out.append("cycle: graph has no topological order")
    for v in dag.nodes:
        var = scm.variables.get(v)
        if var is None:
            out.append(f"{v}: missing variable metadata")
            continue
        if var.cardinality < 1:
            out.append(f"{v}: non-positive cardinality")
        is_root = not dag.parents[v]
        if is_root != (var.kind == "exogenous-root"):
            out.append(f"{v}: kind inconsistent with parent list")
        if is_root:
            if v not in scm.root_tables:
                out.append(f"{v}: root without distribution")
            elif v in scm.internal_cpts:
                out.append(f"{v}: root with both dist and cpt")
            else:
                t = scm.root_tables[v]
                if len(t) != var.cardinality:
                    out.append(f"{v}: distribution length != cardinality")
                elif any(x < 0 for x in t):
                    out.append(f"{v}: negative probability")
                elif abs(sum(t) - 1.0) > 1e-12:
                    out.append(f"{v}: distribution does not sum to 1")
        else:
            if not var.functional:
                out.append(f"{v}: internal SCM variable must be functional")
            if v not in scm.internal_cpts:
                out.append(f"{v}: internal without cpt")
            elif v in scm.root_tables:
                out.append(f"{v}: internal with both dist and cpt")
            else:
                cpt = scm.internal_cpts[v]
                want = prod(scm.card(p) for p in dag.parents[v])
                if len(cpt) != want:
                    out.append(f"{v}: cpt length {len(cpt)} != {want}")
                elif any(not (0 <= s < var.cardinality) for s in cpt):
                    out.append(f"{v}: cpt state index out of range")
    return out


@dataclass(frozen=True)
class Factor:
    """Discrete potential over an ordered variable scope.

    values is an ndarray of shape (card(scope[0]), ..., card(scope[-1])),
    i.e. its C-order ravel is the flat table with the last scope variable
    varying fastest.
    """

    scope: tuple[str, ...]
    values: np.ndarray

    @staticmethod
    def of(scope, cards: dict[str, int], flat) -> "Factor":
        scope = tuple(scope)
        shape = tuple(cards[v] for v in scope)
        arr = np.asarray(flat, dtype=float).reshape(shape)
        if (arr < 0).any():
            raise ModelError("negative factor entry")
        return Factor(scope, arr)

    @staticmethod
    def unit() -> "Factor":
        return Factor((), np.asarray(1.0))


def scm_factors(scm: Scm) -> list[Factor]:
    """One factor per variable: root tables and 0/1 CPT indicators."""
    cards = {v: scm.card(v) for v in scm.dag.nodes}
    out = []
    for v in scm.dag.nodes:
        ps = scm.dag.parents[v]
        if not ps:
            out.append(Factor.of((v,), cards, scm.root_tables[v]))
        else:
            scope = ps + (v,)
            shape = tuple(cards[x] for x in scope)
            arr = np.zeros(shape)
            flat = arr.reshape(-1, cards[v])
            for row, s in enumerate(scm.internal_cpts[v]):
                flat[row, s] = 1.0
            out.append(Factor(scope, arr))
    return out


def _parse_variable(entry, pos: int):
    if not isinstance(entry, dict):
        raise ModelError(f"variables[{pos}]: expected an object")
    for key in ("id", "states"):
        if key not in entry:
            raise ModelError(f"variables[{pos}]: missing field {key!r}")
    vid = entry["id"]
    if not isinstance(vid, str) or not ID_PATTERN.match(vid):
        raise ModelError(f"variables[{pos}]: bad id {vid!r}")
    states = entry["states"]
    if not isinstance(states, list) or not states:
        raise ModelError(f"{vid}: 'states' must be a non-empty array")
    parents = entry.get("parents", [])
    if not isinstance(parents, list):
        raise ModelError(f"{vid}: 'parents' must be an array")
    has_dist = "dist" in entry
    has_cpt = "cpt" in entry
    if has_dist == has_cpt:
        raise ModelError(f"{vid}: exactly one of 'dist' or 'cpt' required")
    return vid, states, parents, entry


def load_network(path) -> Scm:
    """Load an SCM from a network JSON file; raises ModelError with the
    offending variable id on any invariant violation."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ModelError(f"{path}: line {e.lineno} col {e.colno}: {e.msg}")
    return network_from_dict(doc)


def network_from_dict(doc) -> Scm:
    if not isinstance(doc, dict) or "variables" not in doc:
        raise ModelError("top-level object with 'variables' array required")
    nodes, parents, cards, state_names = [], {}, {}, {}
    entries = {}
    for pos, entry in enumerate(doc["variables"]):
        vid, states, ps, entry = _parse_variable(entry, pos)
        if vid in entries:
            raise ModelError(f"{vid}: duplicate variable")
        nodes.append(vid)
        parents[vid] = tuple(ps)
        cards[vid] = len(states)
        state_names[vid] = tuple(str(s) for s in states)
        entries[vid] = entry
    dag = Dag(tuple(nodes), parents)

    variables, root_tables, internal_cpts = {}, {}, {}
    for vid in nodes:
        entry = entries[vid]
        is_root = not parents[vid]
        if is_root:
            if "dist" not in entry:
                raise ModelError(f"{vid}: root variable needs 'dist'")
            table = tuple(float(x) for x in entry["dist"])
            if len(table) != cards[vid]:
                raise ModelError(f"{vid}: dist length != number of states")
            if any(x < 0 for x in table):
                raise ModelError(f"{vid}: negative probability")
            if abs(sum(table) - 1.0) > 1e-12:
                raise ModelError(f"{vid}: dist sums to {sum(table)}, not 1")
            root_tables[vid] = table
            functional = bool(entry.get("functional", False))
            kind = "exogenous-root"
        else:
            if "cpt" not in entry:
                raise ModelError(f"{vid}: internal variable needs 'cpt'")
            cpt = entry["cpt"]
            want = prod(cards[p] for p in parents[vid])
            if len(cpt) != want:
                raise ModelError(f"{vid}: cpt length {len(cpt)} != {want}")
            for s in cpt:
                if not isinstance(s, int) or not (0 <= s < cards[vid]):
                    raise ModelError(
                        f"{vid}: cpt entry {s!r} is not a valid state index "
                        "(non-deterministic or malformed CPT)"
                    )
            internal_cpts[vid] = tuple(cpt)
            functional = bool(entry.get("functional", True))
            if not functional:
                raise ModelError(f"{vid}: internal SCM variable must be functional")
            kind = "endogenous-internal"
        variables[vid] = Variable(vid, cards[vid], kind, functional)
    return Scm(dag, variables, root_tables, internal_cpts, state_names)


def network_to_dict(scm: Scm, world_map=None) -> dict:
    var_entries = []
    for v in scm.dag.nodes:
        names = scm.state_names.get(v) or tuple(
            f"s{i}" for i in range(scm.card(v))
        )
        entry = {"id": v, "states": list(names), "parents": list(scm.dag.parents[v])}
        if scm.is_root(v):
            entry["dist"] = list(scm.root_tables[v])
            if scm.variables[v].functional:
                entry["functional"] = True
        else:
            entry["cpt"] = list(scm.internal_cpts[v])
        var_entries.append(entry)
    doc = {"variables": var_entries}
    if world_map is not None:
        doc["world_map"] = world_map.to_dict()
    return doc


def save_network(scm: Scm, path, world_map=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(scm, world_map), fh, indent=1, sort_keys=False)
        fh.write("\n")
