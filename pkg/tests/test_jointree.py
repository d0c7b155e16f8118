import pytest

from ctwin import (
    ModelError,
    classical_separators,
    jointree_from_order,
    make_twin_jointree,
    minfill_order,
    moral_graph,
    twin_network,
    twin_separators_direct,
)
from ctwin.jointree import Jointree, edge_key

from conftest import random_scm


def base_jointree(scm):
    return jointree_from_order(scm.dag, minfill_order(moral_graph(scm.dag)))


def test_jointree_invariants(adder):
    jt = base_jointree(adder)
    jt.check()
    lf = jt.leaf_family()
    nb = jt.neighbors()
    # every leaf hosts exactly one family; hosts are leaves
    for leaf, child in lf.items():
        assert len(nb[leaf]) == 1
        assert child in jt.families
    assert set(jt.hosts) == set(adder.dag.nodes)


def test_check_rejects_disconnected():
    jt = Jointree(
        ("a", "b", "c", "d"),
        (("a", "b"), ("c", "d"), ("a", "c")),
        {"x": ("b",)},
        {"x": frozenset({"x"})},
    )
    with pytest.raises(ModelError):
        # b and d are leaves but d hosts nothing
        jt.check()


def test_classical_separators_definition(adder):
    jt = base_jointree(adder)
    sa = classical_separators(jt)
    nb = jt.neighbors()
    lf = jt.leaf_family()

    def hosted_side(e, start):
        seen, stack = {start}, [start]
        while stack:
            v = stack.pop()
            for u in nb[v]:
                if u not in seen and edge_key(v, u) != e:
                    seen.add(u)
                    stack.append(u)
        out = set()
        for leaf in seen & set(lf):
            out |= jt.families[lf[leaf]]
        return out

    for e in jt.edges:
        assert sa.separators[e] == frozenset(
            hosted_side(e, e[0]) & hosted_side(e, e[1])
        )


def test_cluster_structure(adder):
    jt = base_jointree(adder)
    sa = classical_separators(jt)
    nb = jt.neighbors()
    lf = jt.leaf_family()
    for v in jt.nodes:
        if v in lf:
            assert sa.clusters[v] == jt.families[lf[v]]
        else:
            union = frozenset()
            for u in nb[v]:
                union |= sa.separators[edge_key(v, u)]
            assert sa.clusters[v] == union
    assert sa.width == max(len(c) for c in sa.clusters.values()) - 1


def test_normalized_width_formula(adder):
    import math

    jt = base_jointree(adder)
    sa = classical_separators(jt)
    total = sum(2 ** len(c) for c in sa.clusters.values())
    assert sa.normalized_width == pytest.approx(math.log2(total))


def test_twin_jointree_shape(adder):
    jt = base_jointree(adder)
    tjt = make_twin_jointree(jt, adder.dag)
    tjt.check()
    # at most 2n nodes
    assert len(tjt.nodes) <= 2 * len(jt.nodes) + 1  # +1 for a possible aux root
    assert set(tjt.hosts) == set(adder.dag.nodes) | {"A'", "B'", "S'", "C'"}
    classes = set(tjt.edge_class.values())
    assert classes <= {"duplicated", "duplicate", "invariant"}
    for de, e in tjt.duplicate_base.items():
        assert tjt.edge_class[de] == "duplicate"
        assert tjt.edge_class[e] == "duplicated"


def test_twin_separator_equality(adder):
    # lifted separators equal the from-scratch hosted-both-sides ones
    jt = base_jointree(adder)
    tjt = make_twin_jointree(jt, adder.dag)
    lifted = twin_separators_direct(classical_separators(jt), tjt)
    direct = classical_separators(tjt)
    assert lifted.separators == direct.separators
    assert lifted.width == direct.width


def test_twin_width_bound_random():
    for seed in range(20):
        scm = random_scm(seed, n=8, param=3)
        jt = base_jointree(scm)
        sa = classical_separators(jt)
        tjt = make_twin_jointree(jt, scm.dag)
        tsa = classical_separators(tjt)
        assert tsa.width <= 2 * sa.width + 1
        assert len(tjt.nodes) <= 2 * len(jt.nodes)


def test_twin_of_all_root_network():
    from ctwin import Dag, Scm, Variable

    dag = Dag.of(["a", "b"], {})
    variables = {
        v: Variable(v, 2, "exogenous-root", False) for v in dag.nodes
    }
    scm = Scm(dag, variables, {"a": (0.5, 0.5), "b": (0.5, 0.5)}, {})
    jt = base_jointree(scm)
    tjt = make_twin_jointree(jt, dag)
    assert set(tjt.edge_class.values()) == {"invariant"}
    assert set(tjt.nodes) == set(jt.nodes)


def test_lift_requires_edge_classes(adder):
    jt = base_jointree(adder)
    with pytest.raises(ModelError):
        twin_separators_direct(classical_separators(jt), jt)
