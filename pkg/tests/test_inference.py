import numpy as np
import pytest

from ctwin import (
    CounterfactualQuery,
    Evidence,
    Factor,
    ModelError,
    ZeroEvidenceError,
    brute_force_counterfactual,
    brute_force_joint,
    build_query_network,
    counterfactual,
    factor_value,
    jointree_from_order,
    jointree_propagate,
    minfill_order,
    moral_graph,
    multiply,
    reduce_factor,
    sum_out,
    ve_query,
)

from conftest import random_scm

ENGINES = ("ve", "jointree", "jointree-thinned", "oracle")


# ---------------------------------------------------------------- factors

def test_multiply_aligns_scopes():
    a = Factor.of(("x", "y"), {"x": 2, "y": 2}, [1, 2, 3, 4])
    b = Factor.of(("y", "z"), {"y": 2, "z": 2}, [10, 20, 30, 40])
    c = multiply(a, b)
    assert c.scope == ("x", "y", "z")
    assert c.values[1, 0, 1] == 3 * 20
    assert c.values[0, 1, 0] == 2 * 30


def test_multiply_commutes():
    rng = np.random.default_rng(0)
    a = Factor(("x", "y"), rng.random((2, 3)))
    b = Factor(("z", "y"), rng.random((4, 3)))
    ab = multiply(a, b)
    ba = multiply(b, a)
    perm = [ba.scope.index(v) for v in ab.scope]
    assert np.allclose(ab.values, np.transpose(ba.values, perm))


try:
    from hypothesis import given, settings
    from hypothesis import strategies as st

    @st.composite
    def factor_pairs(draw):
        names = ("p", "q", "r", "s")
        cards = {v: draw(st.integers(2, 3)) for v in names}
        scopes = [
            tuple(v for v in names if draw(st.booleans())) or ("p",)
            for _ in range(2)
        ]
        out = []
        for scope in scopes:
            size = int(np.prod([cards[v] for v in scope]))
            vals = draw(
                st.lists(st.floats(0, 1, allow_nan=False), min_size=size, max_size=size)
            )
            out.append(Factor.of(scope, cards, vals))
        return out

    @settings(max_examples=50, deadline=None)
    @given(factor_pairs())
    def test_sum_of_product_is_order_free(pair):
        # summing everything out of a product must not depend on the
        # variable order (the identity variable elimination relies on)
        a, b = pair
        f = multiply(a, b)
        scope = list(f.scope)
        totals = set()
        for perm in (scope, scope[::-1]):
            g = f
            for v in perm:
                g = sum_out(g, v)
            totals.add(round(factor_value(g), 9))
        assert len(totals) == 1
except ImportError:  # hypothesis is an optional test dependency
    pass


def test_sum_out_and_reduce():
    f = Factor.of(("x", "y"), {"x": 2, "y": 2}, [1, 2, 3, 4])
    assert sum_out(f, "x").values.tolist() == [4, 6]
    assert sum_out(f, "missing") is f
    g = reduce_factor(f, Evidence({"y": 1}))
    assert g.scope == ("x",)
    assert g.values.tolist() == [2, 4]
    assert factor_value(sum_out(sum_out(f, "x"), "y")) == 10
    with pytest.raises(ModelError):
        factor_value(f)


# ---------------------------------------------------------------- VE

def test_ve_marginal_matches_joint(adder):
    order = minfill_order(moral_graph(adder.dag))
    joint = brute_force_joint(adder)
    axis_s = joint.scope.index("S")
    want = joint.values.sum(axis=tuple(i for i in range(7) if i != axis_s))[1]
    got = ve_query(adder, Evidence({}), order, Evidence({"S": 1}), mode="joint")
    assert got.value == pytest.approx(float(want))
    assert got.evidence_probability == pytest.approx(1.0)


def test_ve_zero_evidence(adder):
    order = minfill_order(moral_graph(adder.dag))
    # S = 1 is impossible when both inputs are low
    with pytest.raises(ZeroEvidenceError):
        ve_query(adder, Evidence({"A": 0, "B": 0, "S": 1}), order, Evidence({"C": 0}))


def test_ve_conflicting_target_is_zero(adder):
    order = minfill_order(moral_graph(adder.dag))
    res = ve_query(adder, Evidence({"S": 1}), order, Evidence({"S": 0}))
    assert res.value == 0.0


def test_jointree_matches_ve(adder):
    order = minfill_order(moral_graph(adder.dag))
    jt = jointree_from_order(adder.dag, order)
    e = Evidence({"A": 1})
    t = Evidence({"C": 1})
    jr = jointree_propagate(jt, adder, e, t)
    vr = ve_query(adder, e, order, t)
    assert jr.value == pytest.approx(vr.value)
    assert jr.evidence_probability == pytest.approx(vr.evidence_probability)


# ---------------------------------------------------------------- queries

def gate_repair_query(mode="conditional"):
    """Would the carry have fired and the sum stayed low, had both inputs
    been high, given we saw input 10 with both outputs low?"""
    return CounterfactualQuery(
        world_count=2,
        shared_roots=frozenset({"U", "X", "Y"}),
        observations=(Evidence({"A": 1, "B": 0, "C": 0, "S": 0}), Evidence({})),
        interventions=(Evidence({}), Evidence({"A": 1, "B": 1})),
        target=((2, "C", 1), (2, "S", 0)),
        mode=mode,
    )


def test_half_adder_counterfactual_all_engines(adder):
    for engine in ENGINES:
        res = counterfactual(adder, gate_repair_query(), engine)
        assert res.value == pytest.approx(0.9), engine
        assert res.evidence_probability == pytest.approx(0.025), engine


def test_half_adder_joint_mode(adder):
    for engine in ENGINES:
        res = counterfactual(adder, gate_repair_query("joint"), engine)
        assert res.value == pytest.approx(0.0225), engine


def test_engine_method_tags(adder):
    q = gate_repair_query()
    assert counterfactual(adder, q, "ve").method == "ve-twin"
    assert counterfactual(adder, q, "jointree").method == "jointree"
    assert counterfactual(adder, q, "jointree-thinned").method == "jointree-thinned"
    assert counterfactual(adder, q, "oracle").method == "oracle"
    with pytest.raises(ModelError):
        counterfactual(adder, q, "magic")


def test_three_world_scenario(adder):
    """Shared gate healths across three worlds: one observed run, one
    intervened run with a partial observation, one purely hypothetical."""
    q = CounterfactualQuery(
        world_count=3,
        shared_roots=frozenset({"X", "Y"}),
        observations=(
            Evidence({"A": 1, "B": 0, "S": 1, "C": 0}),
            Evidence({"C": 0}),
            Evidence({}),
        ),
        interventions=(
            Evidence({}),
            Evidence({"A": 0, "B": 0}),
            Evidence({"A": 1, "B": 1}),
        ),
        target=((3, "S", 1),),
    )
    want = brute_force_counterfactual(adder, q)
    for engine in ("ve", "jointree", "jointree-thinned"):
        got = counterfactual(adder, q, engine)
        assert got.value == pytest.approx(want.value), engine
        assert got.evidence_probability == pytest.approx(want.evidence_probability)
    assert counterfactual(adder, q, "ve").method == "ve-nworld"


def test_build_query_network_mutilates(adder):
    net, wmap, obs, tgt = build_query_network(adder, gate_repair_query())
    assert net.dag.parents["A'"] == ()
    assert net.dag.parents["B'"] == ()
    assert net.root_tables["A'"] == (0.0, 1.0)
    assert obs.assignments == {"A": 1, "B": 0, "C": 0, "S": 0}
    assert tgt.assignments == {"C'": 1, "S'": 0}
    assert wmap.lookup("U", 2) == "U"


def test_conflicting_observations_rejected(adder):
    q = CounterfactualQuery(
        world_count=2,
        shared_roots=frozenset({"U", "X", "Y"}),
        observations=(Evidence({"X": 1}), Evidence({"X": 0})),
        interventions=(Evidence({}), Evidence({})),
        target=((1, "S", 0),),
    )
    with pytest.raises(ModelError):
        build_query_network(adder, q)


def test_query_validation(adder):
    with pytest.raises(ModelError):
        CounterfactualQuery(0, frozenset(), (), (), ())
    with pytest.raises(ModelError):
        CounterfactualQuery(
            1, frozenset(), (Evidence({}),), (Evidence({}),), ((2, "S", 0),)
        )
    with pytest.raises(ModelError):
        CounterfactualQuery(
            1, frozenset(), (Evidence({}),), (Evidence({}),), (), mode="odd"
        )


def test_engines_agree_on_random_scms():
    for seed in range(8):
        scm = random_scm(seed, n=6, param=2)
        roots = scm.dag.roots()
        internals = scm.dag.internals()
        q = CounterfactualQuery(
            world_count=2,
            shared_roots=frozenset(roots),
            observations=(Evidence({}), Evidence({})),
            interventions=(Evidence({}), Evidence({internals[0]: 0})),
            target=((2, internals[-1], 0),),
            mode="joint",
        )
        want = brute_force_counterfactual(scm, q)
        for engine in ("ve", "jointree", "jointree-thinned"):
            got = counterfactual(scm, q, engine)
            assert got.value == pytest.approx(want.value, abs=1e-10), (seed, engine)


def test_one_world_query_is_plain_inference(adder):
    q = CounterfactualQuery(
        world_count=1,
        shared_roots=frozenset({"U", "X", "Y"}),
        observations=(Evidence({"A": 1, "B": 1}),),
        interventions=(Evidence({}),),
        target=((1, "C", 1),),
    )
    order = minfill_order(moral_graph(adder.dag))
    plain = ve_query(adder, Evidence({"A": 1, "B": 1}), order, Evidence({"C": 1}))
    for engine in ENGINES:
        assert counterfactual(adder, q, engine).value == pytest.approx(plain.value)
