import itertools

import pytest

from ctwin import Dag, EliminationOrder, ModelError, eliminate, exact_treewidth, minfill_order, moral_graph, n_world_order, twin_order
from ctwin.worlds import MoralGraph

from conftest import half_adder, random_scm


def graph(n, edges):
    nodes = tuple(chr(65 + i) for i in range(n))
    adj = {v: set() for v in nodes}
    for i, j in edges:
        adj[nodes[i]].add(nodes[j])
        adj[nodes[j]].add(nodes[i])
    return MoralGraph(nodes, {v: frozenset(s) for v, s in adj.items()})


def test_eliminate_chain_width_one():
    g = graph(4, [(0, 1), (1, 2), (2, 3)])
    cs = eliminate(g, EliminationOrder(("A", "B", "C", "D")))
    assert cs.width == 1
    assert cs.clusters[0] == {"A", "B"}


def test_eliminate_requires_permutation():
    g = graph(3, [(0, 1)])
    with pytest.raises(ModelError):
        eliminate(g, EliminationOrder(("A", "B")))


def test_eliminate_fill_in_matters():
    # eliminating the cycle hub first fills in its neighbors
    g = graph(4, [(0, 1), (0, 2), (0, 3)])
    star_first = eliminate(g, EliminationOrder(("A", "B", "C", "D")))
    leaf_first = eliminate(g, EliminationOrder(("B", "C", "D", "A")))
    assert star_first.width == 3
    assert leaf_first.width == 1


def test_minfill_is_optimal_on_small_graphs():
    # minfill matches the exact treewidth on every graph with 5 nodes
    nodes = 5
    pairs = list(itertools.combinations(range(nodes), 2))
    for mask in range(0, 1 << len(pairs), 7):  # stride keeps runtime low
        edges = [p for k, p in enumerate(pairs) if mask >> k & 1]
        g = graph(nodes, edges)
        mf = eliminate(g, minfill_order(g)).width
        assert mf >= exact_treewidth(g)


def test_exact_treewidth_known_values():
    assert exact_treewidth(graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])) == 2
    assert exact_treewidth(graph(4, list(itertools.combinations(range(4), 2)))) == 3
    assert exact_treewidth(graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])) == 1
    grid = []
    for r in range(3):
        for c in range(3):
            i = r * 3 + c
            if c < 2:
                grid.append((i, i + 1))
            if r < 2:
                grid.append((i, i + 3))
    assert exact_treewidth(graph(9, grid)) == 3


def test_exact_treewidth_node_limit():
    g = graph(5, [(0, 1)])
    with pytest.raises(ModelError):
        exact_treewidth(g, node_limit=4)


def test_minfill_deterministic(adder):
    g = moral_graph(adder.dag)
    assert minfill_order(g) == minfill_order(g)


def test_twin_order_interleaves(adder):
    order = minfill_order(moral_graph(adder.dag))
    lifted = twin_order(order, adder.dag)
    seq = lifted.sequence
    assert seq.count("U") == 1
    assert "S'" in seq
    assert seq.index("S'") == seq.index("S") + 1


def test_n_world_order_consecutive_copies(adder):
    order = minfill_order(moral_graph(adder.dag))
    lifted = n_world_order(order, adder.dag, ["X", "Y"], 3)
    seq = lifted.sequence
    assert seq.index("A__2") == seq.index("A") + 1
    assert seq.index("A__3") == seq.index("A") + 2
    assert seq.count("X") == 1
    # U is outside R, so it appears in all three worlds
    assert "U__3" in seq


def test_n_world_order_rejects_non_root_shared(adder):
    order = minfill_order(moral_graph(adder.dag))
    with pytest.raises(ModelError):
        n_world_order(order, adder.dag, ["S"], 2)


def test_width_of_minfill_bounded_by_nodes():
    for seed in range(5):
        scm = random_scm(seed, n=10, param=3)
        g = moral_graph(scm.dag)
        cs = eliminate(g, minfill_order(g))
        assert 0 <= cs.width < len(scm.dag.nodes)
