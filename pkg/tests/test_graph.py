import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procbn.bayesnet import infer
from procbn.eventlog import EventLog
from procbn.graph import (
    DagStructure,
    TransitionGraph,
    break_cycles,
    build_transition_graph,
    dag_to_dot,
    to_structure,
    transition_graph_to_dot,
)
from oracles import is_acyclic, reaches


def test_adjacency_counts():
    g = build_transition_graph(EventLog.from_sequences([["A", "B", "C"], ["A", "B"]]))
    assert g.edge_counts == {("A", "B"): 2, ("B", "C"): 1}
    assert g.nodes == ("A", "B", "C")


def test_self_loop_recorded():
    g = build_transition_graph(EventLog.from_sequences([["A", "A"]]))
    assert g.edge_counts == {("A", "A"): 1}


def test_two_cycle_counts():
    g = build_transition_graph(EventLog.from_sequences([["A", "B"]] * 900 + [["B", "A"]] * 100))
    assert g.edge_counts == {("A", "B"): 900, ("B", "A"): 100}


def test_weakest_edge_of_two_cycle_removed():
    dag = break_cycles(TransitionGraph(("A", "B"), {("A", "B"): 900, ("B", "A"): 100}))
    assert dag.edges == [("A", "B")]
    assert [(r.source, r.target, r.reason) for r in dag.removed] == [("B", "A", "2-cycle")]


def test_two_cycle_tie_drops_later_source():
    dag = break_cycles(TransitionGraph(("B", "A"), {("A", "B"): 5, ("B", "A"): 5}))
    # B precedes A in node order, so the edge sourced at A goes
    assert dag.edges == [("B", "A")]


def test_acyclic_input_unchanged():
    counts = {("A", "B"): 3, ("A", "C"): 1, ("B", "C"): 2}
    dag = break_cycles(TransitionGraph(("A", "B", "C"), counts))
    assert set(dag.edges) == set(counts)
    assert dag.removed == ()


def test_three_cycle_drops_minimum():
    dag = break_cycles(TransitionGraph(("A", "B", "C"), {("A", "B"): 5, ("B", "C"): 4, ("C", "A"): 3}))
    assert set(dag.edges) == {("A", "B"), ("B", "C")}
    assert dag.removed[0].source == "C" and dag.removed[0].count == 3


def test_self_loops_removed():
    dag = break_cycles(TransitionGraph(("A", "B"), {("A", "A"): 10, ("A", "B"): 1}))
    assert dag.edges == [("A", "B")]


def test_parents_follow_node_order():
    counts = {("C", "D"): 1, ("A", "D"): 1, ("B", "D"): 1}
    dag = break_cycles(TransitionGraph(("A", "B", "C", "D"), counts))
    assert dag.parents["D"] == ("A", "B", "C")


def test_cyclic_dag_rejected():
    with pytest.raises(Exception):
        DagStructure(("A", "B"), {"A": ("B",), "B": ("A",)})


class TestToStructure:
    def test_uniform_chain(self):
        net = to_structure(DagStructure(("A", "B"), {"B": ("A",)}))
        assert net.cpts["B"].rows == {(True,): (0.5, 0.5), (False,): (0.5, 0.5)}
        assert infer(net, "B", {"A": True}).p_present == 0.5
        assert infer(net, "B", {"A": False}).p_present == 0.5

    def test_empty(self):
        net = to_structure(DagStructure((), {}))
        assert net.variables == ()

    def test_two_parents_four_rows(self):
        net = to_structure(DagStructure(("A", "B", "C"), {"C": ("A", "B")}))
        rows = net.cpts["C"].rows
        assert len(rows) == 4
        assert all(sum(pair) == 1.0 for pair in rows.values())


def test_dot_exports():
    g = TransitionGraph(("A", "B"), {("A", "B"): 900, ("B", "A"): 100})
    text = transition_graph_to_dot(g)
    assert '"A" -> "B" [label="900"];' in text
    assert '"B" -> "A" [label="100"];' in text
    dag_text = dag_to_dot(break_cycles(g))
    assert '"A" -> "B"' in dag_text and '"B" -> "A"' not in dag_text
    assert dag_text.startswith("digraph") and dag_text.rstrip().endswith("}")


def test_dot_quotes_names():
    g = TransitionGraph(('W_a "b"', "x"), {('W_a "b"', "x"): 1})
    assert r'"W_a \"b\"" -> "x"' in transition_graph_to_dot(g)


nodes = ["A", "B", "C", "D", "E", "F"]
graphs = st.dictionaries(
    st.tuples(st.sampled_from(nodes), st.sampled_from(nodes)), st.integers(1, 20), max_size=25
)


@settings(max_examples=200, deadline=None)
@given(graphs)
def test_break_cycles_properties(counts):
    graph = TransitionGraph(tuple(nodes), counts)
    dag = break_cycles(graph)
    kept = set(dag.edges)
    assert is_acyclic(nodes, kept)
    # only edges lying on some cycle of the input may be removed
    input_edges = list(counts)
    for u, v in set(counts) - kept:
        assert u == v or reaches(input_edges, v, u)
    # every kept edge had a positive count in the input
    assert all(counts[e] >= 1 for e in kept)
    # determinism
    assert break_cycles(graph) == dag


@settings(max_examples=200, deadline=None)
@given(graphs)
def test_greedy_step_is_locally_minimal(counts):
    dag = break_cycles(TransitionGraph(tuple(nodes), counts))
    remaining = {e: c for e, c in counts.items() if e[0] != e[1]}
    for r in dag.removed:
        if r.reason == "self-loop":
            continue
        if r.reason == "2-cycle":
            assert r.count <= remaining[(r.target, r.source)]
        else:
            edges = list(remaining)
            on_cycle = [e for e in edges if reaches(edges, e[1], e[0])]
            assert r.count == min(remaining[e] for e in on_cycle)
        del remaining[(r.source, r.target)]
