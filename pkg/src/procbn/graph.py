"""Direct-follows graphs and their reduction to a DAG."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

import networkx as nx

from .bayesnet import BayesianNetwork, Cpt, topological_order
from .eventlog import EventLog

Edge = tuple[str, str]


@dataclass(frozen=True)
class TransitionGraph:
    nodes: tuple[str, ...]
    edge_counts: Mapping[Edge, int]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        known = set(self.nodes)
        for (u, v), count in self.edge_counts.items():
            if u not in known or v not in known:
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside the node list")
            if count < 1:
                raise ValueError(f"edge ({u}, {v}) has non-positive count {count}")
        object.__setattr__(self, "edge_counts", dict(self.edge_counts))


@dataclass(frozen=True)
class RemovedEdge:
    source: str
    target: str
    count: int
    reason: str  # "self-loop", "2-cycle" or "cycle"


@dataclass(frozen=True)
class DagStructure:
    nodes: tuple[str, ...]
    parents: Mapping[str, tuple[str, ...]]
    edge_counts: Mapping[Edge, int] = field(default_factory=dict)
    removed: tuple[RemovedEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        parents = {n: tuple(self.parents.get(n, ())) for n in self.nodes}
        for n, ps in parents.items():
            if n in ps:
                raise ValueError(f"self-loop on {n}")
        topological_order(self.nodes, parents)
        object.__setattr__(self, "parents", parents)

    @property
    def edges(self) -> list[Edge]:
        return [(p, n) for n in self.nodes for p in self.parents[n]]


def build_transition_graph(log: EventLog) -> TransitionGraph:
    counts: Counter[Edge] = Counter()
    for trace in log:
        counts.update(zip(trace.tasks, trace.tasks[1:]))
    return TransitionGraph(log.vocabulary, dict(counts))


def _cycle_edges(nodes, edges) -> list[Edge]:
    """Edges whose endpoints share a strongly connected component (i.e. lie on a cycle)."""
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    component = {}
    for i, scc in enumerate(nx.strongly_connected_components(g)):
        for n in scc:
            component[n] = i
    return [(u, v) for u, v in edges if u != v and component[u] == component[v]]


def break_cycles(graph: TransitionGraph) -> DagStructure:
    """Keep the most frequent transitions until the graph is acyclic.

    Self-loops go first, then the weaker edge of every 2-cycle (on a tie the
    edge whose source comes later in node order). Any longer cycle left is
    broken greedily by deleting the weakest edge lying on some cycle,
    ties resolved lexicographically by ``(source, target)``.
    """
    position = {n: i for i, n in enumerate(graph.nodes)}
    counts = dict(graph.edge_counts)
    removed: list[RemovedEdge] = []

    for (u, v), c in sorted(counts.items()):
        if u == v:
            removed.append(RemovedEdge(u, v, c, "self-loop"))
            del counts[(u, v)]

    for u, v in sorted(counts, key=lambda e: (position[e[0]], position[e[1]])):
        if (u, v) not in counts or (v, u) not in counts or position[u] > position[v]:
            continue
        forward, backward = counts[(u, v)], counts[(v, u)]
        if forward >= backward:
            drop = (v, u)
        else:
            drop = (u, v)
        removed.append(RemovedEdge(*drop, counts[drop], "2-cycle"))
        del counts[drop]

    while True:
        candidates = _cycle_edges(graph.nodes, list(counts))
        if not candidates:
            break
        u, v = min(candidates, key=lambda e: (counts[e], e))
        removed.append(RemovedEdge(u, v, counts[(u, v)], "cycle"))
        del counts[(u, v)]

    parents = {n: [] for n in graph.nodes}
    for u, v in counts:
        parents[v].append(u)
    ordered = {n: tuple(sorted(ps, key=position.__getitem__)) for n, ps in parents.items()}
    return DagStructure(graph.nodes, ordered, counts, tuple(removed))


def to_structure(dag: DagStructure) -> BayesianNetwork:
    """One binary variable per node, every CPT row uniform."""
    return BayesianNetwork(
        dag.nodes,
        dict(dag.parents),
        {n: Cpt.uniform(dag.parents[n]) for n in dag.nodes},
    )


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def transition_graph_to_dot(graph: TransitionGraph, name: str = "transitions") -> str:
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;"]
    lines += [f"  {_quote(n)};" for n in graph.nodes]
    for (u, v), c in graph.edge_counts.items():
        lines.append(f'  {_quote(u)} -> {_quote(v)} [label="{c}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dag_to_dot(dag: DagStructure, name: str = "dag") -> str:
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;"]
    lines += [f"  {_quote(n)};" for n in dag.nodes]
    for u, v in dag.edges:
        count = dag.edge_counts.get((u, v))
        attr = f' [label="{count}"]' if count is not None else ""
        lines.append(f"  {_quote(u)} -> {_quote(v)}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def network_to_dot(net: BayesianNetwork, name: str = "network") -> str:
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;"]
    lines += [f"  {_quote(v)};" for v in net.variables]
    for v in net.variables:
        for p in net.parents[v]:
            lines.append(f"  {_quote(p)} -> {_quote(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
