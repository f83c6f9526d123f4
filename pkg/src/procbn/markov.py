"""First-order Markov-chain baseline."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import FormatError, ShapeError, StateError, TrainingError
from .eventlog import EventLog

START = "<START>"
END = "<END>"
TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """States plus a transition matrix whose row ``i`` is the next-state distribution of state ``i``.

    Rows of states never seen with a successor are all zero; such states are
    listed in :attr:`terminal`.
    """

    states: tuple[str, ...]
    transition: np.ndarray
    virtual_ends: bool = False
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        if len(set(states)) != len(states):
            raise StateError("duplicate state names")
        matrix = np.array(self.transition, dtype=float)
        if matrix.shape != (len(states), len(states)):
            raise ShapeError(f"transition matrix shape {matrix.shape} does not match {len(states)} states")
        if np.any(matrix < 0.0) or np.any(matrix > 1.0):
            raise StateError("transition probabilities must lie in [0, 1]")
        sums = matrix.sum(axis=1)
        bad = ~(np.isclose(sums, 1.0, rtol=0.0, atol=TOLERANCE) | (sums == 0.0))
        if np.any(bad):
            raise StateError(f"row {states[int(np.argmax(bad))]!r} is neither stochastic nor empty")
        matrix.setflags(write=False)
        object.__setattr__(self, "transition", matrix)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(states)})

    def __eq__(self, other):
        if not isinstance(other, MarkovChain):
            return NotImplemented
        return (
            self.states == other.states
            and self.virtual_ends == other.virtual_ends
            and np.array_equal(self.transition, other.transition)
        )

    @property
    def terminal(self) -> tuple[str, ...]:
        sums = self.transition.sum(axis=1)
        return tuple(s for s, total in zip(self.states, sums) if total == 0.0)

    def index(self, state: str) -> int:
        try:
            return self._index[state]
        except KeyError:
            raise StateError(f"unknown state {state!r}") from None

    def tau(self, source: str, target: str) -> float:
        return float(self.transition[self.index(source), self.index(target)])


def build_markov_chain(log: EventLog, use_virtual_ends: bool = True) -> MarkovChain:
    """Estimate transition probabilities as normalized adjacency counts."""
    if len(log) == 0:
        raise TrainingError("cannot train a Markov chain on an empty log")
    states = list(log.vocabulary)
    pairs: Counter[tuple[str, str]] = Counter()
    for trace in log:
        tasks = list(trace.tasks)
        if use_virtual_ends:
            tasks = [START, *tasks, END]
        pairs.update(zip(tasks, tasks[1:]))
    if use_virtual_ends:
        states = [START, *states, END]
    index = {s: i for i, s in enumerate(states)}
    counts = np.zeros((len(states), len(states)))
    for (u, v), c in pairs.items():
        counts[index[u], index[v]] = c
    totals = counts.sum(axis=1, keepdims=True)
    matrix = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    return MarkovChain(tuple(states), matrix, use_virtual_ends)


def step(chain: MarkovChain, state_vector: Sequence[float]) -> np.ndarray:
    """One-step evolution ``state_vector @ transition``."""
    vec = np.asarray(state_vector, dtype=float)
    if vec.shape != (len(chain.states),):
        raise ShapeError(f"state vector has shape {vec.shape}, expected ({len(chain.states)},)")
    if abs(vec.sum() - 1.0) > TOLERANCE:
        raise ShapeError("state vector does not sum to 1")
    empty = chain.transition.sum(axis=1) == 0.0
    if np.any(vec[empty] > 0.0):
        stuck = [s for s, e, p in zip(chain.states, empty, vec) if e and p > 0.0]
        raise StateError(f"probability mass on states without successors: {stuck}")
    return vec @ chain.transition


def chain_probability(chain: MarkovChain, sequence: Sequence[str]) -> float:
    """Product of transition probabilities along ``sequence``.

    With virtual ends the sequence is wrapped in START/END, so a single task
    is a valid sequence and termination is part of the probability.
    """
    seq = list(sequence)
    for s in seq:
        if s in (START, END) or s not in chain._index:
            raise StateError(f"unknown state {s!r}")
    if chain.virtual_ends:
        seq = [START, *seq, END]
    elif len(seq) < 2:
        raise StateError("need at least two states without virtual ends")
    prob = 1.0
    for u, v in zip(seq, seq[1:]):
        prob *= chain.transition[chain._index[u], chain._index[v]]
    return float(prob)


def dumps_chain(chain: MarkovChain, delimiter: str = ",") -> str:
    """Matrix as delimiter-separated text; the header row names the states."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(["state", *chain.states])
    for s, row in zip(chain.states, chain.transition):
        writer.writerow([s, *(repr(float(p)) for p in row)])
    return buf.getvalue()


def loads_chain(text: str, delimiter: str = ",") -> MarkovChain:
    rows = list(csv.reader(io.StringIO(text), delimiter=delimiter))
    if not rows or rows[0][:1] != ["state"]:
        raise FormatError("chain file must start with a 'state' header", line=1)
    states = tuple(rows[0][1:])
    body = [r for r in rows[1:] if r]
    if len(body) != len(states):
        raise FormatError(f"expected {len(states)} matrix rows, got {len(body)}")
    matrix = []
    for lineno, (row, expected) in enumerate(zip(body, states), start=2):
        if len(row) != len(states) + 1 or row[0] != expected:
            raise FormatError(f"malformed row for state {expected!r}", line=lineno)
        try:
            matrix.append([float(x) for x in row[1:]])
        except ValueError as exc:
            raise FormatError(str(exc), line=lineno) from None
    try:
        return MarkovChain(states, matrix, virtual_ends=START in states and END in states)
    except (StateError, ShapeError) as exc:
        raise FormatError(str(exc)) from None


def chain_to_dot(chain: MarkovChain, name: str = "chain", precision: int = 4) -> str:
    def q(s):
        return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'

    lines = [f"digraph {q(name)} {{", "  rankdir=LR;"]
    lines += [f"  {q(s)};" for s in chain.states]
    for i, u in enumerate(chain.states):
        for j, v in enumerate(chain.states):
            p = chain.transition[i, j]
            if p > 0.0:
                lines.append(f'  {q(u)} -> {q(v)} [label="{p:.{precision}f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
