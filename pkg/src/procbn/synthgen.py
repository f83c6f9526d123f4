"""Synthetic event logs sampled from an absorbing Markov chain."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GeneratorSpecError
from .eventlog import EventLog, Trace

TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    """Ground-truth chain; ``end`` must be one of ``states`` and absorbing."""

    states: tuple[str, ...]
    transition: np.ndarray
    start: str
    n_cases: int
    seed: int = 0
    end: str = "END"

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        matrix = np.array(self.transition, dtype=float)
        object.__setattr__(self, "transition", matrix)
        n = len(states)
        if len(set(states)) != n:
            raise GeneratorSpecError("duplicate state names")
        if self.end not in states:
            raise GeneratorSpecError(f"end state {self.end!r} missing from states")
        if self.start not in states or self.start == self.end:
            raise GeneratorSpecError(f"start state {self.start!r} must be a non-end state")
        if matrix.shape != (n, n):
            raise GeneratorSpecError(f"transition shape {matrix.shape} does not match {n} states")
        if np.any(matrix < 0) or not np.allclose(matrix.sum(axis=1), 1.0, rtol=0, atol=TOLERANCE):
            raise GeneratorSpecError("transition rows must be non-negative and sum to 1")
        e = states.index(self.end)
        if matrix[e, e] != 1.0:
            raise GeneratorSpecError("end state must be absorbing")
        if self.n_cases < 1:
            raise GeneratorSpecError("n_cases must be positive")
        unreachable = self._cannot_reach_end()
        if unreachable:
            raise GeneratorSpecError(f"end state unreachable from {unreachable}")

    def _cannot_reach_end(self) -> list[str]:
        # reverse breadth-first search from END
        reach = {self.states.index(self.end)}
        frontier = list(reach)
        while frontier:
            j = frontier.pop()
            for i in np.flatnonzero(self.transition[:, j] > 0):
                if int(i) not in reach:
                    reach.add(int(i))
                    frontier.append(int(i))
        return [s for i, s in enumerate(self.states) if i not in reach]

    @property
    def tasks(self) -> tuple[str, ...]:
        return tuple(s for s in self.states if s != self.end)


def generate(spec: GeneratorSpec) -> EventLog:
    """Walk the chain ``n_cases`` times from ``start`` to ``end``; one RNG stream per call."""
    rng = np.random.default_rng(spec.seed)
    cdf = np.cumsum(spec.transition, axis=1)
    cdf[:, -1] = 1.0
    start = spec.states.index(spec.start)
    end = spec.states.index(spec.end)
    width = len(str(spec.n_cases))
    traces = []
    for case in range(1, spec.n_cases + 1):
        state = start
        tasks = []
        while state != end:
            tasks.append(spec.states[state])
            state = int(np.searchsorted(cdf[state], rng.random(), side="right"))
        traces.append(Trace(f"case{case:0{width}d}", tuple(tasks)))
    return EventLog(tuple(traces))


LOAN_STATES = (
    "A_SUBMITTED",
    "A_PARTLYSUBMITTED",
    "A_PREACCEPT",
    "A_ACCEPTED",
    "A_FINALIZED",
    "A_APPROVED",
    "A_REGISTERED",
    "A_ACTIVATED",
    "A_DECLINED",
    "A_CANCELLED",
    "END",
)

# Synthetic probabilities shaped like the loan-application A_ chain; not fitted to real data.
_LOAN_EDGES = {
    "A_SUBMITTED": {"A_PARTLYSUBMITTED": 1.0},
    "A_PARTLYSUBMITTED": {"A_PREACCEPT": 0.56, "A_DECLINED": 0.44},
    "A_PREACCEPT": {"A_ACCEPTED": 0.70, "A_DECLINED": 0.12, "A_CANCELLED": 0.15, "END": 0.03},
    "A_ACCEPTED": {"A_FINALIZED": 0.93, "A_DECLINED": 0.03, "A_CANCELLED": 0.04},
    "A_FINALIZED": {"A_APPROVED": 0.46, "A_DECLINED": 0.14, "A_CANCELLED": 0.40},
    "A_APPROVED": {"A_REGISTERED": 1.0},
    "A_REGISTERED": {"A_ACTIVATED": 1.0},
    "A_ACTIVATED": {"END": 1.0},
    "A_DECLINED": {"END": 1.0},
    "A_CANCELLED": {"END": 1.0},
    "END": {"END": 1.0},
}


def matrix_from_edges(states: Sequence[str], edges: dict[str, dict[str, float]]) -> np.ndarray:
    index = {s: i for i, s in enumerate(states)}
    m = np.zeros((len(states), len(states)))
    for u, row in edges.items():
        for v, p in row.items():
            m[index[u], index[v]] = p
    return m


def loan_preset(n_cases: int = 10_000, seed: int = 0) -> GeneratorSpec:
    return GeneratorSpec(
        LOAN_STATES, matrix_from_edges(LOAN_STATES, _LOAN_EDGES), "A_SUBMITTED", n_cases, seed
    )


PRESETS = {"loan": loan_preset}
