"""Binary-variable Bayesian Networks with exact inference by enumeration.

Every variable has the two states *present* (``True``) and *absent*
(``False``). A CPT row is keyed by the tuple of parent states, in the
CPT's parent order, and stores the pair ``(p_present, p_absent)``.

Inference sums the full joint over every completion of the unobserved
variables and normalizes over the query's two states. The sums are
vectorized with numpy and processed in fixed-size chunks so memory stays
bounded up to the variable limit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    AssignmentError,
    ModelError,
    QueryError,
    StructureError,
    UnknownVariableError,
    ZeroEvidenceError,
)

TOLERANCE = 1e-9
MAX_VARIABLES = 25
_CHUNK_BITS = 16

State = bool
Assignment = tuple[bool, ...]


def parse_state(value) -> bool:
    """Accept ``True``/``False`` or the tokens ``present``/``absent``."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, str):
        token = value.strip().lower()
        if token == "present":
            return True
        if token == "absent":
            return False
    raise AssignmentError(f"invalid state {value!r}; expected present or absent")


def state_name(state: bool) -> str:
    return "present" if state else "absent"


def parent_assignments(k: int) -> list[Assignment]:
    """All ``2**k`` parent assignments, all-present first."""
    return list(itertools.product((True, False), repeat=k))


def _row_index(assignment: Sequence[bool]) -> int:
    # present = 1, first parent most significant
    index = 0
    for state in assignment:
        index = (index << 1) | int(state)
    return index


@dataclass(frozen=True)
class Cpt:
    parent_order: tuple[str, ...]
    rows: Mapping[Assignment, tuple[float, float]]

    def __post_init__(self):
        object.__setattr__(self, "parent_order", tuple(self.parent_order))
        k = len(self.parent_order)
        if len(set(self.parent_order)) != k:
            raise StructureError(f"duplicate parents in {self.parent_order}")
        rows = {}
        for key, (p_present, p_absent) in self.rows.items():
            key = tuple(bool(s) for s in key)
            if len(key) != k:
                raise StructureError(f"row key {key} does not match {k} parents")
            p_present, p_absent = float(p_present), float(p_absent)
            if not (0.0 <= p_present <= 1.0 and 0.0 <= p_absent <= 1.0):
                raise StructureError(f"row {key} has probabilities outside [0, 1]")
            if abs(p_present + p_absent - 1.0) > TOLERANCE:
                raise StructureError(
                    f"row {key} sums to {p_present + p_absent!r}, not 1"
                )
            rows[key] = (p_present, p_absent)
        if len(rows) != 2**k:
            raise StructureError(f"CPT has {len(rows)} rows, expected {2 ** k}")
        object.__setattr__(self, "rows", {a: rows[a] for a in parent_assignments(k)})

    @classmethod
    def uniform(cls, parents: Sequence[str] = ()) -> "Cpt":
        return cls(tuple(parents), {a: (0.5, 0.5) for a in parent_assignments(len(parents))})

    @classmethod
    def from_present(cls, parents: Sequence[str], p_present: Sequence[float]) -> "Cpt":
        """Build from ``p_present`` values listed in :func:`parent_assignments` order."""
        keys = parent_assignments(len(parents))
        if len(p_present) != len(keys):
            raise StructureError(f"expected {len(keys)} values, got {len(p_present)}")
        return cls(tuple(parents), {a: (float(p), 1.0 - float(p)) for a, p in zip(keys, p_present)})

    def p(self, state: bool, parent_states: Sequence[bool] = ()) -> float:
        p_present, p_absent = self.rows[tuple(parent_states)]
        return p_present if state else p_absent

    def table(self) -> np.ndarray:
        """Array of shape ``(2**k, 2)`` indexed by the packed parent assignment."""
        out = np.empty((2 ** len(self.parent_order), 2))
        for key, pair in self.rows.items():
            out[_row_index(key)] = pair
        return out


@dataclass(frozen=True)
class Posterior:
    variable: str
    p_present: float
    p_absent: float

    def __post_init__(self):
        if abs(self.p_present + self.p_absent - 1.0) > TOLERANCE:
            raise ValueError(f"posterior for {self.variable} does not sum to 1")


@dataclass(frozen=True)
class BayesianNetwork:
    variables: tuple[str, ...]
    parents: Mapping[str, tuple[str, ...]]
    cpts: Mapping[str, Cpt]
    _order: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        variables = tuple(self.variables)
        object.__setattr__(self, "variables", variables)
        if len(set(variables)) != len(variables):
            raise StructureError("duplicate variable names")
        known = set(variables)
        parents = {}
        for v in variables:
            ps = tuple(self.parents.get(v, ()))
            for p in ps:
                if p not in known:
                    raise UnknownVariableError(p)
                if p == v:
                    raise StructureError(f"{v} lists itself as a parent")
            parents[v] = ps
        extra = set(self.parents) - known
        if extra:
            raise UnknownVariableError(sorted(extra)[0])
        cpts = {}
        for v in variables:
            if v not in self.cpts:
                raise StructureError(f"missing CPT for {v}")
            cpt = self.cpts[v]
            if cpt.parent_order != parents[v]:
                raise StructureError(
                    f"CPT parent order {cpt.parent_order} differs from parents {parents[v]} of {v}"
                )
            cpts[v] = cpt
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "cpts", cpts)
        object.__setattr__(self, "_order", topological_order(variables, parents))

    def __len__(self):
        return len(self.variables)

    @property
    def topological(self) -> tuple[str, ...]:
        return self._order

    def children(self, variable: str) -> tuple[str, ...]:
        return tuple(v for v in self.variables if variable in self.parents[v])

    def with_cpts(self, cpts: Mapping[str, Cpt]) -> "BayesianNetwork":
        """Return a copy with some CPTs swapped; parent sets follow the new CPTs."""
        for v in cpts:
            if v not in self.parents:
                raise UnknownVariableError(v)
        new_cpts = {**self.cpts, **cpts}
        new_parents = {v: new_cpts[v].parent_order for v in self.variables}
        return BayesianNetwork(self.variables, new_parents, new_cpts)


def topological_order(variables: Sequence[str], parents: Mapping[str, Sequence[str]]) -> tuple[str, ...]:
    """Kahn's algorithm, ties broken by position in ``variables``."""
    position = {v: i for i, v in enumerate(variables)}
    remaining = {v: len(parents.get(v, ())) for v in variables}
    children: dict[str, list[str]] = {v: [] for v in variables}
    for v in variables:
        for p in parents.get(v, ()):
            children[p].append(v)
    ready = sorted((v for v, d in remaining.items() if d == 0), key=position.__getitem__)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for c in children[v]:
            remaining[c] -= 1
            if remaining[c] == 0:
                ready.append(c)
                ready.sort(key=position.__getitem__)
    if len(order) != len(variables):
        stuck = [v for v in variables if v not in set(order)]
        raise StructureError(f"parent relation has a cycle through {stuck}")
    return tuple(order)


def _check_size(net: BayesianNetwork, max_variables: int) -> None:
    if len(net.variables) > max_variables:
        raise ModelError(
            f"network has {len(net.variables)} variables; enumeration limit is {max_variables}"
        )


def _normalize_evidence(net: BayesianNetwork, evidence: Mapping[str, object] | None) -> dict[str, bool]:
    out = {}
    for name, value in (evidence or {}).items():
        if name not in net.cpts:
            raise UnknownVariableError(name)
        out[name] = parse_state(value)
    return out


def joint_probability(net: BayesianNetwork, assignment: Mapping[str, object]) -> float:
    """Product of local conditionals for a complete assignment."""
    missing = [v for v in net.variables if v not in assignment]
    if missing:
        raise AssignmentError(f"assignment misses variables {missing}")
    states = _normalize_evidence(net, assignment)
    prob = 1.0
    for v in net.variables:
        cpt = net.cpts[v]
        prob *= cpt.p(states[v], [states[p] for p in cpt.parent_order])
    return prob


class _Enumerator:
    """Vectorized summation of the joint over free variables."""

    def __init__(self, net: BayesianNetwork):
        self.index = {v: i for i, v in enumerate(net.variables)}
        self.n = len(net.variables)
        self.factors = []
        for v in net.variables:
            cpt = net.cpts[v]
            pidx = np.array([self.index[p] for p in cpt.parent_order], dtype=np.intp)
            weights = (1 << np.arange(len(pidx) - 1, -1, -1)).astype(np.intp)
            self.factors.append((self.index[v], pidx, weights, cpt.table()))

    def mass(self, fixed: Mapping[str, bool]) -> float:
        free = [i for v, i in self.index.items() if v not in fixed]
        h = len(free)
        total = 0.0
        chunk = 1 << min(h, _CHUNK_BITS)
        shifts = np.arange(h - 1, -1, -1, dtype=np.int64)
        base = np.zeros(self.n, dtype=bool)
        for v, s in fixed.items():
            base[self.index[v]] = s
        for start in range(0, 1 << h, chunk):
            codes = np.arange(start, start + chunk, dtype=np.int64)
            states = np.broadcast_to(base, (chunk, self.n)).copy()
            if h:
                states[:, free] = ((codes[:, None] >> shifts) & 1).astype(bool)
            prob = np.ones(chunk)
            for vi, pidx, weights, table in self.factors:
                rows = states[:, pidx].astype(np.intp) @ weights if len(pidx) else 0
                prob *= np.where(states[:, vi], table[rows, 0], table[rows, 1])
            total += float(prob.sum())
        return total


def query_masses(
    net: BayesianNetwork,
    query: str,
    evidence: Mapping[str, object] | None = None,
    max_variables: int = MAX_VARIABLES,
) -> tuple[float, float]:
    """Unnormalized ``(Pr(query=present, e), Pr(query=absent, e))``."""
    if query not in net.cpts:
        raise UnknownVariableError(query)
    ev = _normalize_evidence(net, evidence)
    if query in ev:
        raise QueryError(f"query variable {query!r} is also in the evidence")
    _check_size(net, max_variables)
    engine = _Enumerator(net)
    return engine.mass({**ev, query: True}), engine.mass({**ev, query: False})


def infer(
    net: BayesianNetwork,
    query: str,
    evidence: Mapping[str, object] | None = None,
    max_variables: int = MAX_VARIABLES,
) -> Posterior:
    """Exact ``Pr(query | evidence)`` by enumeration."""
    m_present, m_absent = query_masses(net, query, evidence, max_variables)
    total = m_present + m_absent
    if total <= 0.0:
        raise ZeroEvidenceError(f"evidence {dict(evidence or {})} has probability zero")
    return Posterior(query, m_present / total, m_absent / total)


def evidence_probability(
    net: BayesianNetwork, evidence: Mapping[str, object] | None = None, max_variables: int = MAX_VARIABLES
) -> float:
    """``Pr(e)``, the total mass consistent with the evidence."""
    _check_size(net, max_variables)
    return _Enumerator(net).mass(_normalize_evidence(net, evidence))


def marginals(net: BayesianNetwork, max_variables: int = MAX_VARIABLES) -> dict[str, Posterior]:
    return {v: infer(net, v, {}, max_variables) for v in net.variables}


def infer_batch(
    net: BayesianNetwork,
    queries: Iterable[tuple[str, Mapping[str, object] | None]],
    max_variables: int = MAX_VARIABLES,
) -> list[Posterior]:
    return [infer(net, q, e, max_variables) for q, e in queries]


def sequence_probability(net: BayesianNetwork, present_set: Iterable[str]) -> float:
    """Joint probability that exactly ``present_set`` occurs and every other task is absent."""
    present = set(present_set)
    unknown = present - set(net.variables)
    if unknown:
        raise UnknownVariableError(sorted(unknown)[0])
    return joint_probability(net, {v: v in present for v in net.variables})
