"""Maximum-likelihood CPT estimation and post-learning semantic corrections."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bayesnet import BayesianNetwork, Cpt, parent_assignments, topological_order
from .errors import LearningError, StructureError, UnknownVariableError
from .eventlog import PresenceMatrix


@dataclass(frozen=True)
class LearnConfig:
    """Estimation controls.

    ``pseudocount`` is added to both the present and the absent count of
    every CPT row. ``max_iterations`` and ``loglik_threshold`` only matter
    for EM on incomplete data and are carried for configuration
    compatibility.
    """

    pseudocount: float = 1.0
    max_iterations: int = 100
    loglik_threshold: float = 0.05

    def __post_init__(self):
        if self.pseudocount < 0:
            raise ValueError("pseudocount must be non-negative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.loglik_threshold <= 0:
            raise ValueError("loglik_threshold must be positive")


@dataclass(frozen=True)
class ExclusionGroup:
    members: tuple[str, ...]

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if len(members) < 2:
            raise ValueError("an exclusion group needs at least two members")
        if len(set(members)) != len(members):
            raise ValueError(f"duplicate members in exclusion group {members}")


def _packed_rows(columns: np.ndarray) -> np.ndarray:
    # first column most significant, present = 1; matches Cpt.table()
    k = columns.shape[1]
    if k == 0:
        return np.zeros(columns.shape[0], dtype=np.intp)
    weights = 1 << np.arange(k - 1, -1, -1)
    return columns.astype(np.intp) @ weights


def _unpack(index: int, k: int) -> tuple[bool, ...]:
    return tuple(bool((index >> (k - 1 - j)) & 1) for j in range(k))


def mle_learn(
    structure: BayesianNetwork, data: PresenceMatrix, config: LearnConfig = LearnConfig()
) -> BayesianNetwork:
    """Fit every CPT row as ``(count(v present, u) + c) / (count(u) + 2c)``."""
    missing = [v for v in structure.variables if v not in data.variables]
    if missing:
        raise LearningError(f"training data lacks columns for {missing}")
    if len(data) == 0:
        raise LearningError("training data has no rows")
    column = {name: j for j, name in enumerate(data.variables)}
    c = float(config.pseudocount)
    cpts = {}
    for v in structure.variables:
        parents = structure.parents[v]
        k = len(parents)
        rows = _packed_rows(data.rows[:, [column[p] for p in parents]])
        child = data.rows[:, column[v]]
        totals = np.bincount(rows, minlength=2**k)
        present = np.bincount(rows, weights=child.astype(np.int64), minlength=2**k).astype(np.int64)
        table = {}
        for index in range(2**k):
            d, n = int(totals[index]), int(present[index])
            key = _unpack(index, k)
            if d + 2 * c == 0:
                assignment = ", ".join(
                    f"{p}={'present' if s else 'absent'}" for p, s in zip(parents, key)
                ) or "no parents"
                raise LearningError(
                    f"division by zero estimating {v} for unseen row ({assignment}); "
                    "use a positive pseudocount"
                )
            denom = d + 2 * c
            table[key] = ((n + c) / denom, (d - n + c) / denom)
        cpts[v] = Cpt(parents, table)
    return BayesianNetwork(structure.variables, structure.parents, cpts)


def log_likelihood(net: BayesianNetwork, data: PresenceMatrix) -> float:
    """``log L(theta : D)``, the sum over rows of the log joint probability."""
    column = {name: j for j, name in enumerate(data.variables)}
    total = 0.0
    for v in net.variables:
        cpt = net.cpts[v]
        rows = _packed_rows(data.rows[:, [column[p] for p in cpt.parent_order]])
        table = cpt.table()
        probs = np.where(data.rows[:, column[v]], table[rows, 0], table[rows, 1])
        if np.any(probs == 0.0):
            return -math.inf
        total += float(np.log(probs).sum())
    return total


def apply_absent_propagation(net: BayesianNetwork) -> BayesianNetwork:
    """A child whose parents are all absent is absent with certainty."""
    updates = {}
    for v in net.variables:
        cpt = net.cpts[v]
        if not cpt.parent_order:
            continue
        all_absent = (False,) * len(cpt.parent_order)
        rows = dict(cpt.rows)
        rows[all_absent] = (0.0, 1.0)
        updates[v] = Cpt(cpt.parent_order, rows)
    return net.with_cpts(updates) if updates else net


def apply_mutual_exclusion(net: BayesianNetwork, group: ExclusionGroup | Sequence[str]) -> BayesianNetwork:
    """Make the group's members pairwise exclusive.

    Each member gains an edge from every earlier member (in group order).
    Its CPT is widened by copying the old rows across the new parents'
    states, then every row with an earlier member present is forced to
    absent.
    """
    if not isinstance(group, ExclusionGroup):
        group = ExclusionGroup(tuple(group))
    for m in group.members:
        if m not in net.cpts:
            raise UnknownVariableError(m)

    parents = dict(net.parents)
    cpts = dict(net.cpts)
    for j, member in enumerate(group.members[1:], start=1):
        earlier = group.members[:j]
        old = cpts[member]
        new_parents = old.parent_order + tuple(p for p in earlier if p not in old.parent_order)
        positions = [new_parents.index(p) for p in old.parent_order]
        guard = [new_parents.index(p) for p in earlier]
        rows = {}
        for key in parent_assignments(len(new_parents)):
            if any(key[i] for i in guard):
                rows[key] = (0.0, 1.0)
            else:
                rows[key] = old.rows[tuple(key[i] for i in positions)]
        parents[member] = new_parents
        cpts[member] = Cpt(new_parents, rows)

    try:
        topological_order(net.variables, parents)
    except StructureError:
        raise StructureError(
            f"exclusion group {list(group.members)} introduces a directed cycle"
        ) from None
    return BayesianNetwork(net.variables, parents, cpts)


def learn_with_corrections(
    structure: BayesianNetwork,
    data: PresenceMatrix,
    config: LearnConfig = LearnConfig(),
    exclusions: Sequence[ExclusionGroup | Sequence[str]] = (),
    absent_propagation: bool = True,
) -> BayesianNetwork:
    """Fit a network whose exclusion edges are part of the structure during learning.

    The exclusion edges are added first so the widened CPTs are estimated
    from data instead of copied; absent-propagation and the exclusion zeros
    are applied afterwards.
    """
    for group in exclusions:
        structure = apply_mutual_exclusion(structure, group)
    net = mle_learn(structure, data, config)
    if absent_propagation:
        net = apply_absent_propagation(net)
    for group in exclusions:
        net = apply_mutual_exclusion(net, group)
    return net
