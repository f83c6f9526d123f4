import numpy as np
import pytest

from procbn.errors import GeneratorSpecError
from procbn.markov import END, build_markov_chain
from procbn.synthgen import LOAN_STATES, GeneratorSpec, generate, loan_preset, matrix_from_edges


def test_forced_path():
    spec = GeneratorSpec(("A", "B", "END"), [[0, 1, 0], [0, 0, 1], [0, 0, 1]], "A", 5)
    log = generate(spec)
    assert len(log) == 5
    assert all(t.tasks == ("A", "B") for t in log)


def test_deterministic():
    assert generate(loan_preset(200, 3)) == generate(loan_preset(200, 3))
    assert generate(loan_preset(200, 3)) != generate(loan_preset(200, 4))


def test_case_ids_padded():
    log = generate(loan_preset(120, 0))
    assert log.traces[0].case_id == "case001"
    assert log.traces[-1].case_id == "case120"


def test_every_trace_starts_at_start():
    log = generate(loan_preset(500, 1))
    assert all(t.tasks[0] == "A_SUBMITTED" for t in log)
    assert all("END" not in t.tasks for t in log)


class TestValidation:
    def test_unreachable_end(self):
        m = [[0, 1, 0], [1, 0, 0], [0, 0, 1]]
        with pytest.raises(GeneratorSpecError, match="unreachable"):
            GeneratorSpec(("A", "B", "END"), m, "A", 1)

    def test_not_stochastic(self):
        with pytest.raises(GeneratorSpecError):
            GeneratorSpec(("A", "END"), [[0.5, 0.4], [0, 1]], "A", 1)

    def test_end_not_absorbing(self):
        with pytest.raises(GeneratorSpecError):
            GeneratorSpec(("A", "END"), [[0, 1], [1, 0]], "A", 1)

    def test_bad_start(self):
        with pytest.raises(GeneratorSpecError):
            GeneratorSpec(("A", "END"), [[0, 1], [0, 1]], "END", 1)

    def test_zero_cases(self):
        with pytest.raises(GeneratorSpecError):
            GeneratorSpec(("A", "END"), [[0, 1], [0, 1]], "A", 0)


def recovery_error(seed, n_cases=10_000):
    """Max abs difference between the generator matrix and the chain re-estimated from its output."""
    spec = loan_preset(n_cases, seed)
    chain = build_markov_chain(generate(spec), use_virtual_ends=True)
    worst = 0.0
    for i, u in enumerate(LOAN_STATES):
        if u == "END":
            continue
        for j, v in enumerate(LOAN_STATES):
            target = END if v == "END" else v
            est = chain.tau(u, target) if target in chain.states else 0.0
            worst = max(worst, abs(est - spec.transition[i, j]))
    return worst


def test_recovery_within_tolerance():
    errors = [recovery_error(seed) for seed in range(3)]
    assert np.mean(errors) <= 0.02
    assert max(errors) <= 0.02


def test_matrix_from_edges():
    m = matrix_from_edges(("A", "B"), {"A": {"B": 1.0}})
    assert m.tolist() == [[0.0, 1.0], [0.0, 0.0]]
