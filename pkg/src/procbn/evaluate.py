"""Validation reports: conditional queries against test frequencies, and BN vs Markov chain."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .bayesnet import BayesianNetwork, infer, sequence_probability
from .errors import EmptyConditioningError, StateError, UnknownVariableError
from .eventlog import EventLog
from .markov import MarkovChain, chain_probability


@dataclass(frozen=True)
class ConditionalRow:
    query: str
    empirical: float
    model: float

    @property
    def error_pct(self) -> float:
        return abs(self.empirical - self.model) * 100.0


@dataclass(frozen=True)
class ConditionalReport:
    """``empirical`` is the test-set frequency; ``model`` is the network's inference."""

    observed: str
    support: int
    rows: tuple[ConditionalRow, ...]


@dataclass(frozen=True)
class SequenceRow:
    sequence: tuple[str, ...]
    count: int
    bn: float
    mc: float

    @property
    def task_set(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.sequence)))

    @property
    def error_pct(self) -> float:
        return abs(self.bn - self.mc) * 100.0


@dataclass(frozen=True)
class SequenceComparison:
    rows: tuple[SequenceRow, ...]
    skipped: tuple[tuple[tuple[str, ...], int], ...] = ()

    @property
    def total_count(self) -> int:
        return sum(r.count for r in self.rows)

    @property
    def skipped_count(self) -> int:
        return sum(n for _, n in self.skipped)

    def _weighted(self, attr) -> float:
        total = self.total_count
        if total == 0:
            return 0.0
        return sum(r.count * getattr(r, attr) for r in self.rows) / total

    @property
    def weighted_bn(self) -> float:
        return self._weighted("bn")

    @property
    def weighted_mc(self) -> float:
        return self._weighted("mc")

    @property
    def weighted_error_pct(self) -> float:
        """``|weighted BN - weighted MC| * 100``."""
        return abs(self.weighted_bn - self.weighted_mc) * 100.0

    @property
    def mean_row_error_pct(self) -> float:
        """Count-weighted mean of the per-row errors; never smaller than :attr:`weighted_error_pct`."""
        return self._weighted("error_pct")


def conditional_report(net: BayesianNetwork, test: EventLog, observed: str) -> ConditionalReport:
    if observed not in net.cpts:
        raise UnknownVariableError(observed)
    conditioned = [set(t.tasks) for t in test if observed in t.tasks]
    if not conditioned:
        raise EmptyConditioningError(f"{observed!r} does not occur in any test trace")
    rows = []
    for query in net.variables:
        if query == observed:
            continue
        empirical = sum(query in tasks for tasks in conditioned) / len(conditioned)
        model = infer(net, query, {observed: True}).p_present
        rows.append(ConditionalRow(query, empirical, model))
    return ConditionalReport(observed, len(conditioned), tuple(rows))


def compare_sequences(net: BayesianNetwork, chain: MarkovChain, test: EventLog) -> SequenceComparison:
    """One row per distinct test sequence, in order of first occurrence."""
    counts: dict[tuple[str, ...], int] = {}
    for trace in test:
        counts[trace.tasks] = counts.get(trace.tasks, 0) + 1
    modeled = set(net.variables)
    rows, skipped = [], []
    for seq, n in counts.items():
        if not set(seq) <= modeled:
            skipped.append((seq, n))
            continue
        try:
            mc = chain_probability(chain, seq)
        except StateError:
            skipped.append((seq, n))
            continue
        rows.append(SequenceRow(seq, n, sequence_probability(net, seq), mc))
    return SequenceComparison(tuple(rows), tuple(skipped))


_CONDITIONAL_NOTE = (
    "test = empirical frequency among test traces containing the observed task; "
    "model = inference in the trained network"
)


def format_conditional(report: ConditionalReport) -> str:
    header = f"Observed: {report.observed} = present ({report.support} test traces)"
    width = max([len("Probability")] + [len(f"Pr( {r.query} = present )") for r in report.rows])
    lines = [header, f"# {_CONDITIONAL_NOTE}"]
    lines.append(f"{'Probability':<{width}}  {'Test':>8}  {'Model':>8}  {'Error %':>8}")
    for r in report.rows:
        label = f"Pr( {r.query} = present )"
        lines.append(f"{label:<{width}}  {r.empirical:8.4f}  {r.model:8.4f}  {r.error_pct:8.4f}")
    return "\n".join(lines) + "\n"


def conditional_to_csv(report: ConditionalReport, delimiter: str = ",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(["observed", "query", "test_probability", "model_probability", "error_pct"])
    for r in report.rows:
        w.writerow([report.observed, r.query, repr(r.empirical), repr(r.model), repr(r.error_pct)])
    return buf.getvalue()


def format_comparison(cmp: SequenceComparison, arrow: str = " -> ") -> str:
    labels = [arrow.join(r.sequence) for r in cmp.rows]
    width = max([len("Chain"), len("Total")] + [len(s) for s in labels])
    lines = [f"{'Chain':<{width}}  {'Occ.':>6}  {'BN':>10}  {'MC':>10}  {'Error %':>8}"]
    for label, r in zip(labels, cmp.rows):
        lines.append(f"{label:<{width}}  {r.count:6d}  {r.bn:10.6f}  {r.mc:10.6f}  {r.error_pct:8.4f}")
    lines.append(
        f"{'Total':<{width}}  {cmp.total_count:6d}  {cmp.weighted_bn:10.6f}  "
        f"{cmp.weighted_mc:10.6f}  {cmp.weighted_error_pct:8.4f}"
    )
    lines.append(f"# count-weighted mean of row errors: {cmp.mean_row_error_pct:.4f} %")
    if cmp.skipped:
        lines.append(f"# skipped {cmp.skipped_count} traces ({len(cmp.skipped)} distinct) with unmodeled tasks")
    return "\n".join(lines) + "\n"


def comparison_to_csv(cmp: SequenceComparison, delimiter: str = ",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(["sequence", "task_set", "count", "bn", "mc", "error_pct"])
    for r in cmp.rows:
        w.writerow([" > ".join(r.sequence), " | ".join(r.task_set), r.count, repr(r.bn), repr(r.mc), repr(r.error_pct)])
    w.writerow(["TOTAL", "", cmp.total_count, repr(cmp.weighted_bn), repr(cmp.weighted_mc), repr(cmp.weighted_error_pct)])
    return buf.getvalue()
