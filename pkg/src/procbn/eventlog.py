"""Event-log ingestion: parsing, filtering, statistics, splitting and encoding."""

from __future__ import annotations

import csv
import enum
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Iterator, Sequence, TextIO

import numpy as np

from .errors import EmptyLogError, EncodingError, ParseError, SchemaError, SplitError

PRESENT = "present"
ABSENT = "absent"


class Lifecycle(enum.Enum):
    SCHEDULE = "SCHEDULE"
    START = "START"
    COMPLETE = "COMPLETE"
    OTHER = "OTHER"

    @classmethod
    def parse(cls, raw: str) -> "Lifecycle":
        try:
            return cls(raw.strip().upper())
        except ValueError:
            return cls.OTHER


@dataclass(frozen=True)
class LogConfig:
    """Column mapping for delimiter-separated logs."""

    delimiter: str = ","
    case_column: str = "caseId"
    task_column: str = "task"
    lifecycle_column: str = "lifecycle"
    keep: str = "COMPLETE"


@dataclass(frozen=True)
class Event:
    case_id: str
    task: str
    lifecycle: Lifecycle
    ordinal: int


@dataclass(frozen=True)
class Trace:
    case_id: str
    tasks: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if not self.tasks:
            raise ValueError(f"trace {self.case_id!r} is empty")

    def __len__(self):
        return len(self.tasks)


@dataclass(frozen=True)
class EventLog:
    traces: tuple[Trace, ...]
    vocabulary: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        traces = tuple(self.traces)
        object.__setattr__(self, "traces", traces)
        seen: dict[str, None] = {}
        cases: set[str] = set()
        for trace in traces:
            if trace.case_id in cases:
                raise ValueError(f"duplicate case id {trace.case_id!r}")
            cases.add(trace.case_id)
            for task in trace.tasks:
                seen.setdefault(task, None)
        object.__setattr__(self, "vocabulary", tuple(seen))

    def __len__(self):
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    @classmethod
    def from_sequences(cls, sequences: Iterable[Sequence[str]]) -> "EventLog":
        """Build a log with case ids ``"1"``, ``"2"``, ... from bare task lists."""
        return cls(tuple(Trace(str(i), tuple(s)) for i, s in enumerate(sequences, 1)))


@dataclass(frozen=True, eq=False)
class PresenceMatrix:
    """Binary occurrence matrix; ``rows[i, j]`` is True iff variable j occurs in trace i."""

    variables: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        rows = np.asarray(self.rows, dtype=bool)
        if rows.size == 0:
            rows = rows.reshape(0, len(self.variables))
        if rows.ndim != 2 or rows.shape[1] != len(self.variables):
            raise ValueError(
                f"rows must have shape (n, {len(self.variables)}), got {rows.shape}"
            )
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    def __eq__(self, other):
        if not isinstance(other, PresenceMatrix):
            return NotImplemented
        return self.variables == other.variables and np.array_equal(self.rows, other.rows)

    def __len__(self):
        return self.rows.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.variables.index(name)]


def _text_stream(source) -> TextIO:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8-sig"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline="")


def _iter_rows(source, config: LogConfig) -> Iterator[tuple[str, str, str]]:
    """Yield ``(case_id, task, raw_lifecycle)`` for every data row."""
    reader = csv.reader(_text_stream(source), delimiter=config.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyLogError("event log is empty") from None
    header = [h.strip() for h in header]
    index = []
    for column in (config.case_column, config.task_column, config.lifecycle_column):
        if column not in header:
            raise SchemaError(column)
        index.append(header.index(column))
    case_col, task_col, life_col = index

    for record in reader:
        if not record or (len(record) == 1 and not record[0].strip()):
            continue
        if len(record) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, got {len(record)}", line=reader.line_num
            )
        task = record[task_col].strip()
        if not task:
            raise ParseError("empty task name", line=reader.line_num)
        yield record[case_col], task, record[life_col]


def read_events(source: BinaryIO | bytes | str, config: LogConfig = LogConfig()) -> Iterator[Event]:
    """Yield every event in file order, before any lifecycle filtering."""
    ordinals: Counter[str] = Counter()
    for case_id, task, lifecycle in _iter_rows(source, config):
        yield Event(case_id, task, Lifecycle.parse(lifecycle), ordinals[case_id])
        ordinals[case_id] += 1


def parse_log(source: BinaryIO | bytes | str, config: LogConfig = LogConfig()) -> EventLog:
    """Group the events whose lifecycle equals ``config.keep`` by case, in file order."""
    keep = config.keep.strip().upper()
    grouped: dict[str, list[str]] = {}
    for case_id, task, lifecycle in _iter_rows(source, config):
        if lifecycle.strip().upper() == keep:
            grouped.setdefault(case_id, []).append(task)
    if not grouped:
        raise EmptyLogError(f"no events with lifecycle {config.keep!r}")
    return EventLog(tuple(Trace(case, tuple(tasks)) for case, tasks in grouped.items()))


def write_log(log: EventLog, stream: TextIO, config: LogConfig = LogConfig()) -> None:
    """Serialize ``log`` in the schema :func:`parse_log` reads, one event per row."""
    writer = csv.writer(stream, delimiter=config.delimiter, lineterminator="\n")
    writer.writerow([config.case_column, config.task_column, config.lifecycle_column])
    for trace in log:
        for task in trace.tasks:
            writer.writerow([trace.case_id, task, config.keep])


def dumps_log(log: EventLog, config: LogConfig = LogConfig()) -> str:
    buf = io.StringIO()
    write_log(log, buf, config)
    return buf.getvalue()


def filter_prefix(log: EventLog, prefix: str) -> EventLog:
    if not prefix:
        return log
    traces = []
    for trace in log:
        kept = tuple(t for t in trace.tasks if t.startswith(prefix))
        if kept:
            traces.append(Trace(trace.case_id, kept))
    return EventLog(tuple(traces))


def log_statistics(log: EventLog) -> dict[str, int]:
    """Total occurrences of each task, in vocabulary order."""
    counts = Counter(task for trace in log for task in trace.tasks)
    return {task: counts[task] for task in log.vocabulary}


def split_cases(log: EventLog, train_fraction: float, seed: int) -> tuple[EventLog, EventLog]:
    """Seeded random split at case granularity.

    The training half receives ``round_half_up(train_fraction * N)`` traces.
    Both halves keep the original trace order.
    """
    n = len(log)
    if n < 2:
        raise SplitError(f"need at least 2 traces to split, got {n}")
    if not 0.0 < train_fraction < 1.0:
        raise SplitError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_train = math.floor(train_fraction * n + 0.5)
    order = np.random.default_rng(seed).permutation(n)
    train_idx = np.sort(order[:n_train])
    test_idx = np.sort(order[n_train:])
    traces = log.traces
    return (
        EventLog(tuple(traces[i] for i in train_idx)),
        EventLog(tuple(traces[i] for i in test_idx)),
    )


def encode_presence(log: EventLog, variables: Sequence[str]) -> PresenceMatrix:
    variables = tuple(variables)
    column = {name: j for j, name in enumerate(variables)}
    rows = np.zeros((len(log), len(variables)), dtype=bool)
    for i, trace in enumerate(log):
        for task in trace.tasks:
            try:
                rows[i, column[task]] = True
            except KeyError:
                raise EncodingError(task) from None
    return PresenceMatrix(variables, rows)
