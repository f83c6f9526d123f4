"""Text formats for networks and training data.

Network document (tab-separated, one record per line)::

    procbn-network<TAB>1
    variable<TAB><name>
    states<TAB>present<TAB>absent
    parents[<TAB><parent>]...
    row[<TAB><parent state>]...<TAB><p_present><TAB><p_absent>
    ...
    end

Rows appear in all-present-first order, and probabilities are written in
``.16e`` notation so a round trip is exact. See ``docs/formats.md`` for
the full grammar.
"""

from __future__ import annotations

import csv
import io
from typing import Sequence

from .bayesnet import TOLERANCE, BayesianNetwork, Cpt, parent_assignments, parse_state, state_name, topological_order
from .errors import (
    AssignmentError,
    CyclicParentsError,
    FormatError,
    NormalizationError,
    StructureError,
    VersionError,
)
from .eventlog import ABSENT, PRESENT, PresenceMatrix

MAGIC = "procbn-network"
FORMAT_VERSION = 1


def _fmt(p: float) -> str:
    return format(float(p), ".16e")


def dumps_network(net: BayesianNetwork) -> str:
    lines = [f"{MAGIC}\t{FORMAT_VERSION}"]
    for v in net.variables:
        cpt = net.cpts[v]
        lines.append(f"variable\t{v}")
        lines.append(f"states\t{PRESENT}\t{ABSENT}")
        lines.append("\t".join(["parents", *cpt.parent_order]))
        for key in parent_assignments(len(cpt.parent_order)):
            p_present, p_absent = cpt.rows[key]
            lines.append("\t".join(["row", *map(state_name, key), _fmt(p_present), _fmt(p_absent)]))
        lines.append("end")
    return "\n".join(lines) + "\n"


def save_network(net: BayesianNetwork) -> bytes:
    return dumps_network(net).encode("utf-8")


def _number(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise FormatError(f"not a number: {token!r}", line=lineno) from None


def loads_network(text: str) -> BayesianNetwork:
    lines = text.splitlines()
    records = [
        (i, line.split("\t"))
        for i, line in enumerate(lines, start=1)
        if line.strip() and not line.startswith("#")
    ]
    if not records:
        raise FormatError("empty network document", line=1)
    lineno, head = records[0]
    if head[0] != MAGIC or len(head) != 2:
        raise FormatError(f"expected '{MAGIC}<TAB>version' header", line=lineno)
    if head[1] != str(FORMAT_VERSION):
        raise VersionError(f"unsupported format version {head[1]!r}", line=lineno)

    variables: list[str] = []
    parents: dict[str, tuple[str, ...]] = {}
    tables: dict[str, dict] = {}
    current = None
    pos = 1
    while pos < len(records):
        lineno, fields = records[pos]
        pos += 1
        kind = fields[0]
        if current is None:
            if kind != "variable" or len(fields) != 2 or not fields[1]:
                raise FormatError("expected 'variable<TAB>name'", line=lineno)
            current = fields[1]
            if current in parents:
                raise FormatError(f"variable {current!r} declared twice", line=lineno)
            variables.append(current)
            for name in ("states", "parents"):
                if pos >= len(records):
                    raise FormatError(f"document ends before '{name}' of {current!r}", line=lineno)
                lineno, fields = records[pos]
                pos += 1
                if fields[0] != name:
                    raise FormatError(f"expected '{name}' for {current!r}", line=lineno)
                if name == "states" and fields[1:] != [PRESENT, ABSENT]:
                    raise FormatError("states must be 'present<TAB>absent'", line=lineno)
                if name == "parents":
                    parents[current] = tuple(fields[1:])
            tables[current] = {}
            continue
        if kind == "row":
            k = len(parents[current])
            if len(fields) != k + 3:
                raise FormatError(f"row for {current!r} needs {k} parent states and 2 probabilities", line=lineno)
            try:
                key = tuple(parse_state(t) for t in fields[1 : k + 1])
            except AssignmentError as exc:
                raise FormatError(str(exc), line=lineno) from None
            if key in tables[current]:
                raise FormatError(f"duplicate row {fields[1:k + 1]} for {current!r}", line=lineno)
            p_present, p_absent = _number(fields[k + 1], lineno), _number(fields[k + 2], lineno)
            if not (0.0 <= p_present <= 1.0 and 0.0 <= p_absent <= 1.0):
                raise NormalizationError(f"probabilities of {current!r} outside [0, 1]", line=lineno)
            if abs(p_present + p_absent - 1.0) > TOLERANCE:
                raise NormalizationError(
                    f"row of {current!r} sums to {p_present + p_absent!r}", line=lineno
                )
            tables[current][key] = (p_present, p_absent)
        elif kind == "end" and len(fields) == 1:
            expected = 2 ** len(parents[current])
            if len(tables[current]) != expected:
                raise FormatError(
                    f"{current!r} has {len(tables[current])} rows, expected {expected}", line=lineno
                )
            current = None
        else:
            raise FormatError(f"unexpected record {kind!r}", line=lineno)
    if current is not None:
        raise FormatError(f"missing 'end' for {current!r}", line=records[-1][0])

    known = set(variables)
    for v, ps in parents.items():
        for p in ps:
            if p not in known:
                raise FormatError(f"{v!r} has undeclared parent {p!r}")
    try:
        topological_order(variables, parents)
    except StructureError as exc:
        raise CyclicParentsError(str(exc)) from None
    try:
        return BayesianNetwork(
            tuple(variables), parents, {v: Cpt(parents[v], tables[v]) for v in variables}
        )
    except StructureError as exc:
        raise FormatError(str(exc)) from None


def load_network(data: bytes | str) -> BayesianNetwork:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return loads_network(data)


def dumps_training(matrix: PresenceMatrix, delimiter: str = ",") -> str:
    """Header of variable names, then one present/absent row per trace."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(matrix.variables)
    for row in matrix.rows:
        writer.writerow([PRESENT if x else ABSENT for x in row])
    return buf.getvalue()


def save_training(matrix: PresenceMatrix, delimiter: str = ",") -> bytes:
    return dumps_training(matrix, delimiter).encode("utf-8")


def loads_training(text: str, delimiter: str = ",") -> PresenceMatrix:
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("training file is empty", line=1) from None
    if not header or any(not h for h in header):
        raise FormatError("header must list variable names", line=1)
    rows: list[Sequence[bool]] = []
    for record in reader:
        if not record:
            continue
        if len(record) != len(header):
            raise FormatError(
                f"expected {len(header)} tokens, got {len(record)}", line=reader.line_num
            )
        row = []
        for token in record:
            if token == PRESENT:
                row.append(True)
            elif token == ABSENT:
                row.append(False)
            else:
                raise FormatError(f"invalid token {token!r}", line=reader.line_num)
        rows.append(row)
    return PresenceMatrix(tuple(header), rows)


def load_training(data: bytes | str, delimiter: str = ",") -> PresenceMatrix:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return loads_training(data, delimiter)
