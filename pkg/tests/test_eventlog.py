import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procbn.errors import EmptyLogError, EncodingError, ParseError, SchemaError, SplitError
from procbn.eventlog import (
    EventLog,
    Lifecycle,
    LogConfig,
    Trace,
    dumps_log,
    encode_presence,
    filter_prefix,
    log_statistics,
    parse_log,
    read_events,
    split_cases,
)
from conftest import LOAN_VARS

SMALL = b"caseId,task,lifecycle\n1,A,COMPLETE\n1,B,COMPLETE\n2,A,COMPLETE\n"


class TestParse:
    def test_groups_by_case(self):
        log = parse_log(io.BytesIO(SMALL))
        assert [t.case_id for t in log] == ["1", "2"]
        assert [t.tasks for t in log] == [("A", "B"), ("A",)]
        assert log.vocabulary == ("A", "B")

    def test_interleaved_cases_keep_file_order(self):
        data = b"caseId,task,lifecycle\n1,A,COMPLETE\n2,C,COMPLETE\n1,B,COMPLETE\n2,A,COMPLETE\n"
        log = parse_log(data)
        assert log.traces == (Trace("1", ("A", "B")), Trace("2", ("C", "A")))
        # first appearance in trace order, not raw file order
        assert log.vocabulary == ("A", "B", "C")

    def test_lifecycle_filter(self):
        data = (
            b"caseId,task,lifecycle\n"
            b"1,A,SCHEDULE\n1,A,START\n1,A,COMPLETE\n1,B,complete\n2,C,START\n"
        )
        log = parse_log(data)
        assert len(log) == 1
        assert log.traces[0].tasks == ("A", "B")

    def test_custom_schema(self):
        data = "case;activity;lc;resource\n7;X;done;bob\n7;Y;done;ann\n"
        cfg = LogConfig(delimiter=";", case_column="case", task_column="activity", lifecycle_column="lc", keep="done")
        assert parse_log(data, cfg).traces[0].tasks == ("X", "Y")

    def test_only_schedule_rows_is_empty(self):
        with pytest.raises(EmptyLogError):
            parse_log(b"caseId,task,lifecycle\n1,A,SCHEDULE\n2,B,SCHEDULE\n")

    def test_empty_file(self):
        with pytest.raises(EmptyLogError):
            parse_log(b"")

    def test_missing_column_named(self):
        with pytest.raises(SchemaError, match="lifecycle"):
            parse_log(b"caseId,task\n1,A\n")

    def test_malformed_row_line_number(self):
        with pytest.raises(ParseError) as exc:
            parse_log(b"caseId,task,lifecycle\n1,A,COMPLETE\n1,B\n")
        assert exc.value.line == 3

    def test_events_have_contiguous_ordinals(self):
        events = list(read_events(b"caseId,task,lifecycle\n1,A,COMPLETE\n2,B,START\n1,C,SCHEDULE\n"))
        assert [(e.case_id, e.ordinal) for e in events] == [("1", 0), ("2", 0), ("1", 1)]
        assert events[1].lifecycle is Lifecycle.START
        assert Lifecycle.parse("weird") is Lifecycle.OTHER

    def test_bom_is_ignored(self):
        assert len(parse_log(b"\xef\xbb\xbf" + SMALL)) == 2


class TestFilterAndStats:
    def test_prefix(self):
        log = EventLog.from_sequences([["A_SUB", "W_Call", "A_DEC"]])
        assert filter_prefix(log, "A_").traces[0].tasks == ("A_SUB", "A_DEC")

    def test_empty_traces_dropped(self):
        log = EventLog.from_sequences([["W_x"], ["A_y"]])
        out = filter_prefix(log, "A_")
        assert len(out) == 1 and out.vocabulary == ("A_y",)

    def test_empty_prefix_identity(self):
        log = EventLog.from_sequences([["a", "b"], ["c"]])
        assert filter_prefix(log, "") == log

    def test_statistics(self):
        assert log_statistics(EventLog.from_sequences([["A", "B"], ["A"]])) == {"A": 2, "B": 1}
        assert log_statistics(EventLog(())) == {}

    def test_repeats_counted(self):
        assert log_statistics(EventLog.from_sequences([["A", "A", "B"]])) == {"A": 2, "B": 1}


class TestSplit:
    def test_sizes_and_disjoint(self):
        log = EventLog.from_sequences([["A"]] * 10)
        train, test = split_cases(log, 0.7, 42)
        assert (len(train), len(test)) == (7, 3)
        assert not {t.case_id for t in train} & {t.case_id for t in test}

    def test_deterministic(self):
        log = EventLog.from_sequences([["A"]] * 50)
        assert split_cases(log, 0.7, 3) == split_cases(log, 0.7, 3)
        assert split_cases(log, 0.7, 3) != split_cases(log, 0.7, 4)

    def test_loan_sized_rounding(self):
        log = EventLog.from_sequences([["A"]] * 13087)
        train, test = split_cases(log, 0.7, 0)
        # 0.7 * 13087 = 9160.9
        assert (len(train), len(test)) == (9161, 3926)

    def test_round_half_up(self):
        log = EventLog.from_sequences([["A"]] * 5)
        assert len(split_cases(log, 0.5, 0)[0]) == 3

    def test_too_few(self):
        with pytest.raises(SplitError):
            split_cases(EventLog.from_sequences([["A"]]), 0.7, 0)

    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(2, 200), frac=st.floats(0.01, 0.99), seed=st.integers(0, 2**31))
    def test_partition_property(self, n, frac, seed):
        log = EventLog.from_sequences([[f"t{i % 3}"] for i in range(n)])
        train, test = split_cases(log, frac, seed)
        ids_train = {t.case_id for t in train}
        ids_test = {t.case_id for t in test}
        assert len(train) + len(test) == n
        assert not ids_train & ids_test
        assert ids_train | ids_test == {t.case_id for t in log}
        assert len(train) == math.floor(frac * n + 0.5)


class TestEncode:
    def test_row(self):
        m = encode_presence(EventLog.from_sequences([["A", "C"]]), ["A", "B", "C"])
        assert m.rows.tolist() == [[True, False, True]]

    def test_repeats_collapse(self):
        m = encode_presence(EventLog.from_sequences([["A", "A", "B"]]), ["A", "B"])
        assert m.rows.tolist() == [[True, True]]

    def test_loan_trace(self):
        trace = ["A_SUBMITTED", "A_PARTLYSUBMITTED", "A_DECLINED"]
        m = encode_presence(EventLog.from_sequences([trace]), LOAN_VARS)
        assert int(m.rows.sum()) == 3
        assert [v for v, x in zip(m.variables, m.rows[0]) if x] == trace

    def test_unknown_task(self):
        with pytest.raises(EncodingError, match="Z"):
            encode_presence(EventLog.from_sequences([["A", "Z"]]), ["A"])

    def test_shape(self):
        log = EventLog.from_sequences([["A"], ["B"], ["A", "B"]])
        m = encode_presence(log, ["B", "A", "C"])
        assert m.rows.shape == (3, 3)
        assert np.array_equal(m.column("C"), [False, False, False])


task_names = st.text(alphabet="ABCxyz_ ,\"", min_size=1, max_size=6).map(str.strip).filter(bool)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(task_names, min_size=1, max_size=6), min_size=1, max_size=20))
def test_serialize_roundtrip(sequences):
    log = EventLog.from_sequences(sequences)
    assert parse_log(dumps_log(log).encode()) == log


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.lists(st.sampled_from(["A_x", "A_y", "W_z", "O_q"]), min_size=1, max_size=6), min_size=1, max_size=20),
    st.sampled_from(["A_", "W_", "O_", "Z", ""]),
)
def test_filtered_stats_never_exceed(sequences, prefix):
    log = EventLog.from_sequences(sequences)
    assert sum(log_statistics(filter_prefix(log, prefix)).values()) <= sum(log_statistics(log).values())
