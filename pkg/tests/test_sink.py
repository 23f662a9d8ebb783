"""Dataset sink: canonical encoding, strict decoding, keyed upserts with
atomic rejection, and on-disk persistence."""

import json
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from warden.records import CSV_HEADER, ValidationError
from warden.sink import (
    CSV_FILENAME,
    JSON_FILENAME,
    META_FILENAME,
    DatasetSink,
    DatasetSnapshot,
    decode_csv,
    encode_csv,
    encode_json,
)

from conftest import HEAD_ROWS, rec

GOLDEN = Path(__file__).parent / "golden" / "head_rows.csv"


def head_snapshot() -> DatasetSnapshot:
    return DatasetSnapshot(rows=tuple(sorted(HEAD_ROWS, key=lambda r: r.user_id)))


# -- encoding ---------------------------------------------------------------------


def test_encode_matches_golden_bytes():
    assert encode_csv(head_snapshot()) == GOLDEN.read_bytes()


def test_decode_golden_restores_rows():
    snapshot = decode_csv(GOLDEN.read_bytes())
    assert snapshot == head_snapshot()
    assert snapshot.revision == 0


def test_encode_empty_snapshot():
    assert encode_csv(DatasetSnapshot()) == (CSV_HEADER + "\n").encode()
    assert encode_json(DatasetSnapshot()) == b"[]"


def test_encode_json_single_row():
    snapshot = DatasetSnapshot(rows=(rec(15624510, "Male", 19, 19000, 0),))
    assert encode_json(snapshot) == (
        b'[{"user_id":15624510,"gender":"Male","age":19,'
        b'"estimated_salary":19000,"purchased":0}]'
    )


records_strategy = st.lists(
    st.integers(min_value=1, max_value=99_999_999), min_size=0, max_size=30, unique=True
).flatmap(
    lambda ids: st.tuples(
        *[
            st.builds(
                rec,
                st.just(user_id),
                st.sampled_from(["Male", "Female"]),
                st.integers(1, 149),
                st.integers(0, 10_000_000),
                st.integers(0, 1),
            )
            for user_id in sorted(ids)
        ]
    )
)


@given(records_strategy)
def test_decode_inverts_encode(rows):
    snapshot = DatasetSnapshot(rows=rows)
    assert decode_csv(encode_csv(snapshot)) == snapshot


def test_decode_accepts_shuffled_rows():
    shuffled = "\n".join([CSV_HEADER] + [r.csv_line() for r in HEAD_ROWS]) + "\n"
    snapshot = decode_csv(shuffled.encode())
    assert [r.user_id for r in snapshot.rows] == sorted(r.user_id for r in HEAD_ROWS)
    assert snapshot == head_snapshot()


# -- decoding errors ----------------------------------------------------------------


def test_decode_rejects_wrong_header():
    with pytest.raises(ValidationError, match="header mismatch"):
        decode_csv(b"user_id,gender,age,estimated_salary,purchased\n15624510,Male,19,19000,0\n")
    with pytest.raises(ValidationError, match="<empty>"):
        decode_csv(b"")


def test_decode_names_bad_row_line():
    data = (CSV_HEADER + "\n" + "15624510,Male,19,19000,0\n" + "15810944,Male,abc,20000,0\n").encode()
    with pytest.raises(ValidationError, match="row at line 3"):
        decode_csv(data)


def test_decode_names_duplicate_line():
    data = (
        CSV_HEADER + "\n" + "15624510,Male,19,19000,0\n" + "15624510,Female,20,30000,1\n"
    ).encode()
    with pytest.raises(ValidationError, match="duplicate user_id 15624510 at line 3"):
        decode_csv(data)


def test_decode_tolerates_missing_trailing_newline():
    data = (CSV_HEADER + "\n15624510,Male,19,19000,0").encode()
    assert len(decode_csv(data).rows) == 1


# -- snapshot invariants ---------------------------------------------------------------


def test_snapshot_rejects_out_of_order_rows():
    with pytest.raises(ValidationError, match="sorted ascending"):
        DatasetSnapshot(rows=(rec(20), rec(10)))


def test_snapshot_rejects_duplicate_ids():
    with pytest.raises(ValidationError, match="repeat"):
        DatasetSnapshot(rows=(rec(10), rec(10)))


# -- in-memory sink ---------------------------------------------------------------------


def test_memory_sink_upsert_flow():
    sink = DatasetSink()
    assert not sink.initialized()
    assert sink.revision == 0 and sink.row_count() == 0
    revision = sink.upsert_rows([rec(2, age=30), rec(1, age=40)])
    assert revision == 1 and sink.initialized()
    assert [r.user_id for r in sink.snapshot().rows] == [1, 2]
    assert sink.csv_bytes() == encode_csv(sink.snapshot())
    assert sink.json_bytes() == encode_json(sink.snapshot())


def test_upsert_identical_rows_keeps_revision():
    sink = DatasetSink()
    sink.upsert_rows([rec(1, age=40)])
    assert sink.revision == 1
    assert sink.upsert_rows([rec(1, age=40)]) == 1
    assert sink.upsert_rows([rec(1, age=41)]) == 2
    assert sink.upsert_rows([]) == 2


def test_upsert_accepts_mappings():
    sink = DatasetSink()
    sink.upsert_rows(
        [{"user_id": 5, "gender": "Female", "age": 31, "estimated_salary": 900, "purchased": 1}]
    )
    assert sink.snapshot().rows[0] == rec(5, "Female", 31, 900, 1)


def test_upsert_atomic_reject():
    sink = DatasetSink()
    sink.upsert_rows([rec(1)])
    bad_batch = [rec(2), {"user_id": 3, "gender": "Nope", "age": 1, "estimated_salary": 0, "purchased": 0}]
    with pytest.raises(ValidationError):
        sink.upsert_rows(bad_batch)
    assert sink.row_count() == 1
    assert sink.revision == 1


def test_upsert_later_duplicate_wins():
    sink = DatasetSink()
    sink.upsert_rows([rec(9, age=20), rec(9, age=77)])
    assert sink.snapshot().rows[0].age == 77


def test_materialize_empty_sink():
    sink = DatasetSink()
    sink.materialize()
    assert sink.initialized()
    assert sink.revision == 0
    assert sink.csv_bytes() == (CSV_HEADER + "\n").encode()


# -- on-disk sink ------------------------------------------------------------------------


def test_dir_sink_writes_all_three_files(tmp_path):
    sink = DatasetSink(tmp_path)
    assert not sink.initialized()
    sink.upsert_rows(list(HEAD_ROWS))
    for name in (CSV_FILENAME, JSON_FILENAME, META_FILENAME):
        assert (tmp_path / name).exists()
    assert (tmp_path / CSV_FILENAME).read_bytes() == GOLDEN.read_bytes()
    assert (tmp_path / JSON_FILENAME).read_bytes() == sink.json_bytes()
    assert json.loads((tmp_path / META_FILENAME).read_text()) == {"revision": 1}
    assert not list(tmp_path.glob("*.tmp"))


def test_dir_sink_reloads_state(tmp_path):
    first = DatasetSink(tmp_path)
    first.upsert_rows([rec(1, age=25)])
    first.upsert_rows([rec(1, age=26)])
    assert first.revision == 2
    second = DatasetSink(tmp_path)
    assert second.initialized()
    assert second.revision == 2
    assert second.snapshot() == first.snapshot()


def test_dir_sink_materialize_writes_header_only(tmp_path):
    sink = DatasetSink(tmp_path)
    sink.materialize()
    assert (tmp_path / CSV_FILENAME).read_bytes() == (CSV_HEADER + "\n").encode()
    reloaded = DatasetSink(tmp_path)
    assert reloaded.initialized() and reloaded.row_count() == 0
