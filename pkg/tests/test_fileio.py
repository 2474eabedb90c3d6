import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from insfuse import fileio
from insfuse.errors import ParseError, ValidationError
from insfuse.models import Box, Ranking


def test_load_detections_with_box():
    line = "v1\ts1\t12\tperson\tmax\t0.93\t10\t20\t50\t80\n"
    table = fileio.load_detections(line)
    assert len(table) == 1
    rec = table.records[0]
    assert rec.box == Box(10, 20, 50, 80)
    assert rec.confidence == 0.93
    assert rec.entity_kind == "person"
    assert rec.entity_id == "max"


def test_load_detections_boxless_sentinel():
    line = "v1\ts1\t12\taction\topen_door\t0.40\t-\t-\t-\t-\n"
    rec = fileio.load_detections(line).records[0]
    assert rec.box is None
    assert rec.entity_kind == "action"


def test_load_detections_bad_keyframe_names_line_and_field():
    line = "v1\ts1\tx\tperson\tmax\t0.9\t-\t-\t-\t-\n"
    with pytest.raises(ParseError) as err:
        fileio.load_detections(line)
    assert err.value.line_no == 1
    assert err.value.field == "keyframe"


def test_load_detections_confidence_range_error():
    line = "v1\ts1\t3\tperson\tmax\t1.5\t-\t-\t-\t-\n"
    with pytest.raises(ParseError) as err:
        fileio.load_detections(line)
    assert err.value.field == "confidence"


def test_load_detections_duplicate_key_rejected():
    text = (
        "v1\ts1\t3\tperson\tmax\t0.5\t-\t-\t-\t-\n"
        "v1\ts1\t3\tperson\tmax\t0.7\t-\t-\t-\t-\n"
    )
    with pytest.raises(ParseError) as err:
        fileio.load_detections(text)
    assert err.value.line_no == 2


def test_load_detections_partial_box_rejected():
    line = "v1\ts1\t3\tperson\tmax\t0.5\t10\t-\t-\t-\n"
    with pytest.raises(ParseError) as err:
        fileio.load_detections(line)
    assert err.value.field == "box"


def test_load_shots_consecutive_ordinals_accepted():
    text = "v1\ts0\t0\t0\t4\nv1\ts1\t1\t5\t9\nv1\ts2\t2\t10\t14\n"
    table = fileio.load_shots(text)
    assert [r.shot_id for r in table.videos["v1"]] == ["s0", "s1", "s2"]


def test_load_shots_ordinal_gap_rejected():
    text = "v1\ts0\t0\t0\t4\nv1\ts2\t2\t10\t14\n"
    with pytest.raises(ValidationError, match="ordinal gap"):
        fileio.load_shots(text)


def test_load_features_unit_normalized():
    table = fileio.load_features("s1\t3\t4\n")
    vec = table["s1"]
    assert vec == pytest.approx([0.6, 0.8])


def test_load_features_dimension_mismatch():
    with pytest.raises(ParseError, match="dimension"):
        fileio.load_features("s1\t1\t0\ns2\t1\t0\t0\n")


def test_load_qrels_and_lookup():
    qrels = fileio.load_qrels("9001 0 s1 1\n9001 0 s2 0\n")
    assert qrels.relevance("9001", "s1") == 1
    assert qrels.relevance("9001", "s2") == 0
    assert qrels.relevance("9001", "unjudged") == 0
    assert qrels.relevant_shots("9001") == {"s1"}


def test_load_qrels_bad_relevance():
    with pytest.raises(ParseError, match="0 or 1"):
        fileio.load_qrels("9001 0 s1 2\n")


def test_write_run_format():
    ranking = Ranking(topic_id="9328", entries=[("shot1_2", 0.5)], run_tag="TAG")
    assert fileio.write_run(ranking, 1000) == b"9328 Q0 shot1_2 1 0.500000 TAG\n"


def test_write_run_empty():
    assert fileio.write_run(Ranking("9328", [], "TAG"), 10) == b""


def test_write_run_truncates_to_depth():
    entries = [(f"s{i:04d}", 1.0 - i / 2000.0) for i in range(1500)]
    data = fileio.write_run(Ranking("t", entries, "TAG"), 1000)
    assert len(data.splitlines()) == 1000


def test_read_run_round_trip():
    ranking = Ranking("9328", [("a", 0.9), ("b", 0.5), ("c", 0.5)], "TAG")
    out = fileio.read_run(fileio.write_run(ranking, 100))
    assert out == [ranking]


def test_read_run_groups_interleaved_topics():
    text = (
        "t1 Q0 a 1 0.900000 x\n"
        "t2 Q0 d 1 0.800000 x\n"
        "t1 Q0 b 2 0.500000 x\n"
        "t2 Q0 e 2 0.300000 x\n"
    )
    out = fileio.read_run(text)
    assert [r.topic_id for r in out] == ["t1", "t2"]
    assert out[0].shot_ids() == ["a", "b"]
    assert out[1].shot_ids() == ["d", "e"]


def test_read_run_increasing_score_rejected():
    text = "t1 Q0 a 1 0.100000 x\nt1 Q0 b 2 0.500000 x\n"
    with pytest.raises(ParseError, match="non-monotone scores"):
        fileio.read_run(text)


def test_read_run_broken_rank_sequence_rejected():
    text = "t1 Q0 a 1 0.900000 x\nt1 Q0 b 3 0.500000 x\n"
    with pytest.raises(ParseError, match="non-monotone scores"):
        fileio.read_run(text)


@st.composite
def rankings(draw):
    n = draw(st.integers(min_value=0, max_value=40))
    shot_ids = [f"s{i:03d}" for i in range(n)]
    # Scores on the 1e-6 grid so the 6-decimal run format is lossless.
    raw = draw(st.lists(st.integers(min_value=0, max_value=10**6), min_size=n, max_size=n))
    scores = sorted((v / 10**6 for v in raw), reverse=True)
    topic = draw(st.sampled_from(["9001", "9002", "9327"]))
    return Ranking(topic, list(zip(shot_ids, scores)), run_tag="prop")


@given(rankings(), st.integers(min_value=1, max_value=64))
@settings(max_examples=200, deadline=None)
def test_run_round_trip_property(ranking, depth):
    data = fileio.write_run(ranking, depth)
    parsed = fileio.read_run(data)
    truncated = Ranking(ranking.topic_id, ranking.entries[:depth], ranking.run_tag)
    if not truncated.entries:
        assert parsed == []
    else:
        assert parsed == [truncated]
    # Second direction: serialize what was parsed and compare bytes.
    assert fileio.write_runs(parsed, depth) == data
