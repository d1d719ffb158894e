import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsdkit.core import BBox, RelationLabel, VsdItem
from vsdkit.corpus import CorpusStats, dumps_corpus, load_corpus
from vsdkit.errors import ParseError, SchemaError, UnknownLabelError


def _jsonl(*rows):
    return "".join(json.dumps(r) + "\n" for r in rows)


def test_full_example(yellow_ball_dict, yellow_ball):
    loaded = load_corpus(_jsonl(yellow_ball_dict))
    assert loaded.items == [yellow_ball]
    assert loaded.stats == CorpusStats(1, 1, 5, 1)


def test_accepts_bytes_and_streams(yellow_ball_dict):
    raw = _jsonl(yellow_ball_dict).encode("utf-8")
    assert len(load_corpus(raw).items) == 1
    assert len(load_corpus(io.BytesIO(raw)).items) == 1
    assert len(load_corpus(io.StringIO(raw.decode())).items) == 1


def test_empty_stream():
    loaded = load_corpus("")
    assert loaded.items == []
    assert loaded.stats == CorpusStats(0, 0, 0, 0)


def test_blank_lines_skipped(yellow_ball_dict):
    text = "\n" + _jsonl(yellow_ball_dict) + "   \n" + _jsonl(yellow_ball_dict)
    assert load_corpus(text).stats.n_items == 2


def test_inverted_bbox_is_schema_error(yellow_ball_dict):
    yellow_ball_dict["subject_bbox"] = [680, 650, 394, 424]
    with pytest.raises(SchemaError) as info:
        load_corpus(_jsonl(yellow_ball_dict))
    assert info.value.line_no == 1
    assert info.value.field == "subject_bbox"


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.pop("subject"), "subject"),
        (lambda d: d.update(object=""), "object"),
        (lambda d: d.update(object_bbox=[1, 2, 3]), "object_bbox"),
        (lambda d: d.update(object_bbox="1,2,3,4"), "object_bbox"),
        (lambda d: d.update(descriptions_v1=[]), "descriptions_v1"),
        (lambda d: d.update(descriptions_v2=[3]), "descriptions_v2"),
        (lambda d: d.update(image=7), "image"),
    ],
)
def test_schema_errors(yellow_ball_dict, mutate, field):
    mutate(yellow_ball_dict)
    with pytest.raises(SchemaError) as info:
        load_corpus(_jsonl(yellow_ball_dict))
    assert info.value.field == field


def test_missing_v2_defaults_to_empty(yellow_ball_dict):
    del yellow_ball_dict["descriptions_v2"]
    assert load_corpus(_jsonl(yellow_ball_dict)).items[0].descriptions_v2 == ()


def test_parse_error_line_number(yellow_ball_dict):
    text = _jsonl(yellow_ball_dict) + "{not json\n"
    with pytest.raises(ParseError) as info:
        load_corpus(text)
    assert info.value.line_no == 2


def test_unknown_label_line_number(yellow_ball_dict):
    bad = dict(yellow_ball_dict, relation="beside")
    with pytest.raises(UnknownLabelError) as info:
        load_corpus(_jsonl(yellow_ball_dict, bad))
    assert info.value.line_no == 2


def test_lenient_mode_collects(yellow_ball_dict):
    bad = dict(yellow_ball_dict, relation="beside")
    text = _jsonl(yellow_ball_dict) + "oops\n" + _jsonl(bad, yellow_ball_dict)
    loaded = load_corpus(text, strict=False)
    assert len(loaded.items) == 2
    assert [type(e) for e in loaded.errors] == [ParseError, UnknownLabelError]
    assert [e.line_no for e in loaded.errors] == [2, 3]
    assert loaded.stats.n_task2_expected == 10


words = st.text(alphabet="abcdefgh ", min_size=1, max_size=12).filter(lambda s: s.strip())


@st.composite
def boxes(draw):
    y0 = draw(st.integers(0, 500))
    x0 = draw(st.integers(0, 500))
    return BBox(y0, y0 + draw(st.integers(0, 300)), x0, x0 + draw(st.integers(0, 300)))


items = st.builds(
    VsdItem,
    image=st.text(max_size=10),
    subject_bbox=boxes(),
    object_bbox=boxes(),
    subject_tag=words,
    object_tag=words,
    relation=st.sampled_from(list(RelationLabel)),
    descriptions_v1=st.lists(words, min_size=1, max_size=4),
    descriptions_v2=st.lists(words, max_size=2),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(items, max_size=6))
def test_round_trip_and_stats(corpus):
    loaded = load_corpus(dumps_corpus(corpus))
    assert loaded.items == corpus
    again = load_corpus(dumps_corpus(loaded.items))
    assert again.items == loaded.items and again.stats == loaded.stats
    stats = loaded.stats
    assert stats.n_task1_expected == stats.n_task3_expected == stats.n_items == len(corpus)
    assert stats.n_task2_expected == sum(len(i.descriptions_v1) for i in corpus)
