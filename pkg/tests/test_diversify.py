import json
import threading
import time

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsdkit.core import InstructRecord, TaskId
from vsdkit.diversify import (
    DiversifyConfig,
    HttpChatTransport,
    Outcome,
    StubTransport,
    build_prompt,
    diversify_record,
    diversify_records,
    dumps_audit,
    outcome_counts,
    validate_diversity,
)
from vsdkit.errors import EmptyFieldError, MalformedRecordError, TransportError

BASE = "there is a yellow ball in the water."
ANSWER = f"yellow ball in water.\n{BASE}\nThe yellow ball in front of the ship is in the water."


def task3(rid="task3-0-0", answer=ANSWER):
    return InstructRecord(rid, "img.jpg", TaskId.TASK3, "Describe three ways.", answer, "yellow ball", "water")


def no_sleep(_):
    pass


CFG = DiversifyConfig(backoff=0)


def test_prompt_text():
    prompt = build_prompt("yellow ball", "water", BASE)
    assert "between yellow ball and water: 'there is a yellow ball in the water.'" in prompt
    assert prompt.startswith("Given the image and a concise spatial relationship description between")
    assert prompt.endswith("ensuring no consecutive words from the original description remain the same")
    assert build_prompt("yellow ball", "water", BASE) == prompt


@pytest.mark.parametrize("args", [("", "water", "x"), ("ball", " ", "x"), ("ball", "water", "")])
def test_prompt_empty_fields(args):
    with pytest.raises(EmptyFieldError):
        build_prompt(*args)


@pytest.mark.parametrize(
    "base, rewrite, ok",
    [
        ("a ball in the water", "a ball in the water", False),
        ("a ball in the water", "one sphere inside that liquid", True),
        ("a ball in the water", "", False),
        ("a ball in the water", "   ", False),
        ("blue water.", "calm water.", True),
        ("a ball in the water", "the water holds a toy", False),
        (BASE, "the ball floats inside water", True),
    ],
)
def test_validate_diversity(base, rewrite, ok):
    assert validate_diversity(base, rewrite) is ok


def test_replaced_with_stub():
    stub = StubTransport({BASE: "  the ball floats\n inside water "})
    new, audit = diversify_record(task3(), "yellow ball", "water", CFG, stub, no_sleep)
    assert audit.outcome is Outcome.REPLACED
    assert new.answer_lines == ["yellow ball in water.", BASE, "the ball floats inside water"]
    assert audit.attempts == 1
    for field in ("id", "image", "task", "question", "subject", "object"):
        assert getattr(new, field) == getattr(task3(), field)


def test_replace_index_configurable():
    cfg = DiversifyConfig(backoff=0, replace_index=1)
    new, _ = diversify_record(task3(), "yellow ball", "water", cfg, StubTransport({BASE: "a sphere sits afloat"}), no_sleep)
    assert new.answer_lines == ["a sphere sits afloat", BASE, ANSWER.split("\n")[2]]


def test_echo_falls_back():
    cfg = DiversifyConfig(backoff=0, max_retries=1)
    calls = []

    def echo(prompt):
        calls.append(prompt)
        return BASE

    rec = task3()
    new, audit = diversify_record(rec, "yellow ball", "water", cfg, echo, no_sleep)
    assert new is rec
    assert audit.outcome is Outcome.FALLBACK_KEPT_ORIGINAL
    assert audit.attempts == len(calls) == 2


def test_retry_then_success():
    replies = iter([BASE, "the ball floats inside water"])
    new, audit = diversify_record(task3(), "yellow ball", "water", CFG, lambda p: next(replies), no_sleep)
    assert audit.outcome is Outcome.REPLACED and audit.attempts == 2


def test_transport_error_everywhere():
    def down(prompt):
        raise TransportError("timed out")

    sleeps = []
    cfg = DiversifyConfig(max_retries=2, backoff=0.5)
    rec = task3()
    new, audit = diversify_record(rec, "yellow ball", "water", cfg, down, sleeps.append)
    assert new is rec
    assert audit.outcome is Outcome.TRANSPORT_ERROR
    assert audit.attempts == 3
    assert sleeps == [0.5, 1.0]
    assert "timed out" in audit.error


def test_auth_failure_not_retried():
    def denied(prompt):
        raise TransportError("401", retryable=False)

    _, audit = diversify_record(task3(), "yellow ball", "water", CFG, denied, no_sleep)
    assert audit.outcome is Outcome.TRANSPORT_ERROR and audit.attempts == 1


def test_malformed_records():
    with pytest.raises(MalformedRecordError):
        diversify_record(
            InstructRecord("t1", "i", TaskId.TASK1, "q", "in"), "a", "b", CFG, StubTransport(), no_sleep
        )
    with pytest.raises(ValueError):
        task3(answer="only\ntwo")


def test_corpus_pass_keeps_order_and_partitions():
    records = [task3(f"task3-{i}-0") for i in range(12)]
    records.insert(3, InstructRecord("task1-0-0", "i", TaskId.TASK1, "q", "in"))
    lock = threading.Lock()
    seen = []

    def flaky(prompt):
        with lock:
            n = len(seen)
            seen.append(prompt)
        time.sleep(0.001 * (n % 3))
        if n % 4 == 0:
            raise TransportError("boom")
        return "the ball floats inside water" if n % 2 else BASE

    cfg = DiversifyConfig(max_retries=0, backoff=0, max_concurrency=4)
    out, audit = diversify_records(records, cfg, flaky, no_sleep)
    assert [r.id for r in out] == [r.id for r in records]
    assert out[3] is records[3]
    assert [a.id for a in audit] == [r.id for r in records if r.task is TaskId.TASK3]
    counts = outcome_counts(audit)
    assert sum(counts.values()) == 12
    for rec, new, entry in zip([r for r in records if r.task is TaskId.TASK3], [r for r in out if r.task is TaskId.TASK3], audit):
        if entry.outcome is Outcome.REPLACED:
            assert validate_diversity(rec.answer_lines[1], new.answer_lines[2])
        else:
            assert new == rec


def test_stub_pass_is_deterministic():
    records = [task3(f"task3-{i}-0") for i in range(8)]
    stub = StubTransport({BASE: "the ball floats inside water"})
    cfg = DiversifyConfig(backoff=0, max_concurrency=3)
    a = diversify_records(records, cfg, stub, no_sleep)
    b = diversify_records(records, cfg, stub, no_sleep)
    assert a == b
    assert dumps_audit(a[1]) == dumps_audit(b[1])
    line = json.loads(dumps_audit(a[1]).splitlines()[0])
    assert set(line) == {"id", "base", "response", "outcome", "attempts", "error"}


def _mock_client(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


def test_http_request_shape(monkeypatch):
    monkeypatch.setenv("VSD_TEST_KEY", "sk-test")
    captured = {}

    def handler(request):
        captured["url"] = str(request.url)
        captured["auth"] = request.headers.get("authorization")
        captured["body"] = json.loads(request.content)
        return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": "a sphere floats"}}]})

    cfg = DiversifyConfig(endpoint_url="http://llm.local/v1/chat/completions", model_name="qwen2-7b",
                          api_key_env_var="VSD_TEST_KEY", temperature=0.3, seed=17)
    transport = HttpChatTransport(cfg, _mock_client(handler))
    assert transport("hello") == "a sphere floats"
    assert captured["url"] == "http://llm.local/v1/chat/completions"
    assert captured["auth"] == "Bearer sk-test"
    assert captured["body"] == {
        "model": "qwen2-7b",
        "messages": [{"role": "user", "content": "hello"}],
        "temperature": 0.3,
        "seed": 17,
    }


def test_http_without_key_or_seed(monkeypatch):
    monkeypatch.delenv("VSD_MISSING_KEY", raising=False)
    captured = {}

    def handler(request):
        captured["auth"] = request.headers.get("authorization")
        captured["body"] = json.loads(request.content)
        return httpx.Response(200, json={"choices": [{"message": {"content": "x"}}]})

    cfg = DiversifyConfig(api_key_env_var="VSD_MISSING_KEY")
    HttpChatTransport(cfg, _mock_client(handler))("p")
    assert captured["auth"] is None
    assert "seed" not in captured["body"]


@pytest.mark.parametrize(
    "status, retryable",
    [(401, False), (403, False), (400, False), (429, True), (500, True), (503, True)],
)
def test_http_errors(status, retryable):
    transport = HttpChatTransport(DiversifyConfig(), _mock_client(lambda r: httpx.Response(status)))
    with pytest.raises(TransportError) as info:
        transport("p")
    assert info.value.retryable is retryable


def test_http_bad_body_and_network_error():
    bad = HttpChatTransport(DiversifyConfig(), _mock_client(lambda r: httpx.Response(200, json={"oops": 1})))
    with pytest.raises(TransportError):
        bad("p")

    def timeout(request):
        raise httpx.ReadTimeout("slow", request=request)

    with pytest.raises(TransportError):
        HttpChatTransport(DiversifyConfig(), _mock_client(timeout))("p")


def test_http_transport_end_to_end_replacement():
    def handler(request):
        return httpx.Response(200, json={"choices": [{"message": {"content": "the ball floats inside water"}}]})

    transport = HttpChatTransport(DiversifyConfig(), _mock_client(handler))
    _, audit = diversify_record(task3(), "yellow ball", "water", CFG, transport, no_sleep)
    assert audit.outcome is Outcome.REPLACED


def test_config_validation_and_from_dict():
    with pytest.raises(ValueError):
        DiversifyConfig(max_retries=-1)
    with pytest.raises(ValueError):
        DiversifyConfig(replace_index=4)
    cfg = DiversifyConfig.from_dict({"model_name": "m", "stub_responses": {}, "max_retries": 0})
    assert cfg.model_name == "m" and cfg.max_retries == 0


sentences = st.lists(st.sampled_from("a ball the water in sphere floats . toy".split()), min_size=1, max_size=8).map(" ".join)


@settings(max_examples=150, deadline=None)
@given(sentences, sentences)
def test_replaced_implies_valid(base, reply):
    answer = f"x y.\n{base}\nz w."
    rec = task3(answer=answer)
    new, audit = diversify_record(rec, "s", "o", DiversifyConfig(max_retries=0, backoff=0), lambda p: reply, no_sleep)
    if audit.outcome is Outcome.REPLACED:
        assert validate_diversity(base, new.answer_lines[2])
        assert new.answer_lines[:2] == rec.answer_lines[:2]
    else:
        assert new == rec
