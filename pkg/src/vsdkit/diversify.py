"""Rewrite one sentence of each three-sentence answer with a chat model.

The second answer sentence is sent to the model as the base description. A
reply is accepted only if it shares no word bigram with the base; accepted
replies replace sentence ``replace_index`` (the third by default).
"""

from __future__ import annotations

import enum
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, List, Optional, Protocol, Tuple

import httpx

from .core import InstructRecord, TaskId
from .errors import EmptyFieldError, MalformedRecordError, TransportError
from .metrics.text import PUNCTUATION, tokenize

logger = logging.getLogger(__name__)

PROMPT_TEMPLATE = (
    "Given the image and a concise spatial relationship description between "
    "{subject} and {object}: '{description}', generate a simpler sentence with a "
    "similar meaning. Keep the main structure of the sentence, but replace words "
    "or phrases with simpler adjectives, verbs, or synonyms, ensuring no "
    "consecutive words from the original description remain the same"
)

BASE_INDEX = 2


class Outcome(str, enum.Enum):
    REPLACED = "REPLACED"
    FALLBACK_KEPT_ORIGINAL = "FALLBACK_KEPT_ORIGINAL"
    TRANSPORT_ERROR = "TRANSPORT_ERROR"


@dataclass(frozen=True)
class DiversifyConfig:
    endpoint_url: str = "http://localhost:8000/v1/chat/completions"
    model_name: str = "qwen2-7b-instruct"
    api_key_env_var: str = "OPENAI_API_KEY"
    max_retries: int = 3
    timeout: float = 30.0
    max_concurrency: int = 4
    replace_index: int = 3
    temperature: float = 0.7
    seed: Optional[int] = None
    backoff: float = 1.0

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.replace_index not in (1, 2, 3):
            raise ValueError("replace_index must be 1, 2 or 3")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "DiversifyConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


class ChatTransport(Protocol):
    def __call__(self, prompt: str) -> str: ...


class HttpChatTransport:
    """POSTs a chat-completions request and returns the first choice's text."""

    def __init__(self, cfg: DiversifyConfig, client: httpx.Client | None = None):
        self.cfg = cfg
        self._client = client or httpx.Client(timeout=cfg.timeout)

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.cfg.api_key_env_var) if self.cfg.api_key_env_var else None
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def payload(self, prompt: str) -> dict:
        body = {
            "model": self.cfg.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
        }
        if self.cfg.seed is not None:
            body["seed"] = self.cfg.seed
        return body

    def __call__(self, prompt: str) -> str:
        try:
            resp = self._client.post(self.cfg.endpoint_url, json=self.payload(prompt), headers=self._headers())
        except httpx.HTTPError as exc:
            raise TransportError(f"request failed: {exc!r}") from exc
        if resp.status_code in (401, 403):
            raise TransportError(f"authentication failed ({resp.status_code})", retryable=False)
        if resp.status_code >= 400:
            raise TransportError(f"HTTP {resp.status_code}", retryable=resp.status_code == 429 or resp.status_code >= 500)
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected response body: {exc!r}") from exc

    def close(self):
        self._client.close()


class StubTransport:
    """Offline transport: canned replies keyed by base sentence.

    Unknown bases are echoed back verbatim, which the validator rejects, so
    those records fall back to their original text.
    """

    def __init__(self, responses: dict | None = None):
        self.responses = dict(responses or {})

    def __call__(self, prompt: str) -> str:
        start = prompt.index(": '") + 3
        end = prompt.rindex("', generate")
        base = prompt[start:end]
        return self.responses.get(base, base)


def build_prompt(subject: str, object: str, description: str) -> str:
    for name, value in (("subject", subject), ("object", object), ("description", description)):
        if not value or not value.strip():
            raise EmptyFieldError(f"{name} is empty")
    return PROMPT_TEMPLATE.format(subject=subject, object=object, description=description)


def _bigrams(text: str) -> set:
    words = [t for t in tokenize(text) if t not in PUNCTUATION]
    return set(zip(words, words[1:]))


def validate_diversity(base: str, rewrite: str) -> bool:
    if not rewrite or not rewrite.strip():
        return False
    return not (_bigrams(base) & _bigrams(rewrite))


def clean_response(text: str) -> str:
    return " ".join(text.split())


@dataclass(frozen=True)
class AuditEntry:
    id: str
    base: str
    response: Optional[str]
    outcome: Outcome
    attempts: int
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "base": self.base,
            "response": self.response,
            "outcome": self.outcome.value,
            "attempts": self.attempts,
            "error": self.error,
        }


def diversify_record(
    rec: InstructRecord,
    subject: str,
    object: str,
    cfg: DiversifyConfig,
    client: Callable[[str], str],
    sleep: Callable[[float], None] = time.sleep,
) -> Tuple[InstructRecord, AuditEntry]:
    """Try up to ``1 + max_retries`` requests for one record.

    Returns the (possibly unchanged) record and an audit entry. The outcome is
    TRANSPORT_ERROR only when no attempt produced a reply at all.
    """
    if rec.task is not TaskId.TASK3:
        raise MalformedRecordError(f"{rec.id}: expected a task3 record, got {rec.task.key}")
    lines = rec.answer.split("\n")
    if len(lines) != 3:
        raise MalformedRecordError(f"{rec.id}: answer has {len(lines)} lines, expected 3")

    base = lines[BASE_INDEX - 1]
    prompt = build_prompt(subject, object, base)
    last_response = None
    last_error = None
    got_reply = False
    attempts = 0
    for attempt in range(cfg.max_retries + 1):
        attempts += 1
        try:
            raw = client(prompt)
        except TransportError as exc:
            last_error = str(exc)
            logger.warning("%s: attempt %d failed: %s", rec.id, attempts, exc)
            if not exc.retryable:
                break
            if attempt < cfg.max_retries and cfg.backoff > 0:
                sleep(cfg.backoff * 2**attempt)
            continue
        got_reply = True
        last_response = clean_response(raw)
        if validate_diversity(base, last_response):
            lines[cfg.replace_index - 1] = last_response
            new = replace(rec, answer="\n".join(lines))
            return new, AuditEntry(rec.id, base, last_response, Outcome.REPLACED, attempts)

    outcome = Outcome.FALLBACK_KEPT_ORIGINAL if got_reply else Outcome.TRANSPORT_ERROR
    return rec, AuditEntry(rec.id, base, last_response, outcome, attempts, last_error)


def diversify_records(
    records: Iterable[InstructRecord],
    cfg: DiversifyConfig,
    client: Callable[[str], str],
    sleep: Callable[[float], None] = time.sleep,
) -> Tuple[List[InstructRecord], List[AuditEntry]]:
    """Run ``diversify_record`` over every task3 record, preserving input order.

    Other records pass through untouched and get no audit entry.
    """
    records = list(records)

    def work(rec):
        if rec.task is not TaskId.TASK3:
            return rec, None
        if not rec.subject or not rec.object:
            raise MalformedRecordError(f"{rec.id}: subject/object metadata missing")
        return diversify_record(rec, rec.subject, rec.object, cfg, client, sleep)

    with ThreadPoolExecutor(max_workers=cfg.max_concurrency) as pool:
        results = list(pool.map(work, records))
    out = [r for r, _ in results]
    audit = [a for _, a in results if a is not None]
    return out, audit


def outcome_counts(audit: Iterable[AuditEntry]) -> dict:
    counts = {o.value: 0 for o in Outcome}
    for entry in audit:
        counts[entry.outcome.value] += 1
    return counts


def dumps_audit(audit: Iterable[AuditEntry]) -> str:
    return "".join(json.dumps(a.to_dict(), ensure_ascii=False) + "\n" for a in audit)
