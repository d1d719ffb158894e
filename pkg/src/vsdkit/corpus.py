"""Reading and writing VSD corpora stored as JSON lines."""

from __future__ import annotations

import io
import json
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable, List, Union

from .core import BBox, VsdItem, check_description, label_from_surface
from .errors import ParseError, SchemaError, UnknownLabelError, VsdError

_STRING_FIELDS = ("image", "subject", "object", "relation")
_BBOX_FIELDS = ("subject_bbox", "object_bbox")
_LIST_FIELDS = ("descriptions_v1", "descriptions_v2")


@dataclass(frozen=True)
class CorpusStats:
    n_items: int = 0
    n_task1_expected: int = 0
    n_task2_expected: int = 0
    n_task3_expected: int = 0

    @classmethod
    def of(cls, items: Iterable[VsdItem]) -> "CorpusStats":
        n = 0
        n_desc = 0
        for item in items:
            n += 1
            n_desc += len(item.descriptions_v1)
        return cls(n, n, n_desc, n)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class LoadedCorpus:
    items: List[VsdItem]
    stats: CorpusStats
    errors: List[VsdError] = field(default_factory=list)


def item_from_dict(obj, line_no: int) -> VsdItem:
    if not isinstance(obj, dict):
        raise SchemaError(line_no, "<record>", "expected a JSON object")
    for name in _STRING_FIELDS:
        if name not in obj:
            raise SchemaError(line_no, name, "missing")
        if not isinstance(obj[name], str):
            raise SchemaError(line_no, name, "expected a string")
    boxes = {}
    for name in _BBOX_FIELDS:
        raw = obj.get(name)
        if raw is None:
            raise SchemaError(line_no, name, "missing")
        if not isinstance(raw, list):
            raise SchemaError(line_no, name, "expected a list of 4 ints")
        try:
            boxes[name] = BBox.from_list(raw)
        except (TypeError, ValueError) as exc:
            raise SchemaError(line_no, name, str(exc)) from None
    descs = {}
    for name in _LIST_FIELDS:
        raw = obj.get(name, [] if name == "descriptions_v2" else None)
        if raw is None:
            raise SchemaError(line_no, name, "missing")
        if not isinstance(raw, list) or not all(isinstance(d, str) for d in raw):
            raise SchemaError(line_no, name, "expected a list of strings")
        descs[name] = raw
    try:
        relation = label_from_surface(obj["relation"])
    except UnknownLabelError:
        raise UnknownLabelError(obj["relation"], line_no) from None

    for name in ("subject", "object"):
        if not obj[name].strip():
            raise SchemaError(line_no, name, "must be nonempty")
    if not descs["descriptions_v1"]:
        raise SchemaError(line_no, "descriptions_v1", "needs at least one entry")
    for name in _LIST_FIELDS:
        for d in descs[name]:
            try:
                check_description(d, name)
            except ValueError as exc:
                raise SchemaError(line_no, name, str(exc)) from None

    return VsdItem(
        image=obj["image"],
        subject_bbox=boxes["subject_bbox"],
        object_bbox=boxes["object_bbox"],
        subject_tag=obj["subject"],
        object_tag=obj["object"],
        relation=relation,
        descriptions_v1=descs["descriptions_v1"],
        descriptions_v2=descs["descriptions_v2"],
    )


def item_to_dict(item: VsdItem) -> dict:
    return {
        "image": item.image,
        "subject": item.subject_tag,
        "object": item.object_tag,
        "relation": item.relation.short,
        "subject_bbox": item.subject_bbox.to_list(),
        "object_bbox": item.object_bbox.to_list(),
        "descriptions_v1": list(item.descriptions_v1),
        "descriptions_v2": list(item.descriptions_v2),
    }


def _text_lines(source: Union[IO, bytes, str]):
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)
    for line in source:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line


def iter_items(source, strict: bool = True, errors: list | None = None):
    """Yield ``(line_no, item)`` pairs, skipping blank lines.

    In strict mode the first bad line raises; otherwise the error is appended
    to ``errors`` and the line is dropped.
    """
    for line_no, line in enumerate(_text_lines(source), start=1):
        if not line.strip():
            continue
        try:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_no, exc.msg) from None
            yield line_no, item_from_dict(obj, line_no)
        except VsdError as exc:
            if strict:
                raise
            if errors is not None:
                errors.append(exc)


def load_corpus(source, strict: bool = True) -> LoadedCorpus:
    """Load a JSONL corpus from a text/binary stream, bytes or string."""
    errors: list = []
    items = [item for _, item in iter_items(source, strict=strict, errors=errors)]
    return LoadedCorpus(items, CorpusStats.of(items), errors)


def load_corpus_file(path, strict: bool = True) -> LoadedCorpus:
    with open(path, "r", encoding="utf-8") as fh:
        return load_corpus(fh, strict=strict)


def dump_corpus(items: Iterable[VsdItem], fh: IO[str]) -> None:
    for item in items:
        fh.write(json.dumps(item_to_dict(item), ensure_ascii=False) + "\n")


def dumps_corpus(items: Iterable[VsdItem]) -> str:
    buf = io.StringIO()
    dump_corpus(items, buf)
    return buf.getvalue()
