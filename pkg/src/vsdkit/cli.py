"""Command-line entry point: ``vsdkit <command> ...``.

Exit codes: 0 success, 1 bad input, 2 transport failure under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import builder, corpus, diversify, scoring
from .baseline import GeoConfig, predict_relation
from .core import TaskId, label_from_surface
from .errors import (
    MalformedTripleError,
    MissingPredictionError,
    TaskMismatchError,
    VsdError,
)
from .metrics import spice, text

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_TRANSPORT = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        self.code = code
        super().__init__(message)


def _read_jsonl(path) -> List[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CliError(f"{path}: line {line_no}: malformed JSON: {exc.msg}") from None
    return rows


def _write_text(path: Optional[str], content: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(content)
    else:
        Path(path).write_text(content, encoding="utf-8")


def _load_items(path, lenient: bool = False):
    loaded = corpus.load_corpus_file(path, strict=not lenient)
    for err in loaded.errors:
        print(f"warning: {path}: skipped {err}", file=sys.stderr)
    return loaded


def _item_id(index: int) -> str:
    return str(index)


# build ---------------------------------------------------------------------

def cmd_build(args) -> int:
    cfg = builder.load_build_config(args.config) if args.config else builder.BuildConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    loaded = _load_items(args.corpus, args.lenient)
    records = builder.build_corpus(loaded.items, cfg)
    _write_text(args.out, builder.dumps_records(records, cfg, plain=args.plain))
    print(json.dumps(loaded.stats.to_dict()), file=sys.stderr)
    return EXIT_OK


# baseline ------------------------------------------------------------------

def cmd_baseline(args) -> int:
    cfg = GeoConfig(args.containment_threshold, args.contact_tolerance)
    loaded = _load_items(args.corpus, args.lenient)
    lines = []
    for idx, item in enumerate(loaded.items):
        label = predict_relation(item.subject_bbox, item.object_bbox, cfg)
        lines.append(json.dumps({"id": _item_id(idx), "label": label.short}) + "\n")
    _write_text(args.out, "".join(lines))
    return EXIT_OK


# eval ----------------------------------------------------------------------

_PREDICTION_KEYS = {TaskId.TASK1: "label", TaskId.TASK2: "text", TaskId.TASK3: "sentences"}


def _prediction_value(row: dict, task: TaskId):
    if "task" in row and TaskId.parse(row["task"]) is not task:
        raise TaskMismatchError(f"id {row.get('id')!r}: prediction is for {row['task']}, evaluating {task.key}")
    key = _PREDICTION_KEYS[task]
    if task is TaskId.TASK3 and key not in row and isinstance(row.get("text"), str):
        return row["text"].split("\n")
    if key not in row:
        raise TaskMismatchError(f"id {row.get('id')!r}: no {key!r} field, not a {task.key} prediction")
    return row[key]


def load_predictions(path, task: TaskId) -> dict:
    preds = {}
    for row in _read_jsonl(path):
        if not isinstance(row, dict) or "id" not in row:
            raise CliError(f"{path}: every prediction needs an 'id'")
        pid = str(row["id"])
        if pid in preds:
            raise CliError(f"{path}: duplicate prediction id {pid!r}")
        value = _prediction_value(row, task)
        if task is TaskId.TASK1:
            labels = [value] if isinstance(value, str) else list(value)
            value = {label_from_surface(v) for v in labels}
        elif task is TaskId.TASK2:
            if not isinstance(value, str) or not value.strip():
                raise CliError(f"{path}: id {pid!r}: empty prediction")
        else:
            if not isinstance(value, list) or len(value) != 3 or not all(
                isinstance(s, str) and s.strip() for s in value
            ):
                n = len(value) if isinstance(value, list) else "non-list"
                raise MalformedTripleError(f"id {pid!r}: expected 3 nonempty sentences, got {n}")
        preds[pid] = value
    return preds


def evaluate(task: TaskId, items, preds: dict, average: str = "micro") -> dict:
    ids = [_item_id(i) for i in range(len(items))]
    unknown = sorted(set(preds) - set(ids))
    if unknown:
        raise CliError(f"prediction ids not in gold corpus: {', '.join(unknown[:5])}")
    for pid in ids:
        if pid not in preds:
            raise MissingPredictionError(pid)
    if not items:
        raise CliError("gold corpus is empty")

    if task is TaskId.TASK1:
        golds = [{item.relation} for item in items]
        f1 = text.f1_score(golds, [preds[i] for i in ids], average=average)
        return {"task": task.key, "n": len(items), "f1": f1, "f1_average": average}

    if task is TaskId.TASK2:
        bleu_pairs = []
        spice_pairs = []
        for pid, item in zip(ids, items):
            refs = list(item.descriptions_v1)
            bleu_pairs.append((text.tokenize(preds[pid]), [text.tokenize(r) for r in refs]))
            spice_pairs.append((preds[pid], refs))
        return {
            "task": task.key,
            "n": len(items),
            "bleu4": text.corpus_bleu4(bleu_pairs),
            "spice_t2": spice.corpus_spice(spice_pairs),
        }

    groups = []
    spice_pairs = []
    for pid, item in zip(ids, items):
        refs = list(dict.fromkeys(item.descriptions_v1 + item.descriptions_v2))
        groups.append([text.tokenize(s) for s in preds[pid]])
        spice_pairs.append((preds[pid], refs))
    return {
        "task": task.key,
        "n": len(items),
        "mbleu4": text.corpus_self_bleu4(groups),
        "spice_t3": spice.corpus_spice(spice_pairs),
    }


def cmd_eval(args) -> int:
    task = TaskId.parse(args.task)
    loaded = _load_items(args.gold)
    preds = load_predictions(args.predictions, task)
    report = evaluate(task, loaded.items, preds, "macro" if args.macro_f1 else "micro")
    _write_text(args.out, json.dumps(report) + "\n")
    return EXIT_OK


# score ---------------------------------------------------------------------

def cmd_score(args) -> int:
    values = {}
    for path in args.fragments:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                frag = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CliError(f"{path}: malformed JSON: {exc.msg}") from None
        values.update({k: frag[k] for k in scoring.INPUT_FIELDS if k in frag})
    for name in scoring.INPUT_FIELDS:
        flag = getattr(args, name)
        if flag is not None:
            values[name] = flag
    report = scoring.compose_from_mapping(values)
    _write_text(args.out, json.dumps(report.to_json_obj(), indent=2) + "\n")
    print(report.table(), file=sys.stderr)
    return EXIT_OK


# diversify -----------------------------------------------------------------

def _diversify_setup(args):
    data = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    overrides = {
        "endpoint_url": args.endpoint,
        "model_name": args.model,
        "api_key_env_var": args.api_key_env,
        "seed": args.seed,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    cfg = diversify.DiversifyConfig.from_dict(data)
    if "stub_responses" in data:
        transport = diversify.StubTransport(data["stub_responses"])
    else:
        transport = diversify.HttpChatTransport(cfg)
    return cfg, transport


def cmd_diversify(args) -> int:
    cfg, transport = _diversify_setup(args)
    rows = _read_jsonl(args.records)
    try:
        records = [builder.record_from_dict(r) for r in rows]
    except ValueError as exc:
        raise CliError(f"{args.records}: {exc}") from None
    out, audit = diversify.diversify_records(records, cfg, transport)
    _write_text(args.out, builder.dumps_records(out))
    audit_path = args.audit or (f"{args.out}.audit.jsonl" if args.out and args.out != "-" else None)
    if audit_path:
        Path(audit_path).write_text(diversify.dumps_audit(audit), encoding="utf-8")
    counts = diversify.outcome_counts(audit)
    print(json.dumps(counts), file=sys.stderr)
    if args.strict and counts[diversify.Outcome.TRANSPORT_ERROR.value]:
        return EXIT_TRANSPORT
    return EXIT_OK


# parse-debug ---------------------------------------------------------------

def cmd_parse_debug(args) -> int:
    for sentence in args.sentences:
        triples = spice.extract_triples(sentence)
        print(json.dumps({"sentence": sentence, **triples.to_dict()}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vsdkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="compile a corpus into instruction records")
    p.add_argument("corpus")
    p.add_argument("--config", help="JSON file with seed, stop_token and templates")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--plain", action="store_true", help="emit Human/Assistant text instead of JSONL")
    p.add_argument("--lenient", action="store_true", help="skip malformed corpus lines")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("baseline", help="predict relations from boxes")
    p.add_argument("corpus")
    p.add_argument("--out")
    p.add_argument("--containment-threshold", type=float, default=0.9)
    p.add_argument("--contact-tolerance", type=int, default=10)
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="score predictions for one task")
    p.add_argument("--task", required=True, choices=["1", "2", "3"])
    p.add_argument("gold")
    p.add_argument("predictions")
    p.add_argument("--macro-f1", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("score", help="combine metrics into the ranking score")
    p.add_argument("fragments", nargs="*", help="JSON outputs of `eval`")
    p.add_argument("--f1", type=float)
    p.add_argument("--bleu4", type=float)
    p.add_argument("--spice-t2", dest="spice_t2", type=float)
    p.add_argument("--mbleu4", type=float)
    p.add_argument("--spice-t3", dest="spice_t3", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("diversify", help="rewrite task3 answers through a chat endpoint")
    p.add_argument("records")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--audit", help="audit log path (default: <out>.audit.jsonl)")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--api-key-env")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_diversify)

    p = sub.add_parser("parse-debug", help="print parsed tuples for sentences")
    p.add_argument("sentences", nargs="+")
    p.set_defaults(func=cmd_parse_debug)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except (VsdError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
