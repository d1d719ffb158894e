"""Tokenizer, BLEU-4, Self-BLEU and multi-label F1.

Single-pair BLEU lives on [0, 1]; every corpus-level number returned here is
on the 0-100 reporting scale.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Iterable, List, Sequence, Set, Tuple

from ..core import RelationLabel
from ..errors import EmptyCorpusError, EmptyGoldError, EmptyInputError, LengthMismatchError

PUNCTUATION = frozenset(".,!?;:")
MAX_N = 4
# Floor applied to zero n-gram precisions. Part of the output contract: change
# it and every score changes.
EPSILON = 1e-9

_PUNCT_RE = re.compile(r"([.,!?;:])")

Tokens = Sequence[str]


def tokenize(s: str) -> List[str]:
    return _PUNCT_RE.sub(r" \1 ", s.lower()).split()


def ngrams(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(candidate: Tokens, references: Sequence[Tokens], n: int) -> Tuple[int, int]:
    """Clipped n-gram matches and total candidate n-grams."""
    counts = ngrams(candidate, n)
    max_ref: Counter = Counter()
    for ref in references:
        for gram, c in ngrams(ref, n).items():
            if c > max_ref[gram]:
                max_ref[gram] = c
    matched = sum(min(c, max_ref[gram]) for gram, c in counts.items())
    return matched, sum(counts.values())


def brevity_penalty(c: int, ref_lengths: Iterable[int]) -> float:
    r = min(ref_lengths, key=lambda rl: (abs(rl - c), rl))
    if c >= r:
        return 1.0
    return math.exp(1 - r / c)


def bleu4(candidate: Tokens, references: Sequence[Tokens]) -> float:
    """Sentence BLEU with uniform weights over 1..4-grams.

    A precision of zero, including the 0/0 case of a candidate shorter than n,
    is floored at ``EPSILON`` before the geometric mean.
    """
    if not candidate:
        raise EmptyInputError("candidate is empty")
    if not references:
        raise EmptyInputError("no references")
    if any(len(r) == 0 for r in references):
        raise EmptyInputError("a reference is empty")

    log_sum = 0.0
    for n in range(1, MAX_N + 1):
        matched, total = modified_precision(candidate, references, n)
        p = matched / total if total else 0.0
        log_sum += math.log(p if p > 0 else EPSILON) / MAX_N
    return brevity_penalty(len(candidate), (len(r) for r in references)) * math.exp(log_sum)


def instance_bleu4(candidate: Tokens, references: Sequence[Tokens]) -> float:
    """Best single-reference BLEU-4 over all references."""
    if not references:
        raise EmptyInputError("no references")
    return max(bleu4(candidate, [ref]) for ref in references)


def corpus_bleu4(pairs: Sequence[Tuple[Tokens, Sequence[Tokens]]]) -> float:
    if not pairs:
        raise EmptyCorpusError("no instances to score")
    return 100.0 * math.fsum(instance_bleu4(c, refs) for c, refs in pairs) / len(pairs)


def self_bleu4(group: Sequence[Tokens]) -> float:
    """Mean BLEU-4 of each sentence against its siblings, on 0-100."""
    if len(group) != 3:
        raise ValueError(f"self_bleu4 expects 3 sentences, got {len(group)}")
    scores = []
    for i, hyp in enumerate(group):
        others = [g for j, g in enumerate(group) if j != i]
        scores.append(bleu4(hyp, others))
    return 100.0 * math.fsum(scores) / len(scores)


def corpus_self_bleu4(groups: Sequence[Sequence[Tokens]]) -> float:
    if not groups:
        raise EmptyCorpusError("no groups to score")
    return math.fsum(self_bleu4(g) for g in groups) / len(groups)


LabelSet = Set[RelationLabel]


def _check_label_sets(golds, preds):
    if len(golds) != len(preds):
        raise LengthMismatchError(f"{len(golds)} gold sets vs {len(preds)} predictions")
    if not golds:
        raise EmptyInputError("no instances")
    if any(not g for g in golds):
        raise EmptyGoldError("gold label sets must be nonempty")


def _f1(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return 0.0
    return 200.0 * precision * recall / (precision + recall)


def micro_f1(golds: Sequence[LabelSet], preds: Sequence[LabelSet]) -> float:
    _check_label_sets(golds, preds)
    tp = fp = fn = 0
    for gold, pred in zip(golds, preds):
        gold, pred = set(gold), set(pred)
        tp += len(gold & pred)
        fp += len(pred - gold)
        fn += len(gold - pred)
    return _f1(tp, fp, fn)


def macro_f1(golds: Sequence[LabelSet], preds: Sequence[LabelSet]) -> float:
    """Mean per-label F1 over labels that occur in gold or predictions."""
    _check_label_sets(golds, preds)
    counts = {}
    for gold, pred in zip(golds, preds):
        gold, pred = set(gold), set(pred)
        for label in gold | pred:
            tp, fp, fn = counts.get(label, (0, 0, 0))
            counts[label] = (
                tp + (label in gold and label in pred),
                fp + (label in pred and label not in gold),
                fn + (label in gold and label not in pred),
            )
    # Sort so float summation order is fixed.
    per_label = [_f1(*counts[label]) for label in sorted(counts, key=lambda lb: lb.name)]
    return math.fsum(per_label) / len(per_label)


def f1_score(golds, preds, average: str = "micro") -> float:
    if average == "micro":
        return micro_f1(golds, preds)
    if average == "macro":
        return macro_f1(golds, preds)
    raise ValueError(f"unknown average {average!r}")
