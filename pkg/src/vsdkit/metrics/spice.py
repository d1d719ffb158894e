"""SPICE-lite: a tuple F-score over a rule-based parse of spatial sentences.

Real SPICE builds scene graphs with a dependency parser and matches through
WordNet synonyms. VSD sentences mostly follow one shape, two noun phrases
joined by a spatial preposition, so a small rule parser recovers the same
kind of propositions:

* objects: head noun of each noun phrase, ``("ball",)``
* attributes: modifiers preceding a head noun, ``("ball", "yellow")``
* relations: ``("ball", "in", "water")`` with the sentence-style preposition

Matching is exact string equality, so scores are not comparable with the
official SPICE release; use them for relative comparison only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence, Tuple

from ..core import RelationLabel
from ..errors import EmptyReferencesError
from .text import PUNCTUATION, tokenize

DETERMINERS = frozenset({"a", "an", "the", "there", "is", "are"})
FILLERS = frozenset({
    "sitting", "standing", "floating", "hanging", "shown", "swimming", "lying",
    "laying", "placed", "located", "parked", "resting", "seen", "being", "be",
    "was", "were", "it", "its", "this", "that", "these", "those", "some",
    "many", "several", "which", "who", "can",
})
# Tokens that end a noun phrase without contributing to it.
BOUNDARIES = frozenset({"of", "with", "and", "near", "at", "by", "while", "to"})


def _default_prepositions() -> Tuple[Tuple[str, ...], ...]:
    forms = {label.sentence for label in RelationLabel}
    forms |= {"under", "above", "behind", "on", "in"}
    # Longest first so "in front of" wins over "in".
    return tuple(sorted((tuple(f.split()) for f in forms), key=lambda f: (-len(f), f)))


@dataclass(frozen=True)
class ParserConfig:
    determiners: FrozenSet[str] = DETERMINERS
    fillers: FrozenSet[str] = FILLERS
    boundaries: FrozenSet[str] = BOUNDARIES
    prepositions: Tuple[Tuple[str, ...], ...] = field(default_factory=_default_prepositions)

    def is_stop(self, token: str) -> bool:
        return (
            token in PUNCTUATION
            or token in self.determiners
            or token in self.fillers
            or token in self.boundaries
        )


DEFAULT_PARSER = ParserConfig()


@dataclass(frozen=True)
class TripleSet:
    objects: FrozenSet[str] = frozenset()
    attributes: FrozenSet[Tuple[str, str]] = frozenset()
    relations: FrozenSet[Tuple[str, str, str]] = frozenset()

    def tuples(self) -> FrozenSet[tuple]:
        return frozenset({(o,) for o in self.objects}) | self.attributes | self.relations

    def is_empty(self) -> bool:
        return not (self.objects or self.attributes or self.relations)

    def to_dict(self) -> dict:
        return {
            "objects": sorted(self.objects),
            "attributes": [list(a) for a in sorted(self.attributes)],
            "relations": [list(r) for r in sorted(self.relations)],
        }


def _match_preposition(tokens: Sequence[str], cfg: ParserConfig) -> Optional[Tuple[int, int]]:
    for i in range(len(tokens)):
        for form in cfg.prepositions:
            if tuple(tokens[i : i + len(form)]) == form:
                return i, len(form)
    return None


def _runs(tokens: Sequence[str], cfg: ParserConfig) -> List[List[str]]:
    runs: List[List[str]] = []
    current: List[str] = []
    for tok in tokens:
        if cfg.is_stop(tok):
            if current:
                runs.append(current)
                current = []
        else:
            current.append(tok)
    if current:
        runs.append(current)
    return runs


def _phrase(run: List[str], objects: set, attributes: set) -> str:
    head = run[-1]
    objects.add(head)
    for modifier in run[:-1]:
        attributes.add((head, modifier))
    return head


def extract_triples(s: str, cfg: ParserConfig = DEFAULT_PARSER) -> TripleSet:
    tokens = tokenize(s)
    found = _match_preposition(tokens, cfg)
    if found is None:
        content = {t for t in tokens if not cfg.is_stop(t)}
        return TripleSet(objects=frozenset(content))

    start, length = found
    relation = " ".join(tokens[start : start + length])
    before = _runs(tokens[:start], cfg)
    after = tokens[start + length :]
    # The object phrase ends where the next spatial phrase begins.
    nxt = _match_preposition(after, cfg)
    if nxt is not None:
        after = after[: nxt[0]]
    after_runs = _runs(after, cfg)

    objects: set = set()
    attributes: set = set()
    subj = _phrase(before[-1], objects, attributes) if before else None
    obj = _phrase(after_runs[0], objects, attributes) if after_runs else None
    relations = set()
    if subj and obj:
        relations.add((subj, relation, obj))
    return TripleSet(frozenset(objects), frozenset(attributes), frozenset(relations))


def tuple_fscore(cand: TripleSet, ref: TripleSet) -> float:
    c, r = cand.tuples(), ref.tuples()
    if not c and not r:
        return 1.0
    if not c or not r:
        return 0.0
    matched = len(c & r)
    if matched == 0:
        return 0.0
    precision = matched / len(c)
    recall = matched / len(r)
    return 2 * precision * recall / (precision + recall)


def instance_spice(candidate: str, references: Sequence[str], cfg: ParserConfig = DEFAULT_PARSER) -> float:
    if not references:
        raise EmptyReferencesError("at least one reference is required")
    cand = extract_triples(candidate, cfg)
    return max(tuple_fscore(cand, extract_triples(ref, cfg)) for ref in references)


def multi_sentence_spice(sentences: Sequence[str], references: Sequence[str], cfg: ParserConfig = DEFAULT_PARSER) -> float:
    """Mean of per-sentence ``instance_spice``; used for three-sentence answers."""
    if not sentences:
        raise ValueError("no sentences to score")
    return math.fsum(instance_spice(s, references, cfg) for s in sentences) / len(sentences)


def corpus_spice(pairs, cfg: ParserConfig = DEFAULT_PARSER) -> float:
    """Mean instance score on 0-100. ``pairs`` holds ``(candidate, references)``;
    a candidate may be a list of sentences, scored with ``multi_sentence_spice``."""
    if not pairs:
        raise ValueError("no instances to score")
    scores = []
    for cand, refs in pairs:
        if isinstance(cand, str):
            scores.append(instance_spice(cand, refs, cfg))
        else:
            scores.append(multi_sentence_spice(cand, refs, cfg))
    return 100.0 * math.fsum(scores) / len(scores)
