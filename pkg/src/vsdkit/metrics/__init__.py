from .spice import TripleSet, extract_triples, instance_spice, tuple_fscore
from .text import (
    bleu4,
    corpus_bleu4,
    instance_bleu4,
    macro_f1,
    micro_f1,
    self_bleu4,
    tokenize,
)

__all__ = [
    "TripleSet",
    "bleu4",
    "corpus_bleu4",
    "extract_triples",
    "instance_bleu4",
    "instance_spice",
    "macro_f1",
    "micro_f1",
    "self_bleu4",
    "tokenize",
    "tuple_fscore",
]
