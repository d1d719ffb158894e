"""Weighted ranking score built from the five per-task metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from decimal import ROUND_HALF_EVEN, Decimal

from .errors import MissingMetricError, NonFiniteError

INPUT_FIELDS = ("f1", "bleu4", "spice_t2", "mbleu4", "spice_t3")


def _check_finite(**values):
    bad = [k for k, v in values.items() if not math.isfinite(v)]
    if bad:
        raise NonFiniteError("non-finite input: " + ", ".join(bad))


def task1_score(f1: float) -> float:
    return f1


def task2_score(bleu4: float, spice: float) -> float:
    return 0.4 * bleu4 + 0.6 * spice


def task3_score(mbleu4: float, spice: float) -> float:
    # No clamping: Self-BLEU above 50 makes the diversity term negative.
    return 0.5 * (50 - mbleu4) + 0.5 * spice


def overall_score(z1: float, z2: float, z3: float) -> float:
    return 0.2 * z1 + 0.3 * z2 + 0.5 * z3


def display(value: float, places: int = 4) -> str:
    """Round half-to-even on the shortest decimal repr of ``value``."""
    quantum = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class MetricReport:
    f1: float
    bleu4: float
    spice_t2: float
    mbleu4: float
    spice_t3: float
    z1: float
    z2: float
    z3: float
    overall: float

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_display_dict(self) -> dict:
        return {k: display(v) for k, v in self.to_dict().items()}

    def to_json_obj(self) -> dict:
        return {**self.to_dict(), "display": self.to_display_dict()}

    def table(self) -> str:
        rows = [
            ("Task 1", "F1", self.f1),
            ("Task 2", "BLEU-4", self.bleu4),
            ("Task 2", "SPICE", self.spice_t2),
            ("Task 3", "mBLEU-4", self.mbleu4),
            ("Task 3", "SPICE", self.spice_t3),
            ("", "z1", self.z1),
            ("", "z2", self.z2),
            ("", "z3", self.z3),
            ("", "overall", self.overall),
        ]
        lines = [f"{'task':<8}{'metric':<10}{'value':>12}", "-" * 30]
        lines += [f"{task:<8}{name:<10}{display(v):>12}" for task, name, v in rows]
        return "\n".join(lines)


def compose_scores(f1: float, bleu4: float, spice_t2: float, mbleu4: float, spice_t3: float) -> MetricReport:
    _check_finite(f1=f1, bleu4=bleu4, spice_t2=spice_t2, mbleu4=mbleu4, spice_t3=spice_t3)
    z1 = task1_score(f1)
    z2 = task2_score(bleu4, spice_t2)
    z3 = task3_score(mbleu4, spice_t3)
    return MetricReport(f1, bleu4, spice_t2, mbleu4, spice_t3, z1, z2, z3, overall_score(z1, z2, z3))


def score_ablation(mbleu4: float, spice_t3: float) -> float:
    _check_finite(mbleu4=mbleu4, spice_t3=spice_t3)
    return task3_score(mbleu4, spice_t3)


def compose_from_mapping(values: dict) -> MetricReport:
    missing = [k for k in INPUT_FIELDS if values.get(k) is None]
    if missing:
        raise MissingMetricError(missing)
    return compose_scores(*(float(values[k]) for k in INPUT_FIELDS))
