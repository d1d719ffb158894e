"""Rule-based relation predictor working from the two boxes alone.

Rules are tried in order and the first match wins (y grows downward):

1. IN     subject mostly inside object (intersection / subject area >= threshold)
2. ON     subject bottom edge touches object top edge, with horizontal overlap
3. ABOVE  subject entirely above object
4. UNDER  subject entirely below object
5. LEFT / RIGHT  horizontally disjoint
6. NEXT   anything else

BEHIND and IN_FRONT_OF need depth, which boxes do not carry, so they are
never predicted.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .core import BBox, RelationLabel
from .errors import DegenerateSubjectWarning

EMITTABLE = (
    RelationLabel.IN,
    RelationLabel.ON,
    RelationLabel.ABOVE,
    RelationLabel.UNDER,
    RelationLabel.LEFT,
    RelationLabel.RIGHT,
    RelationLabel.NEXT,
)


@dataclass(frozen=True)
class GeoConfig:
    containment_threshold: float = 0.9
    contact_tolerance: int = 10

    def __post_init__(self):
        if not 0 < self.containment_threshold <= 1:
            raise ValueError("containment_threshold must lie in (0, 1]")
        if self.contact_tolerance < 0:
            raise ValueError("contact_tolerance must be >= 0")


def horizontal_overlap(a: BBox, b: BBox) -> int:
    return min(a.x_max, b.x_max) - max(a.x_min, b.x_min)


def predict_relation(subject: BBox, obj: BBox, cfg: GeoConfig = GeoConfig()) -> RelationLabel:
    if subject.area > 0:
        if subject.intersection_area(obj) / subject.area >= cfg.containment_threshold:
            return RelationLabel.IN
    else:
        warnings.warn("zero-area subject box; containment rule skipped", DegenerateSubjectWarning, stacklevel=2)

    if abs(subject.y_max - obj.y_min) <= cfg.contact_tolerance and horizontal_overlap(subject, obj) > 0:
        return RelationLabel.ON
    if subject.y_max <= obj.y_min:
        return RelationLabel.ABOVE
    if subject.y_min >= obj.y_max:
        return RelationLabel.UNDER
    if subject.x_max <= obj.x_min:
        return RelationLabel.LEFT
    if subject.x_min >= obj.x_max:
        return RelationLabel.RIGHT
    return RelationLabel.NEXT
