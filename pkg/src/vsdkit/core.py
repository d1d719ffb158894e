"""Domain types shared by the builder, metrics and CLI.

Boxes use image coordinates: y grows downward, so a smaller ``y`` is higher
in the picture. Serialized box order is ``[y_min, y_max, x_min, x_max]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .errors import UnknownLabelError


class Style(enum.Enum):
    SHORT = "short"
    SENTENCE = "sentence"


class RelationLabel(enum.Enum):
    """The closed set of nine spatial relations.

    Each member carries two spellings: the bare label (``"left"``) and the
    prepositional phrase used inside rendered sentences (``"to the left of"``).
    """

    ON = ("on", "on")
    IN = ("in", "in")
    NEXT = ("next", "next to")
    UNDER = ("under", "under")
    ABOVE = ("above", "above")
    BEHIND = ("behind", "behind")
    IN_FRONT_OF = ("in front of", "in front of")
    LEFT = ("left", "to the left of")
    RIGHT = ("right", "to the right of")

    @property
    def short(self) -> str:
        return self.value[0]

    @property
    def sentence(self) -> str:
        return self.value[1]

    def surface(self, style: Style = Style.SHORT) -> str:
        return self.short if style is Style.SHORT else self.sentence


# Order matches the option list shown to the model in classification prompts.
LABEL_ORDER: Tuple[RelationLabel, ...] = tuple(RelationLabel)

_SURFACE_TABLE = {}
for _label in RelationLabel:
    for _form in set(_label.value):
        if _form in _SURFACE_TABLE:
            raise RuntimeError(f"surface form {_form!r} is ambiguous")
        _SURFACE_TABLE[_form] = _label
del _label, _form


def label_from_surface(s: str) -> RelationLabel:
    key = " ".join(s.strip().lower().split())
    try:
        return _SURFACE_TABLE[key]
    except KeyError:
        raise UnknownLabelError(s) from None


def surface_for(label: RelationLabel, style: Style = Style.SHORT) -> str:
    return label.surface(style)


def surface_forms() -> dict:
    """Every accepted spelling mapped to its label."""
    return dict(_SURFACE_TABLE)


@dataclass(frozen=True)
class BBox:
    y_min: int
    y_max: int
    x_min: int
    x_max: int

    def __post_init__(self):
        for name in ("y_min", "y_max", "x_min", "x_max"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise TypeError(f"{name} must be an int, got {v!r}")
            if v < 0:
                raise ValueError(f"{name} must be >= 0, got {v}")
        if self.y_min > self.y_max:
            raise ValueError(f"y_min {self.y_min} > y_max {self.y_max}")
        if self.x_min > self.x_max:
            raise ValueError(f"x_min {self.x_min} > x_max {self.x_max}")

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "BBox":
        if len(values) != 4:
            raise ValueError(f"expected 4 coordinates, got {len(values)}")
        return cls(*values)

    def to_list(self) -> list:
        return [self.y_min, self.y_max, self.x_min, self.x_max]

    @property
    def height(self) -> int:
        return self.y_max - self.y_min

    @property
    def width(self) -> int:
        return self.x_max - self.x_min

    @property
    def area(self) -> int:
        return self.height * self.width

    def intersection_area(self, other: "BBox") -> int:
        h = min(self.y_max, other.y_max) - max(self.y_min, other.y_min)
        w = min(self.x_max, other.x_max) - max(self.x_min, other.x_min)
        if h <= 0 or w <= 0:
            return 0
        return h * w


def check_description(text: str, field: str) -> None:
    if not isinstance(text, str) or not text.strip():
        raise ValueError(f"{field} entries must be nonempty strings")
    if "\n" in text or "\r" in text:
        # Task-3 answers are newline-delimited, so descriptions must be single lines.
        raise ValueError(f"{field} entries must not contain line breaks")


@dataclass(frozen=True)
class VsdItem:
    image: str
    subject_bbox: BBox
    object_bbox: BBox
    subject_tag: str
    object_tag: str
    relation: RelationLabel
    descriptions_v1: Tuple[str, ...]
    descriptions_v2: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "descriptions_v1", tuple(self.descriptions_v1))
        object.__setattr__(self, "descriptions_v2", tuple(self.descriptions_v2))
        for tag in ("subject_tag", "object_tag"):
            value = getattr(self, tag)
            if not isinstance(value, str) or not value.strip():
                raise ValueError(f"{tag} must be a nonempty string")
        if not self.descriptions_v1:
            raise ValueError("descriptions_v1 needs at least one entry")
        for d in self.descriptions_v1:
            check_description(d, "descriptions_v1")
        for d in self.descriptions_v2:
            check_description(d, "descriptions_v2")


class TaskId(enum.Enum):
    TASK1 = 1
    TASK2 = 2
    TASK3 = 3

    @property
    def key(self) -> str:
        return f"task{self.value}"

    @classmethod
    def parse(cls, value) -> "TaskId":
        if isinstance(value, TaskId):
            return value
        text = str(value).strip().lower()
        if text.startswith("task"):
            text = text[4:]
        try:
            return cls(int(text))
        except ValueError:
            raise ValueError(f"unknown task {value!r}") from None


@dataclass(frozen=True)
class InstructRecord:
    """One single-round (question, answer) example.

    ``subject`` and ``object`` are carried along as metadata so later passes
    (description rewriting) can rebuild prompts; they never enter the text.
    """

    id: str
    image: str
    task: TaskId
    question: str
    answer: str
    subject: Optional[str] = None
    object: Optional[str] = None

    def __post_init__(self):
        if not self.question:
            raise ValueError("question must be nonempty")
        if not self.answer:
            raise ValueError("answer must be nonempty")
        if self.task is TaskId.TASK3:
            lines = self.answer.split("\n")
            if len(lines) != 3 or not all(line.strip() for line in lines):
                raise ValueError("TASK3 answers hold exactly 3 nonempty lines")

    @property
    def answer_lines(self) -> list:
        return self.answer.split("\n")
