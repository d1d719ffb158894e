import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vsdkit.core import BBox, RelationLabel, VsdItem  # noqa: E402

YELLOW_BALL = {
    "image": "vsd/2354786.jpg",
    "subject": "yellow ball",
    "object": "water",
    "relation": "in",
    "subject_bbox": [650, 680, 394, 424],
    "object_bbox": [5, 677, 0, 992],
    "descriptions_v1": [
        "yellow ball in water",
        "a yellow ball is floating in the water.",
        "a yellow ball is in the water.",
        "there is a yellow ball in the water.",
        "a yellow ball is swimming in the water.",
    ],
    "descriptions_v2": ["The yellow ball in front of the ship is in the water."],
}

POWER_LINES = {
    "image": "vsd/power.jpg",
    "subject": "power lines",
    "object": "train",
    "relation": "above",
    "subject_bbox": [0, 40, 0, 500],
    "object_bbox": [120, 300, 30, 480],
    "descriptions_v1": ["there are power lines above the train."],
    "descriptions_v2": ["there are many power lines above the train."],
}


@pytest.fixture
def yellow_ball_dict():
    return json.loads(json.dumps(YELLOW_BALL))


@pytest.fixture
def yellow_ball():
    return VsdItem(
        image=YELLOW_BALL["image"],
        subject_bbox=BBox(650, 680, 394, 424),
        object_bbox=BBox(5, 677, 0, 992),
        subject_tag="yellow ball",
        object_tag="water",
        relation=RelationLabel.IN,
        descriptions_v1=tuple(YELLOW_BALL["descriptions_v1"]),
        descriptions_v2=tuple(YELLOW_BALL["descriptions_v2"]),
    )


def make_item(subject="cat", obj="mat", relation=RelationLabel.ON, v1=("a cat on a mat.",), v2=(), image="img.jpg"):
    return VsdItem(image, BBox(0, 10, 0, 10), BBox(10, 20, 0, 10), subject, obj, relation, tuple(v1), tuple(v2))


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: int(k.split()[0][2:])):
        terminalreporter.write_line(RESULTS[key])
