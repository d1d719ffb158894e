"""Turn VSD items into single-round instruction records for the three tasks."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

from .core import LABEL_ORDER, InstructRecord, Style, TaskId, VsdItem

SUBJ = "{SUBJ}"
OBJ = "{OBJ}"
LABEL_LIST = "{LABEL_LIST}"
IMAGE_TOKEN = "<image>"

# The first template in each pool is the reference wording; the others are
# paraphrases written for this package so the sampler has something to pick.
DEFAULT_TEMPLATES: Dict[TaskId, Tuple[str, ...]] = {
    TaskId.TASK1: (
        "Given the image, choose the most appropriate preposition to complete "
        "the sentence: 'The {SUBJ} is [BLANK] the {OBJ}'. Select from: {LABEL_LIST}.",
        "Look at the image and fill in the blank with the best preposition: "
        "'The {SUBJ} is [BLANK] the {OBJ}'. Options: {LABEL_LIST}.",
        "Which preposition best completes 'The {SUBJ} is [BLANK] the {OBJ}' "
        "for this image? Choose one of: {LABEL_LIST}.",
        "From the image, pick the word that describes where the {SUBJ} is "
        "relative to the {OBJ}: 'The {SUBJ} is [BLANK] the {OBJ}'. Candidates: {LABEL_LIST}.",
        "Complete the sentence 'The {SUBJ} is [BLANK] the {OBJ}' according to "
        "the image, using one of these prepositions: {LABEL_LIST}.",
    ),
    TaskId.TASK2: (
        "Based on the image, provide a concise textual description or phrase of "
        "the single spatial relationship between the two objects {SUBJ} and {OBJ}.",
        "Describe in one short sentence how the {SUBJ} and the {OBJ} are "
        "positioned relative to each other in the image.",
        "Write a brief phrase stating the spatial relationship between {SUBJ} "
        "and {OBJ} shown in the image.",
        "In a single sentence, tell where the {SUBJ} is with respect to the "
        "{OBJ} in this image.",
        "Give a concise description of the spatial relation between the {SUBJ} "
        "and the {OBJ} visible in the image.",
    ),
    TaskId.TASK3: (
        "Using the image as a reference, generate three detailed and diverse "
        "textual descriptions that describe the spatial relationship between "
        "the two objects {SUBJ} and {OBJ}.",
        "Write three different sentences describing how the {SUBJ} and the "
        "{OBJ} are arranged in the image.",
        "Provide three varied descriptions of the spatial relationship between "
        "{SUBJ} and {OBJ} as seen in the image.",
        "Looking at the image, describe the position of the {SUBJ} relative to "
        "the {OBJ} in three distinct sentences.",
        "Generate three diverse sentences that explain where the {SUBJ} is in "
        "relation to the {OBJ} in this image.",
    ),
}


@dataclass(frozen=True)
class TemplatePool:
    task: TaskId
    question_templates: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "question_templates", tuple(self.question_templates))
        if not self.question_templates:
            raise ValueError(f"{self.task.key}: template pool is empty")
        for t in self.question_templates:
            missing = [p for p in (SUBJ, OBJ) if p not in t]
            if self.task is TaskId.TASK1 and LABEL_LIST not in t:
                missing.append(LABEL_LIST)
            if missing:
                raise ValueError(f"{self.task.key} template {t!r} lacks {', '.join(missing)}")


def default_pools() -> Dict[TaskId, TemplatePool]:
    return {task: TemplatePool(task, temps) for task, temps in DEFAULT_TEMPLATES.items()}


@dataclass(frozen=True)
class BuildConfig:
    seed: int = 0
    template_pools: Dict[TaskId, TemplatePool] = field(default_factory=default_pools)
    stop_token: str = "<STOP>"

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if not self.stop_token:
            raise ValueError("stop_token must be nonempty")
        for task in TaskId:
            if task not in self.template_pools:
                raise ValueError(f"no template pool for {task.key}")

    @classmethod
    def from_dict(cls, data: dict, seed: int | None = None) -> "BuildConfig":
        pools = default_pools()
        for key, temps in (data.get("templates") or {}).items():
            task = TaskId.parse(key)
            pools[task] = TemplatePool(task, temps)
        return cls(
            seed=int(data.get("seed", 0)) if seed is None else seed,
            template_pools=pools,
            stop_token=data.get("stop_token", "<STOP>"),
        )

    def with_seed(self, seed: int) -> "BuildConfig":
        return BuildConfig(seed, self.template_pools, self.stop_token)


def load_build_config(path, seed: int | None = None) -> BuildConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return BuildConfig.from_dict(json.load(fh), seed=seed)


def item_rng(seed: int, item_index: int) -> random.Random:
    """Independent stream per item, so editing one item never shifts another's samples."""
    digest = hashlib.sha256(f"vsdkit:{seed}:{item_index}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def label_list() -> str:
    return ", ".join(label.sentence for label in LABEL_ORDER)


def _fill(template: str, item: VsdItem) -> str:
    return (
        template.replace(SUBJ, item.subject_tag)
        .replace(OBJ, item.object_tag)
        .replace(LABEL_LIST, label_list())
    )


def _question(task: TaskId, item: VsdItem, cfg: BuildConfig, rng: random.Random) -> str:
    return _fill(rng.choice(cfg.template_pools[task].question_templates), item)


def stacked_sentence(item: VsdItem) -> str:
    return f"{item.subject_tag} {item.relation.surface(Style.SENTENCE)} {item.object_tag}."


def _record(rid, item, task, question, answer) -> InstructRecord:
    return InstructRecord(
        id=rid,
        image=item.image,
        task=task,
        question=question,
        answer=answer,
        subject=item.subject_tag,
        object=item.object_tag,
    )


def record_id(task: TaskId, item_index: int, k: int = 0) -> str:
    return f"{task.key}-{item_index}-{k}"


def build_task1_record(item, cfg, rng, item_index: int = 0) -> InstructRecord:
    question = _question(TaskId.TASK1, item, cfg, rng)
    return _record(record_id(TaskId.TASK1, item_index), item, TaskId.TASK1, question, item.relation.short)


def build_task2_records(item, cfg, rng, item_index: int = 0) -> List[InstructRecord]:
    # One record per v1 description, each description used exactly once.
    records = []
    for k, desc in enumerate(item.descriptions_v1):
        question = _question(TaskId.TASK2, item, cfg, rng)
        records.append(_record(record_id(TaskId.TASK2, item_index, k), item, TaskId.TASK2, question, desc))
    return records


def build_task3_record(item, cfg, rng, item_index: int = 0) -> InstructRecord:
    question = _question(TaskId.TASK3, item, cfg, rng)
    v1 = item.descriptions_v1
    i = rng.randrange(len(v1))
    if item.descriptions_v2:
        third = item.descriptions_v2[rng.randrange(len(item.descriptions_v2))]
    elif len(v1) >= 2:
        j = rng.randrange(len(v1) - 1)
        third = v1[j + 1 if j >= i else j]
    else:
        third = v1[i]
    answer = "\n".join((stacked_sentence(item), v1[i], third))
    return _record(record_id(TaskId.TASK3, item_index), item, TaskId.TASK3, question, answer)


def build_item(item: VsdItem, item_index: int, cfg: BuildConfig):
    """All records for one item as ``(task1, task2_list, task3)``."""
    rng = item_rng(cfg.seed, item_index)
    t1 = build_task1_record(item, cfg, rng, item_index)
    t2 = build_task2_records(item, cfg, rng, item_index)
    t3 = build_task3_record(item, cfg, rng, item_index)
    return t1, t2, t3


def build_corpus(items: Sequence[VsdItem], cfg: BuildConfig) -> List[InstructRecord]:
    """Build every record, ordered by (task, item index, k).

    Items are independent (see ``item_rng``), so this could be fanned out to
    workers without changing the result.
    """
    per_item = [build_item(item, idx, cfg) for idx, item in enumerate(items)]
    out: List[InstructRecord] = [t1 for t1, _, _ in per_item]
    for _, t2, _ in per_item:
        out.extend(t2)
    out.extend(t3 for _, _, t3 in per_item)
    return out


def render_plain(rec: InstructRecord, cfg: BuildConfig) -> str:
    stop = cfg.stop_token
    return f"Human: {IMAGE_TOKEN} {rec.question} {stop}\nAssistant: {rec.answer} {stop}\n"


def record_to_dict(rec: InstructRecord) -> dict:
    out = {"id": rec.id, "image": rec.image, "task": rec.task.key}
    if rec.subject is not None:
        out["subject"] = rec.subject
    if rec.object is not None:
        out["object"] = rec.object
    out["conversations"] = [
        {"from": "human", "value": f"{IMAGE_TOKEN}\n{rec.question}"},
        {"from": "gpt", "value": rec.answer},
    ]
    return out


def record_from_dict(obj: dict) -> InstructRecord:
    try:
        turns = obj["conversations"]
        question = turns[0]["value"]
        answer = turns[1]["value"]
        prefix = f"{IMAGE_TOKEN}\n"
        if question.startswith(prefix):
            question = question[len(prefix):]
        return InstructRecord(
            id=obj["id"],
            image=obj["image"],
            task=TaskId.parse(obj["task"]),
            question=question,
            answer=answer,
            subject=obj.get("subject"),
            object=obj.get("object"),
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise ValueError(f"malformed instruction record: {exc!r}") from None


def dumps_records(records: Iterable[InstructRecord], cfg: BuildConfig | None = None, plain: bool = False) -> str:
    if plain:
        cfg = cfg or BuildConfig()
        return "".join(render_plain(r, cfg) for r in records)
    return "".join(json.dumps(record_to_dict(r), ensure_ascii=False) + "\n" for r in records)
