# src/harness/taskfile.py
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from core.errors import InvalidInput
from core.utils import format_rat, parse_rat
from learning.tasks import CriterionKind, EmpiricalTask

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TaskFile:
    tasks: tuple[EmpiricalTask, ...]
    criterion: CriterionKind | None = None
    epsilon: Fraction | None = None


def _atom(raw: Any, dim_x: int, dim_y: int, where: str):
    if not isinstance(raw, list) or len(raw) != dim_x + dim_y:
        raise InvalidInput(f"{where}: atom must be a list of {dim_x + dim_y} rational strings")
    try:
        values = [parse_rat(v) for v in raw]
    except ValueError as e:
        raise InvalidInput(f"{where}: {e}") from None
    return tuple(values[:dim_x]), tuple(values[dim_x:])


def parse_tasks(doc: Any, source: str = "<task file>") -> TaskFile:
    """
    {"dim_x": 1, "dim_y": 1, "criterion": "per_sample_abs", "epsilon": "1",
     "tasks": [{"id": 1, "atoms": [["1", "1"]]}, ...]}

    A single task may be given as a top-level "atoms" array instead of "tasks".
    """
    if not isinstance(doc, dict):
        raise InvalidInput(f"{source}: expected a JSON object")
    try:
        dim_x, dim_y = int(doc["dim_x"]), int(doc["dim_y"])
    except (KeyError, TypeError, ValueError):
        raise InvalidInput(f"{source}: integer fields dim_x and dim_y are required") from None

    if "tasks" in doc:
        entries = doc["tasks"]
    elif "atoms" in doc:
        entries = [{"id": 1, "atoms": doc["atoms"]}]
    else:
        raise InvalidInput(f"{source}: needs a 'tasks' or an 'atoms' array")
    if not isinstance(entries, list) or not entries:
        raise InvalidInput(f"{source}: no tasks")

    tasks = []
    for i, entry in enumerate(entries, start=1):
        if not isinstance(entry, dict) or not isinstance(entry.get("atoms"), list):
            raise InvalidInput(f"{source}: task #{i} must be an object with an 'atoms' array")
        task_id = int(entry.get("id", i))
        atoms = tuple(_atom(a, dim_x, dim_y, f"{source}: task {task_id}") for a in entry["atoms"])
        tasks.append(EmpiricalTask(atoms, task_id))

    criterion = CriterionKind.parse(doc["criterion"]) if doc.get("criterion") else None
    epsilon = None
    if doc.get("epsilon") is not None:
        try:
            epsilon = parse_rat(doc["epsilon"])
        except ValueError as e:
            raise InvalidInput(f"{source}: epsilon: {e}") from None
    return TaskFile(tuple(tasks), criterion, epsilon)


def load_tasks(path: str | Path) -> TaskFile:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InvalidInput(f"{path}: not valid JSON ({e.msg} at line {e.lineno})") from None
    tf = parse_tasks(doc, str(path))
    logger.debug("loaded %d tasks from %s", len(tf.tasks), path)
    return tf


def dump_tasks(
    tasks: Sequence[EmpiricalTask],
    criterion: CriterionKind | None = None,
    epsilon: Fraction | None = None,
) -> dict:
    if not tasks:
        raise InvalidInput("nothing to write: empty task list")
    doc: dict[str, Any] = {"dim_x": tasks[0].dim_x, "dim_y": tasks[0].dim_y}
    if criterion is not None:
        doc["criterion"] = criterion.value
    if epsilon is not None:
        doc["epsilon"] = format_rat(Fraction(epsilon))
    doc["tasks"] = [
        {"id": task.task_id, "atoms": [[format_rat(v) for v in x + y] for x, y in task.atoms]}
        for task in tasks
    ]
    return doc


def save_tasks(
    path: str | Path,
    tasks: Sequence[EmpiricalTask],
    criterion: CriterionKind | None = None,
    epsilon: Fraction | None = None,
) -> None:
    text = json.dumps(dump_tasks(tasks, criterion, epsilon), indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")
