"""Task corpora: loading, validation and run-report persistence.

A corpus directory holds two JSONL files:

  tasks.jsonl       one task per line:
                    task_id, description, interface, seed_inputs,
                    reference_tests, difficulty, language
  candidates.jsonl  one candidate program per line: task_id, rank, source

Everything is read-only after load and safe to share across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .canon import canonical_json, normalize

DIFFICULTIES = ("Easy", "Medium", "Hard", "Unknown")
LANGUAGES = ("Python", "Java", "Cpp")


class CorpusError(ValueError):
    """Base class for corpus validation failures."""


class ParseError(CorpusError):
    def __init__(self, path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = str(path)
        self.line_no = line_no


class MissingTask(CorpusError):
    def __init__(self, task_id: str):
        super().__init__(f"candidate references unknown task {task_id!r}")
        self.task_id = task_id


class RankGap(CorpusError):
    def __init__(self, task_id: str, ranks: list[int]):
        super().__init__(f"task {task_id!r}: ranks {sorted(ranks)} are not 1..K")
        self.task_id = task_id


@dataclass(frozen=True)
class FunctionInterface:
    """Entry point of a function-style task; parameter order is declaration order."""

    entry_name: str
    parameters: tuple[tuple[str, str | None], ...] = ()
    returns: str | None = None


@dataclass(frozen=True)
class StdinProgram:
    """Marker for competitive-programming style tasks that read stdin."""


@dataclass(frozen=True)
class InputValue:
    """One shared test input: either a JSON value tree or raw stdin text.

    For function-style tasks the value tree is the positional argument list.
    Exactly one of (value, raw_stdin) is populated.
    """

    value: object = None
    raw_stdin: str | None = None
    is_stdin: bool = False

    @staticmethod
    def args(values) -> "InputValue":
        return InputValue(value=list(values))

    @staticmethod
    def stdin(text: str) -> "InputValue":
        return InputValue(raw_stdin=text, is_stdin=True)

    def canonical(self) -> str:
        """Canonical string form, used for input dedup and UniqueInputRate."""
        if self.is_stdin:
            return normalize(self.raw_stdin or "")
        return canonical_json(self.value)

    def to_json(self):
        if self.is_stdin:
            return {"raw_stdin": self.raw_stdin}
        return {"value": self.value}

    @staticmethod
    def from_json(obj) -> "InputValue":
        if not isinstance(obj, dict) or len(obj) != 1:
            raise ValueError(f"input value must have exactly one of value/raw_stdin: {obj!r}")
        if "raw_stdin" in obj:
            return InputValue.stdin(obj["raw_stdin"])
        if "value" in obj:
            return InputValue(value=obj["value"])
        raise ValueError(f"unrecognized input value: {obj!r}")


@dataclass(frozen=True)
class Task:
    task_id: str
    description: str
    interface: FunctionInterface | StdinProgram
    seed_inputs: tuple[InputValue, ...] = ()
    reference_tests: tuple[tuple[InputValue, object], ...] = ()
    difficulty: str = "Unknown"
    language: str = "Python"

    @property
    def is_stdin(self) -> bool:
        return isinstance(self.interface, StdinProgram)


@dataclass(frozen=True)
class CandidateProgram:
    task_id: str
    rank: int  # 1 = first sample in sampling order, the top-ranked output
    source: str


@dataclass
class Corpus:
    tasks: list[Task] = field(default_factory=list)
    candidates: list[CandidateProgram] = field(default_factory=list)

    def task_by_id(self, task_id: str) -> Task:
        for task in self.tasks:
            if task.task_id == task_id:
                return task
        raise KeyError(task_id)

    def candidates_for(self, task_id: str) -> list[CandidateProgram]:
        found = [c for c in self.candidates if c.task_id == task_id]
        found.sort(key=lambda c: c.rank)
        return found


def _interface_to_json(interface):
    if isinstance(interface, StdinProgram):
        return {"kind": "stdin"}
    return {
        "kind": "function",
        "entry_name": interface.entry_name,
        "parameters": [[name, hint] for name, hint in interface.parameters],
        "returns": interface.returns,
    }


def _interface_from_json(obj):
    kind = obj.get("kind")
    if kind == "stdin":
        return StdinProgram()
    if kind == "function":
        params = tuple((p[0], p[1]) for p in obj.get("parameters", []))
        return FunctionInterface(obj["entry_name"], params, obj.get("returns"))
    raise ValueError(f"unknown interface kind: {kind!r}")


def _task_to_json(task: Task):
    return {
        "task_id": task.task_id,
        "description": task.description,
        "interface": _interface_to_json(task.interface),
        "seed_inputs": [iv.to_json() for iv in task.seed_inputs],
        "reference_tests": [[iv.to_json(), expected] for iv, expected in task.reference_tests],
        "difficulty": task.difficulty,
        "language": task.language,
    }


def _task_from_json(obj) -> Task:
    difficulty = obj.get("difficulty") or "Unknown"
    if difficulty not in DIFFICULTIES:
        raise ValueError(f"unknown difficulty {difficulty!r}")
    language = obj.get("language", "Python")
    return Task(
        task_id=obj["task_id"],
        description=obj.get("description", ""),
        interface=_interface_from_json(obj["interface"]),
        seed_inputs=tuple(InputValue.from_json(s) for s in obj.get("seed_inputs", [])),
        reference_tests=tuple(
            (InputValue.from_json(pair[0]), pair[1]) for pair in obj.get("reference_tests", [])
        ),
        difficulty=difficulty,
        language=language,
    )


def _read_jsonl(path: Path):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"malformed JSON: {exc.msg}") from None


def load_corpus(path) -> Corpus:
    """Load and validate a corpus directory.

    Raises MissingTask when a candidate references an unknown task, RankGap
    when a task's candidate ranks are not exactly 1..K, and ParseError (with
    path and line number) on malformed records.
    """
    root = Path(path)
    tasks_path = root / "tasks.jsonl"
    candidates_path = root / "candidates.jsonl"

    tasks: list[Task] = []
    seen_ids: set[str] = set()
    for line_no, obj in _read_jsonl(tasks_path):
        try:
            task = _task_from_json(obj)
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(tasks_path, line_no, str(exc)) from None
        if not task.task_id:
            raise ParseError(tasks_path, line_no, "empty task_id")
        if task.task_id in seen_ids:
            raise ParseError(tasks_path, line_no, f"duplicate task_id {task.task_id!r}")
        seen_ids.add(task.task_id)
        tasks.append(task)

    candidates: list[CandidateProgram] = []
    ranks_by_task: dict[str, list[int]] = {}
    for line_no, obj in _read_jsonl(candidates_path):
        try:
            cand = CandidateProgram(obj["task_id"], int(obj["rank"]), obj["source"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(candidates_path, line_no, str(exc)) from None
        if cand.task_id not in seen_ids:
            raise MissingTask(cand.task_id)
        ranks_by_task.setdefault(cand.task_id, []).append(cand.rank)
        candidates.append(cand)

    for task_id, ranks in ranks_by_task.items():
        if sorted(ranks) != list(range(1, len(ranks) + 1)):
            raise RankGap(task_id, ranks)

    candidates.sort(key=lambda c: (c.task_id, c.rank))
    return Corpus(tasks=tasks, candidates=candidates)


def write_corpus(corpus: Corpus, path) -> None:
    """Persist a corpus so that load_corpus(path) round-trips it exactly."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "tasks.jsonl", "w", encoding="utf-8") as fh:
        for task in corpus.tasks:
            fh.write(json.dumps(_task_to_json(task), ensure_ascii=False) + "\n")
    with open(root / "candidates.jsonl", "w", encoding="utf-8") as fh:
        for cand in sorted(corpus.candidates, key=lambda c: (c.task_id, c.rank)):
            row = {"task_id": cand.task_id, "rank": cand.rank, "source": cand.source}
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


# --- run reports ------------------------------------------------------------

REPORT_FIELDS = (
    "task_id",
    "sde",
    "dsde",
    "baseline_sc_entropy",
    "clusters",
    "dominant_index",
    "pass1",
    "partial_pass1",
    "diagnostics",
)


def report_row(
    task_id: str,
    sde: float,
    dsde: float,
    sc_entropy: float,
    cluster_sizes: list[int],
    dominant_index: int,
    pass1: bool | None,
    partial_pass1: float | None,
    diagnostics: dict,
) -> dict:
    """Build one report record in the fixed key order used on disk."""
    return {
        "task_id": task_id,
        "sde": sde,
        "dsde": dsde,
        "baseline_sc_entropy": sc_entropy,
        "clusters": list(cluster_sizes),
        "dominant_index": dominant_index,
        "pass1": pass1,
        "partial_pass1": partial_pass1,
        "diagnostics": dict(diagnostics),
    }


def write_report(rows: list[dict], path) -> None:
    """Write report rows as JSONL; rewriting identical rows is byte-identical."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def load_report(path) -> list[dict]:
    return [obj for _, obj in _read_jsonl(Path(path))]
