"""Shared fuzz-input generation: seeded mutation and seed-free sampling.

Both modes produce, per task, the input set that every candidate program is
executed on.  Generation is a pure function of (task_id, rng_seed, config),
bit-identical across runs and platforms, so downstream metrics can be
replayed and the fuzz-seed robustness protocol (rerun with seeds 1, 2, 3)
only has to vary rng_seed.
"""

from __future__ import annotations

import hashlib
import math
import random
import re
import string
from dataclasses import dataclass
from typing import NamedTuple

from .corpus import FunctionInterface, InputValue, Task

_ALNUM = string.ascii_letters + string.digits

# rng_seeds used by convention for the 3-seed robustness reruns
ROBUSTNESS_SEEDS = (1, 2, 3)


class FuzzError(ValueError):
    pass


class NoSeeds(FuzzError):
    """Seeded mode requires at least one seed input."""


class ExhaustedAttempts(FuzzError):
    """Could not produce a structurally valid value within the attempt budget."""


@dataclass(frozen=True)
class FuzzConfig:
    n_inputs: int = 10
    mode: str = "seeded"  # "seeded" | "seed-free"
    rng_seed: int = 1
    max_attempts_per_input: int = 100
    numeric_magnitude_cap: int = 10**6
    max_collection_len: int = 32

    def __post_init__(self):
        if self.n_inputs < 1:
            raise ValueError("n_inputs must be >= 1")
        if self.numeric_magnitude_cap <= 0 or self.max_collection_len <= 0:
            raise ValueError("caps must be positive")
        if self.mode not in ("seeded", "seed-free"):
            raise ValueError(f"unknown mode {self.mode!r}")


# --- type hints ---------------------------------------------------------------

_MAX_HINT_DEPTH = 8


@dataclass(frozen=True)
class TypeHint:
    kind: str  # int | float | bool | str | list | tuple | dict | unknown
    args: tuple["TypeHint", ...] = ()

    def __repr__(self):
        if not self.args:
            return self.kind
        return f"{self.kind}[{', '.join(map(repr, self.args))}]"


INT = TypeHint("int")
FLOAT = TypeHint("float")
BOOL = TypeHint("bool")
STR = TypeHint("str")
UNKNOWN = TypeHint("unknown")


def list_of(elem: TypeHint) -> TypeHint:
    return TypeHint("list", (elem,))


def tuple_of(elems) -> TypeHint:
    return TypeHint("tuple", tuple(elems))


def dict_of(key: TypeHint, value: TypeHint) -> TypeHint:
    return TypeHint("dict", (key, value))


_SCALARS = {
    "int": INT,
    "float": FLOAT,
    "bool": BOOL,
    "str": STR,
    "string": STR,
    "integer": INT,
    "double": FLOAT,
}


def parse_type_hint(text: str | None, depth: int = 0) -> TypeHint:
    """Parse a declared annotation string such as "List[int]" into a TypeHint.

    Unparseable or too-deep annotations fall back to unknown; this is a total
    function.
    """
    if not text or depth >= _MAX_HINT_DEPTH:
        return UNKNOWN
    text = text.strip()
    low = text.lower()
    if low in _SCALARS:
        return _SCALARS[low]
    m = re.fullmatch(r"(\w+)\s*\[(.*)\]", text, re.DOTALL)
    if not m:
        return UNKNOWN
    head, inner = m.group(1).lower(), m.group(2)
    parts = _split_args(inner)
    if head in ("list", "sequence", "set"):
        elem = parse_type_hint(parts[0], depth + 1) if parts else UNKNOWN
        return list_of(elem)
    if head == "tuple":
        return tuple_of(parse_type_hint(p, depth + 1) for p in parts)
    if head in ("dict", "mapping"):
        key = parse_type_hint(parts[0], depth + 1) if len(parts) > 0 else UNKNOWN
        val = parse_type_hint(parts[1], depth + 1) if len(parts) > 1 else UNKNOWN
        return dict_of(key, val)
    if head == "optional" and parts:
        return parse_type_hint(parts[0], depth + 1)
    return UNKNOWN


def _split_args(inner: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(inner):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(inner[start:i])
            start = i + 1
    tail = inner[start:].strip()
    if tail:
        parts.append(tail)
    return [p.strip() for p in parts]


# Name-based fallback rules, checked in order; first match wins.  List-like
# names must be checked before the scalar "num" rule so "nums" stays a list.
def _hint_from_name(name: str) -> TypeHint | None:
    low = name.lower()
    if low in ("arr", "array", "lst", "list") or "nums" in low or "arr" in low:
        return list_of(INT)
    if low.startswith(("num_", "count_", "n_")) or "count" in low:
        return INT  # "num_items" is a count, not a collection
    if len(low) > 1 and low.endswith("s") and low not in ("s", "is"):
        return list_of(INT)  # plural
    if low.startswith("is_") or "flag" in low or low.startswith("has_"):
        return BOOL
    if "num" in low or "cnt" in low or low in ("n", "k", "m", "x", "y", "idx", "index"):
        return INT
    if low in ("s", "t", "ch") or "str" in low or "word" in low or "text" in low or "name" in low:
        return STR
    return None


_DESC_RULES = (
    (("list of", "array of", "integer array", "list `"), list_of(INT)),
    (("string", "word", "sentence"), STR),
    (("integer", "number"), INT),
)


def infer_types(task: Task) -> list[TypeHint]:
    """Infer one TypeHint per parameter from annotations, names, description.

    Declared annotations win; otherwise name rules apply, then description
    keywords; the fallback is unknown.  Total function, never raises.
    """
    if not isinstance(task.interface, FunctionInterface):
        raise FuzzError("infer_types requires a function interface")
    desc = task.description.lower()
    hints: list[TypeHint] = []
    for name, annotation in task.interface.parameters:
        hint = parse_type_hint(annotation)
        if hint is UNKNOWN:
            hint = _hint_from_name(name) or UNKNOWN
        if hint is UNKNOWN:
            for keywords, rule_hint in _DESC_RULES:
                if any(kw in desc for kw in keywords):
                    hint = rule_hint
                    break
        hints.append(hint)
    return hints


# --- deterministic rng derivation ---------------------------------------------


def derive_rng(task_id: str, rng_seed: int, tag: str = "") -> random.Random:
    """Task- and purpose-scoped RNG, stable across platforms."""
    digest = hashlib.sha256(f"{task_id}\x00{rng_seed}\x00{tag}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


# --- value mutation -------------------------------------------------------------


def _clamp_int(v: int, cap: int) -> int:
    return max(-cap, min(cap, v))


def _mutate_int(v: int, rng: random.Random, config: FuzzConfig) -> int:
    cap = config.numeric_magnitude_cap
    op = rng.randrange(5)
    if op == 0:
        v = v + rng.choice((-1, 1))
    elif op == 1:
        v = v * 2
    elif op == 2:
        v = -v
    elif op == 3:
        mag = max(1, abs(v))
        v = rng.randint(-2 * mag, 2 * mag)
    else:
        v = rng.choice((0, 1, -1, cap, -cap))
    return _clamp_int(v, cap)


def _mutate_float(v: float, rng: random.Random, config: FuzzConfig) -> float:
    cap = float(config.numeric_magnitude_cap)
    op = rng.randrange(6)
    if op == 0:
        v = v + rng.choice((-1.0, 1.0))
    elif op == 1:
        v = v * 2.0
    elif op == 2:
        v = -v
    elif op == 3:
        mag = max(1.0, abs(v))
        v = rng.uniform(-2.0 * mag, 2.0 * mag)
    elif op == 4:
        v = rng.choice((0.0, 1.0, -1.0, cap, -cap))
    else:
        v = v + rng.uniform(-0.5, 0.5)  # small jitter
    if not math.isfinite(v):
        v = cap
    return max(-cap, min(cap, v))


def _mutate_str(v: str, rng: random.Random, config: FuzzConfig) -> str:
    op = rng.randrange(5)
    if op == 0 and v:
        i = rng.randrange(len(v))
        v = v[:i] + v[i + 1 :]  # delete one char
    elif op == 1:
        i = rng.randint(0, len(v))
        v = v[:i] + rng.choice(_ALNUM) + v[i:]
    elif op == 2 and v:
        i = rng.randrange(len(v))
        v = v[:i] + rng.choice(_ALNUM) + v[i + 1 :]
    elif op == 3:
        v = ""
    else:
        v = v.swapcase()
    return v[: config.max_collection_len]


def _default_for(example, rng: random.Random, config: FuzzConfig):
    if isinstance(example, bool):
        return rng.random() < 0.5
    if isinstance(example, int):
        return rng.randint(-10, 10)
    if isinstance(example, float):
        return rng.uniform(-10.0, 10.0)
    if isinstance(example, str):
        return rng.choice(_ALNUM)
    return 0


def _mutate_list(v: list, rng: random.Random, config: FuzzConfig) -> list:
    v = list(v)
    op = rng.randrange(5)
    if op == 0 and v:
        i = rng.randrange(len(v))
        v[i] = mutate_value(v[i], rng, config)
    elif op == 1:
        elem = mutate_value(rng.choice(v), rng, config) if v else rng.randint(-10, 10)
        v.append(elem)
    elif op == 2 and v:
        v.pop(rng.randrange(len(v)))
    elif op == 3 and len(v) > 1:
        j = rng.randint(1, len(v))
        head = v[:j]
        rng.shuffle(head)
        v = head + v[j:]
    else:
        v = []
    return v[: config.max_collection_len]


def _mutate_dict(v: dict, rng: random.Random, config: FuzzConfig) -> dict:
    v = dict(v)
    keys = sorted(v)
    if keys and rng.random() < 0.7:
        key = rng.choice(keys)
        v[key] = mutate_value(v[key], rng, config)
    else:
        base = rng.choice(keys) if keys else "k"
        new_key = _mutate_str(str(base), rng, config) or "k"
        v[new_key] = _default_for(v[keys[0]] if keys else 0, rng, config)
    if len(v) > config.max_collection_len:
        for key in sorted(v)[config.max_collection_len :]:
            del v[key]
    return v


def mutate_value(v, rng: random.Random, config: FuzzConfig):
    """Apply one structure-preserving, type-specific mutation to a value."""
    if isinstance(v, bool):
        return not v
    if isinstance(v, int):
        return _mutate_int(v, rng, config)
    if isinstance(v, float):
        return _mutate_float(v, rng, config)
    if isinstance(v, str):
        return _mutate_str(v, rng, config)
    if isinstance(v, list):
        return _mutate_list(v, rng, config)
    if isinstance(v, tuple):
        return tuple(_mutate_list(list(v), rng, config))
    if isinstance(v, dict):
        return _mutate_dict(v, rng, config)
    return v  # null and anything exotic pass through unchanged


def value_shape(v):
    """Structural type of a value under the hint lattice (lists collapse)."""
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, float):
        return "float"
    if isinstance(v, str):
        return "str"
    if isinstance(v, (list, tuple)):
        return ("list", value_shape(v[0]) if v else None)
    if isinstance(v, dict):
        return "dict"
    return "null"


def _shapes_match(a, b) -> bool:
    if isinstance(a, tuple) and isinstance(b, tuple):
        return a[0] == b[0] and (a[1] is None or b[1] is None or _shapes_match(a[1], b[1]))
    return a == b


# --- stdin mutation -------------------------------------------------------------

_TOKEN_SPLIT = re.compile(r"(\s+)")
_INT_TOKEN = re.compile(r"[-+]?\d+")
_FLOAT_TOKEN = re.compile(r"[-+]?\d*\.\d+")


def _mutate_stdin(text: str, rng: random.Random, config: FuzzConfig) -> str:
    # Tokenize on whitespace but keep the separators, so the line format the
    # candidate's parser expects survives mutation.
    parts = _TOKEN_SPLIT.split(text)
    token_idx = [i for i, p in enumerate(parts) if p and not p.isspace()]
    if not token_idx:
        return text
    i = rng.choice(token_idx)
    tok = parts[i]
    if _INT_TOKEN.fullmatch(tok):
        parts[i] = str(_mutate_int(int(tok), rng, config))
    elif _FLOAT_TOKEN.fullmatch(tok):
        parts[i] = str(_mutate_float(float(tok), rng, config))
    else:
        # an emptied token would merge separators and change the token count
        parts[i] = _mutate_str(tok, rng, config) or tok
    return "".join(parts)


# --- seeded mutation -------------------------------------------------------------


def _mutate_input(seed: InputValue, rng: random.Random, config: FuzzConfig) -> InputValue:
    if seed.is_stdin:
        text = seed.raw_stdin or ""
        for _ in range(rng.randint(1, 3)):
            text = _mutate_stdin(text, rng, config)
        return InputValue.stdin(text)
    # the top-level list is the argument tuple: fixed arity, mutate one slot
    args = list(seed.value) if isinstance(seed.value, list) else [seed.value]
    if args:
        for _ in range(rng.randint(1, 3)):
            i = rng.randrange(len(args))
            args[i] = mutate_value(args[i], rng, config)
    return InputValue.args(args)


def _input_shape(iv: InputValue):
    if iv.is_stdin:
        return "stdin"
    args = iv.value if isinstance(iv.value, list) else [iv.value]
    return tuple(value_shape(a) for a in args)


def mutate_seeded(task: Task, config: FuzzConfig) -> list[InputValue]:
    """Generate exactly n_inputs values by mutating the task's seed inputs.

    Each output applies one or more structure-preserving mutations to a
    uniformly chosen seed.  Deterministic given (task_id, rng_seed); raises
    NoSeeds without seed inputs and ExhaustedAttempts when no structurally
    valid mutant can be found within the attempt budget.
    """
    if not task.seed_inputs:
        raise NoSeeds(f"task {task.task_id!r} has no seed inputs")
    rng = derive_rng(task.task_id, config.rng_seed, "mutate")
    out: list[InputValue] = []
    for _ in range(config.n_inputs):
        for attempt in range(config.max_attempts_per_input):
            seed = task.seed_inputs[rng.randrange(len(task.seed_inputs))]
            mutant = _mutate_input(seed, rng, config)
            want, got = _input_shape(seed), _input_shape(mutant)
            if want == "stdin" or all(_shapes_match(a, b) for a, b in zip(want, got)):
                out.append(mutant)
                break
        else:
            raise ExhaustedAttempts(
                f"task {task.task_id!r}: no valid mutant in {config.max_attempts_per_input} attempts"
            )
    return out


# --- seed-free sampling -------------------------------------------------------------


def _sample(hint: TypeHint, rng: random.Random, config: FuzzConfig, depth: int = 0):
    cap = config.numeric_magnitude_cap
    if hint.kind == "unknown":
        hint = rng.choice((INT, STR, list_of(INT)))
    if hint.kind == "int":
        mag = int(math.exp(rng.uniform(0.0, math.log(cap + 1)))) - 1
        return -mag if rng.random() < 0.3 else mag
    if hint.kind == "float":
        mag = math.exp(rng.uniform(0.0, math.log(cap + 1))) - 1.0
        return -mag if rng.random() < 0.3 else mag
    if hint.kind == "bool":
        return rng.random() < 0.5
    if hint.kind == "str":
        return "".join(rng.choice(_ALNUM) for _ in range(rng.randint(0, 16)))
    if hint.kind == "list":
        elem = hint.args[0] if hint.args else INT
        if depth >= _MAX_HINT_DEPTH:
            return []
        return [
            _sample(elem, rng, config, depth + 1)
            for _ in range(rng.randint(0, config.max_collection_len))
        ]
    if hint.kind == "tuple":
        return [_sample(a, rng, config, depth + 1) for a in hint.args]
    if hint.kind == "dict":
        val = hint.args[1] if len(hint.args) > 1 else INT
        n = rng.randint(0, min(8, config.max_collection_len))
        return {
            "".join(rng.choice(_ALNUM) for _ in range(rng.randint(1, 8))): _sample(
                val, rng, config, depth + 1
            )
            for _ in range(n)
        }
    raise FuzzError(f"cannot sample hint {hint!r}")


def sample_seed_free(hints: list[TypeHint], config: FuzzConfig) -> list[InputValue]:
    """Sample n_inputs argument tuples from generic per-type distributions.

    Deterministic given rng_seed.  Callers wanting per-task variation derive
    a task-scoped seed first (see derive_rng / generate_inputs).
    """
    rng = random.Random(config.rng_seed)
    return [
        InputValue.args([_sample(h, rng, config) for h in hints])
        for _ in range(config.n_inputs)
    ]


# --- dedup ------------------------------------------------------------------------


class DedupResult(NamedTuple):
    values: list[InputValue]
    complete: bool  # False when uniqueness was unattainable within the budget


def dedupe_and_fill(
    candidates: list[InputValue], target: int, config: FuzzConfig
) -> DedupResult:
    """Drop duplicates under canonical normalization and refill by mutation.

    Replacement values are produced by mutating already-accepted values, so
    the result stays structure-compatible.  May return fewer than target
    values (complete=False) when the value domain is too small, e.g. booleans.
    """
    rng = derive_rng("", config.rng_seed, "dedupe")
    seen: set[str] = set()
    unique: list[InputValue] = []
    for iv in candidates:
        key = iv.canonical()
        if key not in seen:
            seen.add(key)
            unique.append(iv)
        if len(unique) >= target:
            break
    attempts = 0
    budget = config.max_attempts_per_input * max(1, target)
    while len(unique) < target and unique and attempts < budget:
        attempts += 1
        base = unique[rng.randrange(len(unique))]
        mutant = _mutate_input(base, rng, config)
        key = mutant.canonical()
        if key not in seen:
            seen.add(key)
            unique.append(mutant)
    return DedupResult(unique[:target], complete=len(unique) >= target)


# --- task-level entry point ----------------------------------------------------------


def generate_inputs(task: Task, config: FuzzConfig) -> DedupResult:
    """Produce the task's shared input set: generate, dedupe, refill.

    Seed-free sampling uses a task-scoped seed derived from
    (task_id, rng_seed) so different tasks get different inputs while the
    whole run stays reproducible from one rng_seed.
    """
    if config.mode == "seeded":
        raw = mutate_seeded(task, config)
    else:
        hints = infer_types(task) if not task.is_stdin else []
        if task.is_stdin:
            raise FuzzError(
                f"task {task.task_id!r}: seed-free generation needs a function interface"
            )
        task_seed = derive_rng(task.task_id, config.rng_seed, "seedfree").randrange(2**63)
        raw = sample_seed_free(
            hints, FuzzConfig(
                n_inputs=config.n_inputs,
                mode="seed-free",
                rng_seed=task_seed,
                max_attempts_per_input=config.max_attempts_per_input,
                numeric_magnitude_cap=config.numeric_magnitude_cap,
                max_collection_len=config.max_collection_len,
            )
        )
    return dedupe_and_fill(raw, config.n_inputs, config)
