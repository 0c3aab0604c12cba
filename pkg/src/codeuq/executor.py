"""Sandboxed candidate execution and execution-signature assembly.

Each candidate runs in its own driver subprocess speaking a JSON-lines
protocol (one request line per input, one response line back).  The
orchestrator is the single timeout authority: it kills the child on expiry
and classifies the cell as a timeout.  After any abnormal cell the child is
restarted so state contamination cannot leak into later inputs.

Cells are independent by construction; a crash or hang in one
(candidate, input) pair never aborts the others.
"""

from __future__ import annotations

import json
import os
import selectors
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .canon import OutputDecodeError, canonical_json, normalize
from .corpus import CandidateProgram, InputValue, Task

__all__ = [
    "ErrorType",
    "Outcome",
    "ExecutionSignature",
    "ExecConfig",
    "InputQuality",
    "SubprocessExecutor",
    "ReplayExecutor",
    "execute_all",
    "diagnostics",
    "normalize",
]

_WORKER_PATH = Path(__file__).with_name("_pyworker.py")


@dataclass(frozen=True)
class ErrorType:
    """Coarse abnormal-termination label; never carries message text."""

    kind: str  # Timeout | RuntimeError | NonzeroExit | OutputDecodeError | SandboxFailure
    detail: str | None = None  # exception class name / exit code
    # diagnostic only, excluded from equality: harness faults must not split
    # clusters by message text
    note: str = field(default="", compare=False)

    @staticmethod
    def timeout() -> "ErrorType":
        return ErrorType("Timeout")

    @staticmethod
    def runtime(class_name: str) -> "ErrorType":
        return ErrorType("RuntimeError", class_name)

    @staticmethod
    def nonzero_exit(code: int) -> "ErrorType":
        return ErrorType("NonzeroExit", str(code))

    @staticmethod
    def decode_error() -> "ErrorType":
        return ErrorType("OutputDecodeError")

    @staticmethod
    def sandbox_failure(reason: str = "") -> "ErrorType":
        return ErrorType("SandboxFailure", note=reason)

    def label(self) -> str:
        return f"{self.kind}({self.detail})" if self.detail else self.kind


@dataclass(frozen=True)
class Outcome:
    """One cell of an execution signature.

    Equality ignores wall_time_ms: two Normal outcomes are equal iff their
    canonical outputs are equal, two Abnormal ones iff their error types are.
    """

    canonical_output: str | None = None
    error_type: ErrorType | None = None
    wall_time_ms: int = field(default=0, compare=False)

    def __post_init__(self):
        if (self.canonical_output is None) == (self.error_type is None):
            raise ValueError("outcome is either normal or abnormal")

    @staticmethod
    def normal(canonical_output: str, wall_time_ms: int = 0) -> "Outcome":
        return Outcome(canonical_output=canonical_output, wall_time_ms=wall_time_ms)

    @staticmethod
    def abnormal(error_type: ErrorType, wall_time_ms: int = 0) -> "Outcome":
        return Outcome(error_type=error_type, wall_time_ms=wall_time_ms)

    @property
    def is_normal(self) -> bool:
        return self.canonical_output is not None

    def key(self):
        if self.is_normal:
            return ("normal", self.canonical_output)
        return ("abnormal", self.error_type.kind, self.error_type.detail)

    def to_json(self):
        if self.is_normal:
            return {"output": self.canonical_output, "wall_time_ms": self.wall_time_ms}
        return {
            "error_kind": self.error_type.kind,
            "error_detail": self.error_type.detail,
            "wall_time_ms": self.wall_time_ms,
        }

    @staticmethod
    def from_json(obj) -> "Outcome":
        ms = int(obj.get("wall_time_ms", 0))
        if "output" in obj:
            return Outcome.normal(obj["output"], ms)
        return Outcome.abnormal(ErrorType(obj["error_kind"], obj.get("error_detail")), ms)


@dataclass(frozen=True)
class ExecutionSignature:
    """Ordered outcomes of one candidate over the shared input set."""

    task_id: str
    rank: int
    outcomes: tuple[Outcome, ...]

    def key(self):
        return tuple(o.key() for o in self.outcomes)

    def to_json(self):
        return {
            "task_id": self.task_id,
            "rank": self.rank,
            "outcomes": [o.to_json() for o in self.outcomes],
        }

    @staticmethod
    def from_json(obj) -> "ExecutionSignature":
        return ExecutionSignature(
            obj["task_id"],
            int(obj["rank"]),
            tuple(Outcome.from_json(o) for o in obj["outcomes"]),
        )


@dataclass(frozen=True)
class ExecConfig:
    timeout_ms_per_input: int = 200
    max_parallel_workers: int = 1
    memory_cap_mb: int | None = None
    shim_path: Path | None = None  # None -> built-in Python driver
    # how long to wait for the shim's readiness signal before the first
    # request of each worker life; keeps interpreter startup and candidate
    # load out of the per-input timeout.  Shims that never signal just pay
    # this wait once per life.
    startup_grace_ms: int = 2000

    def __post_init__(self):
        if self.timeout_ms_per_input <= 0:
            raise ValueError("timeout_ms_per_input must be positive")


class ExecutorError(RuntimeError):
    pass


class LengthMismatch(ValueError):
    pass


# --- worker subprocess ---------------------------------------------------------


def _worker_command(config: ExecConfig, candidate_path: str, task: Task) -> list[str]:
    kind = "stdin" if task.is_stdin else "function"
    entry = None
    if not task.is_stdin:
        entry = task.interface.entry_name
    if config.shim_path is None:
        cmd = [sys.executable, str(_WORKER_PATH)]
    elif str(config.shim_path).endswith(".py"):
        cmd = [sys.executable, str(config.shim_path)]
    else:
        cmd = [str(config.shim_path)]
    cmd += [candidate_path, "--task-kind", kind]
    if entry:
        cmd += ["--entry", entry]
    return cmd


class _Worker:
    """One driver subprocess with deadline-bounded line exchange."""

    def __init__(self, cmd: list[str], memory_cap_mb: int | None):
        self.cmd = cmd
        self.memory_cap_mb = memory_cap_mb
        self.proc: subprocess.Popen | None = None
        self._buf = b""

    def start(self) -> None:
        preexec = None
        if self.memory_cap_mb is not None:
            cap = self.memory_cap_mb * 1024 * 1024

            def preexec():  # runs in the child before exec
                import resource

                resource.setrlimit(resource.RLIMIT_AS, (cap, cap))

        self.proc = subprocess.Popen(
            self.cmd,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            preexec_fn=preexec,
        )
        self._buf = b""

    def wait_ready(self, grace_ms: int) -> None:
        """Wait for the shim's stderr readiness line, up to grace_ms.

        Proceeds either way: a shim that never signals simply consumes the
        grace once per life, and any real fault surfaces on the first
        request.  The stdout protocol carries no unsolicited lines.
        """
        fd = self.proc.stderr.fileno()
        os.set_blocking(fd, False)
        deadline = time.monotonic() + grace_ms / 1000.0
        sel = selectors.DefaultSelector()
        sel.register(fd, selectors.EVENT_READ)
        buf = b""
        try:
            while b"\n" not in buf:
                remaining = deadline - time.monotonic()
                if remaining <= 0 or self.proc.poll() is not None:
                    return
                if not sel.select(timeout=min(remaining, 0.05)):
                    continue
                try:
                    chunk = os.read(fd, 4096)
                except BlockingIOError:
                    continue
                if not chunk:
                    return
                buf += chunk
        finally:
            sel.close()

    def alive(self) -> bool:
        return self.proc is not None and self.proc.poll() is None

    def kill(self) -> None:
        if self.proc is not None and self.proc.poll() is None:
            self.proc.kill()
            self.proc.wait()

    def send(self, request: dict) -> None:
        line = json.dumps(request) + "\n"
        self.proc.stdin.write(line.encode("utf-8"))
        self.proc.stdin.flush()

    def read_line(self, deadline: float) -> bytes | None:
        """Read one response line; None on timeout, b"" on EOF.

        stderr is drained and discarded along the way so a chatty shim can
        never fill the pipe buffer and deadlock against us.
        """
        out_fd = self.proc.stdout.fileno()
        err_fd = self.proc.stderr.fileno()
        sel = selectors.DefaultSelector()
        sel.register(out_fd, selectors.EVENT_READ)
        sel.register(err_fd, selectors.EVENT_READ)
        try:
            while b"\n" not in self._buf:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return None
                events = sel.select(timeout=remaining)
                if not events:
                    return None
                saw_stdout = False
                for key, _ in events:
                    if key.fd == err_fd:
                        try:
                            if not os.read(err_fd, 65536):
                                sel.unregister(err_fd)  # stderr EOF: stop polling it
                        except (BlockingIOError, OSError):
                            pass
                        continue
                    saw_stdout = True
                    chunk = os.read(out_fd, 65536)
                    if not chunk:
                        return b""
                    self._buf += chunk
                if not saw_stdout:
                    continue
        finally:
            sel.close()
        line, self._buf = self._buf.split(b"\n", 1)
        return line


def _classify_death(worker: _Worker) -> ErrorType:
    rc = worker.proc.poll() if worker.proc else None
    if rc is None:
        return ErrorType.sandbox_failure("worker unresponsive")
    if rc != 0:
        return ErrorType.nonzero_exit(rc)
    return ErrorType.sandbox_failure("worker exited mid-protocol")


def _run_candidate(
    task: Task, candidate: CandidateProgram, inputs: list[InputValue], config: ExecConfig
) -> ExecutionSignature:
    # the built-in driver runs Python only; other languages need a shim that
    # knows how to compile and drive them
    if task.language != "Python" and config.shim_path is None:
        missing = Outcome.abnormal(
            ErrorType.sandbox_failure(f"no driver for language {task.language!r}"), 1
        )
        return ExecutionSignature(task.task_id, candidate.rank, tuple([missing] * len(inputs)))

    outcomes: list[Outcome] = []
    with tempfile.TemporaryDirectory(prefix="codeuq-") as tmp:
        candidate_path = os.path.join(tmp, "candidate.py")
        with open(candidate_path, "w", encoding="utf-8") as fh:
            fh.write(candidate.source)
        cmd = _worker_command(config, candidate_path, task)
        worker = _Worker(cmd, config.memory_cap_mb)
        try:
            for index, iv in enumerate(inputs):
                outcome = _run_cell(worker, task, index, iv, config)
                outcomes.append(outcome)
                if not outcome.is_normal:
                    worker.kill()  # restart before the next cell
        finally:
            worker.kill()
    return ExecutionSignature(task.task_id, candidate.rank, tuple(outcomes))


def _run_cell(
    worker: _Worker, task: Task, index: int, iv: InputValue, config: ExecConfig
) -> Outcome:
    if not worker.alive():
        try:
            worker.start()
        except OSError:
            return Outcome.abnormal(ErrorType.sandbox_failure("spawn failed"), 1)
        worker.wait_ready(config.startup_grace_ms)

    started = time.monotonic()

    def elapsed_ms() -> int:
        return max(1, int(round((time.monotonic() - started) * 1000)))

    if task.is_stdin:
        request = {"id": index, "stdin": iv.raw_stdin or ""}
    else:
        args = iv.value if isinstance(iv.value, list) else [iv.value]
        request = {"id": index, "args": args}

    try:
        worker.send(request)
    except (BrokenPipeError, OSError):
        worker.kill()
        return Outcome.abnormal(_classify_death(worker), elapsed_ms())

    deadline = started + config.timeout_ms_per_input / 1000.0
    line = worker.read_line(deadline)
    if line is None:
        worker.kill()
        return Outcome.abnormal(
            ErrorType.timeout(), max(config.timeout_ms_per_input, elapsed_ms())
        )
    if line == b"":
        return Outcome.abnormal(_classify_death(worker), elapsed_ms())

    try:
        response = json.loads(line)
    except ValueError:
        worker.kill()
        return Outcome.abnormal(ErrorType.sandbox_failure("protocol corruption"), elapsed_ms())

    if response.get("status") == "ok":
        output = response.get("output")
        try:
            if task.is_stdin:
                canonical = normalize(output if isinstance(output, str) else str(output))
            else:
                canonical = canonical_json(output)
        except (OutputDecodeError, TypeError):
            return Outcome.abnormal(ErrorType.decode_error(), elapsed_ms())
        return Outcome.normal(canonical, elapsed_ms())
    if response.get("status") == "error":
        class_name = str(response.get("error_type", "UnknownError"))
        return Outcome.abnormal(ErrorType.runtime(class_name), elapsed_ms())
    worker.kill()
    return Outcome.abnormal(ErrorType.sandbox_failure("malformed response"), elapsed_ms())


class SubprocessExecutor:
    """Runs candidates in driver subprocesses per ExecConfig."""

    def __init__(self, config: ExecConfig | None = None):
        self.config = config or ExecConfig()

    def run(
        self, task: Task, candidates: list[CandidateProgram], inputs: list[InputValue]
    ) -> list[ExecutionSignature]:
        if not candidates:
            raise ExecutorError("no candidates to execute")
        if not inputs:
            raise ExecutorError("no inputs to execute on")
        jobs = max(1, self.config.max_parallel_workers)
        if jobs == 1 or len(candidates) == 1:
            return [_run_candidate(task, c, inputs, self.config) for c in candidates]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_candidate, task, c, inputs, self.config)
                for c in candidates
            ]
            # merged in submission (rank) order, independent of completion order
            return [f.result() for f in futures]


def execute_all(
    task: Task,
    candidates: list[CandidateProgram],
    inputs: list[InputValue],
    config: ExecConfig | None = None,
) -> list[ExecutionSignature]:
    """Execute every candidate on every input; one signature per candidate."""
    return SubprocessExecutor(config).run(task, candidates, inputs)


class ReplayExecutor:
    """Mock executor replaying recorded signatures; lets every downstream
    stage run without any driver subprocess.

    A task may carry several recordings per rank (e.g. the fuzz-input set and
    the reference-test set); the one matching the requested input count is
    replayed.
    """

    def __init__(self, signatures_by_task: dict[str, list[ExecutionSignature]]):
        self._by_task = signatures_by_task

    @staticmethod
    def from_file(path) -> "ReplayExecutor":
        with open(path, encoding="utf-8") as fh:
            records = json.load(fh)
        by_task: dict[str, list[ExecutionSignature]] = {}
        for obj in records:
            sig = ExecutionSignature.from_json(obj)
            by_task.setdefault(sig.task_id, []).append(sig)
        return ReplayExecutor(by_task)

    @staticmethod
    def record(signatures: list[ExecutionSignature], path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump([s.to_json() for s in signatures], fh, indent=1)

    def run(
        self, task: Task, candidates: list[CandidateProgram], inputs: list[InputValue]
    ) -> list[ExecutionSignature]:
        recorded = self._by_task.get(task.task_id, [])
        out = []
        for cand in candidates:
            matches = [s for s in recorded if s.rank == cand.rank]
            if not matches:
                raise ExecutorError(
                    f"no recorded signature for task {task.task_id!r} rank {cand.rank}"
                )
            sized = [s for s in matches if len(s.outcomes) == len(inputs)]
            if not sized:
                raise LengthMismatch(
                    f"recorded signatures for task {task.task_id!r} rank {cand.rank} "
                    f"have lengths {sorted({len(s.outcomes) for s in matches})}, "
                    f"expected {len(inputs)}"
                )
            out.append(sized[0])
        return out


# --- input-quality diagnostics -----------------------------------------------------


@dataclass(frozen=True)
class InputQuality:
    valid_exec_rate: float
    unique_input_rate: float
    crash_pollution_rate: float

    def to_json(self):
        return {
            "valid_exec_rate": self.valid_exec_rate,
            "unique_input_rate": self.unique_input_rate,
            "crash_pollution_rate": self.crash_pollution_rate,
        }


def diagnostics(
    signatures: list[ExecutionSignature], inputs: list[InputValue]
) -> InputQuality:
    """Input-validity diagnostics over one task's K x N execution grid.

    valid_exec_rate: fraction of inputs where at least one candidate produced
    a non-crash outcome.  unique_input_rate: fraction of inputs distinct
    under canonical normalization.  crash_pollution_rate: fraction of all
    cells that terminated abnormally.
    """
    n = len(inputs)
    if n == 0 or not signatures:
        raise LengthMismatch("diagnostics needs at least one input and one signature")
    for sig in signatures:
        if len(sig.outcomes) != n:
            raise LengthMismatch("signature length differs from input count")

    valid = sum(
        1 for j in range(n) if any(sig.outcomes[j].is_normal for sig in signatures)
    )
    unique = len({iv.canonical() for iv in inputs})
    cells = len(signatures) * n
    crashes = sum(1 for sig in signatures for o in sig.outcomes if not o.is_normal)
    return InputQuality(valid / n, unique / n, crashes / cells)
