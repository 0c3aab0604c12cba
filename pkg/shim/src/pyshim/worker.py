"""Per-candidate execution shim.

Loads one candidate program, then answers JSON-lines requests on stdin with
exactly one JSON-line response each on stdout:

    {"id": k, "args": [...]}   ->  {"id": k, "status": "ok", "output": ...}
    {"id": k, "stdin": "..."}      {"id": k, "status": "error", "error_type": "..."}

Contract highlights:

  * error_type carries the bare exception class name only.  Messages embed
    run-specific text (addresses, paths) and must never cross the wire,
    because downstream grouping compares error labels for equality.
  * The candidate's stdout/stderr are captured or discarded; the protocol
    owns the real stdout.  A readiness line goes to stderr at startup so an
    orchestrator can exclude load time from its per-input timeout.
  * No timers in here: the orchestrator enforces timeouts by external kill.
  * One process drives one candidate; parallelism belongs to the caller.

Invocation:

    pyshim <candidate_file> --task-kind function|stdin [--entry NAME]

Exit code 0 on clean EOF of stdin.
"""

import argparse
import io
import json
import sys
import typing
from contextlib import redirect_stderr, redirect_stdout

OK = "ok"
ERROR = "error"


def base_namespace() -> dict:
    """Fresh globals for candidate code, with the typing names candidates
    habitually use without importing."""
    return {
        "__name__": "__candidate__",
        "List": typing.List,
        "Dict": typing.Dict,
        "Tuple": typing.Tuple,
        "Set": typing.Set,
        "Optional": typing.Optional,
        "Union": typing.Union,
        "Any": typing.Any,
    }


def resolve_entry(namespace: dict, entry_name: str | None):
    """Locate the callable to drive.

    Preference order: a function matching the requested entry name, the
    requested method (or the single public method) of a Solution class, or
    the single function the candidate defines.  Anything ambiguous resolves
    to None rather than guessing among alternatives.
    """
    if entry_name and callable(namespace.get(entry_name)):
        return namespace[entry_name]

    solution = namespace.get("Solution")
    if isinstance(solution, type):
        try:
            instance = solution()
        except BaseException:
            instance = None
        if instance is not None:
            if entry_name and callable(getattr(instance, entry_name, None)):
                return getattr(instance, entry_name)
            methods = [
                name
                for name in vars(solution)
                if not name.startswith("_") and callable(getattr(instance, name))
            ]
            if len(methods) == 1:
                return getattr(instance, methods[0])

    functions = [
        obj
        for name, obj in namespace.items()
        if not name.startswith("_")
        and callable(obj)
        and getattr(obj, "__module__", None) == "__candidate__"
        and not isinstance(obj, type)
    ]
    if len(functions) == 1:
        return functions[0]
    return None


def jsonable(value):
    """The value itself when JSON-representable, else its string form."""
    try:
        json.dumps(value)
        return value
    except (TypeError, ValueError):
        return str(value)


class CandidateRunner:
    """Holds the loaded candidate and evaluates one request at a time."""

    def __init__(self, source: str, task_kind: str, entry_name: str | None):
        self.task_kind = task_kind
        self.load_error: str | None = None
        self.entry = None
        self.code = None
        if task_kind == "function":
            namespace = base_namespace()
            try:
                exec(compile(source, "<candidate>", "exec"), namespace)
            except BaseException:
                self.load_error = "LoadError"
                return
            self.entry = resolve_entry(namespace, entry_name)
            if self.entry is None:
                self.load_error = "EntryPointNotFound"
        else:
            try:
                self.code = compile(source, "<candidate>", "exec")
            except BaseException:
                self.load_error = "LoadError"

    def handle(self, request: dict) -> dict:
        request_id = request.get("id")
        if self.load_error is not None:
            return {"id": request_id, "status": ERROR, "error_type": self.load_error}
        if self.task_kind == "function":
            return self._call_function(request_id, request.get("args", []))
        return self._run_script(request_id, request.get("stdin", ""))

    def _call_function(self, request_id, args) -> dict:
        old_stdin = sys.stdin
        sys.stdin = io.StringIO("")  # input() must never consume the wire
        try:
            with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()):
                result = self.entry(*args)
        except BaseException as exc:
            return {"id": request_id, "status": ERROR, "error_type": type(exc).__name__}
        finally:
            sys.stdin = old_stdin
        return {"id": request_id, "status": OK, "output": jsonable(result)}

    def _run_script(self, request_id, stdin_text) -> dict:
        captured = io.StringIO()
        old_stdin = sys.stdin
        sys.stdin = io.StringIO(stdin_text)
        try:
            with redirect_stdout(captured), redirect_stderr(io.StringIO()):
                exec(self.code, base_namespace())
        except SystemExit as exc:
            if exc.code not in (None, 0):
                return {"id": request_id, "status": ERROR, "error_type": "SystemExit"}
        except BaseException as exc:
            return {"id": request_id, "status": ERROR, "error_type": type(exc).__name__}
        finally:
            sys.stdin = old_stdin
        return {"id": request_id, "status": OK, "output": captured.getvalue().rstrip("\n")}


def serve(runner: CandidateRunner, stdin, proto_out) -> None:
    """One response line per request line, until EOF."""
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
            if not isinstance(request, dict):
                raise ValueError("request is not an object")
        except ValueError:
            response = {"id": None, "status": ERROR, "error_type": "ProtocolError"}
        else:
            response = runner.handle(request)
        proto_out.write(json.dumps(response, separators=(",", ":")) + "\n")
        proto_out.flush()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pyshim")
    parser.add_argument("candidate_file")
    parser.add_argument("--task-kind", choices=("function", "stdin"), required=True)
    parser.add_argument("--entry", default=None)
    args = parser.parse_args(argv)

    proto_out = sys.stdout
    sys.stdout = sys.__stdout__ = io.StringIO()  # keep stray prints off the wire

    with open(args.candidate_file, encoding="utf-8") as fh:
        source = fh.read()
    runner = CandidateRunner(source, args.task_kind, args.entry)

    sys.__stderr__.write('{"status": "ready"}\n')
    sys.__stderr__.flush()

    serve(runner, sys.stdin, proto_out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
