"""Built-in per-candidate execution driver.

Runs as a standalone script (never imported by the orchestrator's process):
loads one candidate program and answers JSON-lines requests on stdin with
one JSON-line response each on stdout.

    request:  {"id": k, "args": [...]}            function-style call
              {"id": k, "stdin": "..."}           run script with stdin text
    response: {"id": k, "status": "ok", "output": <JSON value or string>}
              {"id": k, "status": "error", "error_type": "<class name>"}

The protocol owns the real stdout; anything the candidate prints is captured
(stdin tasks) or discarded (function tasks).  Exceptions cross the wire as
the bare exception class name only: messages carry run-specific text such as
addresses and must never influence clustering.  Timeouts are enforced by the
orchestrator's external kill; this process keeps no timers.

Invocation: python _pyworker.py <candidate_file> --task-kind function|stdin
            [--entry NAME]
"""

import argparse
import io
import json
import sys
import typing
from contextlib import redirect_stderr, redirect_stdout


def _base_namespace():
    # LeetCode-style candidates use typing names without importing them.
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


def _resolve_entry(namespace, entry_name):
    """Find the callable to drive: named function, sole function, or a
    Solution class method.  Ambiguity resolves to None (EntryPointNotFound)."""
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


def _jsonable(value):
    try:
        json.dumps(value)
        return value
    except (TypeError, ValueError):
        return str(value)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("candidate_file")
    parser.add_argument("--task-kind", choices=("function", "stdin"), required=True)
    parser.add_argument("--entry", default=None)
    args = parser.parse_args()

    proto_out = sys.stdout
    sys.stdout = sys.__stdout__ = io.StringIO()  # candidates never see the wire

    def respond(obj):
        proto_out.write(json.dumps(obj, separators=(",", ":")) + "\n")
        proto_out.flush()

    with open(args.candidate_file, encoding="utf-8") as fh:
        source = fh.read()

    load_error = None
    entry = None
    code = None
    if args.task_kind == "function":
        namespace = _base_namespace()
        try:
            exec(compile(source, "<candidate>", "exec"), namespace)
        except BaseException:
            load_error = "LoadError"
        else:
            entry = _resolve_entry(namespace, args.entry)
            if entry is None:
                load_error = "EntryPointNotFound"
    else:
        try:
            code = compile(source, "<candidate>", "exec")
        except BaseException:
            load_error = "LoadError"

    # readiness handshake on stderr: lets the orchestrator exclude interpreter
    # startup and candidate load time from the per-input execution timeout
    # without adding unsolicited lines to the stdout protocol
    sys.__stderr__.write('{"status": "ready"}\n')
    sys.__stderr__.flush()

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
            request_id = request.get("id")
        except (ValueError, AttributeError):
            respond({"id": None, "status": "error", "error_type": "ProtocolError"})
            continue

        if load_error is not None:
            respond({"id": request_id, "status": "error", "error_type": load_error})
            continue

        if args.task_kind == "function":
            call_args = request.get("args", [])
            old_stdin = sys.stdin
            sys.stdin = io.StringIO("")  # input() must never touch the wire
            try:
                with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()):
                    result = entry(*call_args)
            except BaseException as exc:
                respond(
                    {"id": request_id, "status": "error", "error_type": type(exc).__name__}
                )
            else:
                respond({"id": request_id, "status": "ok", "output": _jsonable(result)})
            finally:
                sys.stdin = old_stdin
        else:
            stdin_text = request.get("stdin", "")
            captured = io.StringIO()
            namespace = _base_namespace()
            old_stdin = sys.stdin
            sys.stdin = io.StringIO(stdin_text)
            try:
                with redirect_stdout(captured), redirect_stderr(io.StringIO()):
                    exec(code, namespace)
            except SystemExit as exc:
                if exc.code in (None, 0):
                    respond({"id": request_id, "status": "ok", "output": captured.getvalue().rstrip("\n")})
                else:
                    respond({"id": request_id, "status": "error", "error_type": "SystemExit"})
            except BaseException as exc:
                respond(
                    {"id": request_id, "status": "error", "error_type": type(exc).__name__}
                )
            else:
                respond({"id": request_id, "status": "ok", "output": captured.getvalue().rstrip("\n")})
            finally:
                sys.stdin = old_stdin


if __name__ == "__main__":
    main()
