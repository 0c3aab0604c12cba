"""Protocol conformance for the execution shim.

Covers the golden transcripts, the one-response-per-request and
error-class-only invariants under a 10,000-request protocol fuzzer, request
order independence for pure candidates, and clean EOF exit.
"""

import json
import random
import re
import string
import subprocess
import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
TRANSCRIPTS = Path(__file__).parent / "transcripts"
WORKER = Path(__file__).parent.parent / "src" / "pyshim" / "worker.py"

# bare exception class name: no message text, no punctuation
CLASS_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def shim_command(candidate: Path, kind: str, entry: str | None) -> list[str]:
    cmd = [sys.executable, str(WORKER), str(candidate), "--task-kind", kind]
    if entry:
        cmd += ["--entry", entry]
    return cmd


def run_shim(candidate, kind, entry, stdin_text: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        shim_command(FIXTURES / candidate, kind, entry),
        input=stdin_text.encode(),
        capture_output=True,
        timeout=120,
    )


def test_golden_transcripts():
    cases = json.loads((TRANSCRIPTS / "cases.json").read_text())
    for name, case in cases.items():
        stdin_text = (TRANSCRIPTS / f"{name}.in").read_text()
        expected = (TRANSCRIPTS / f"{name}.out").read_bytes()
        proc = run_shim(case["candidate"], case["kind"], case["entry"], stdin_text)
        assert proc.returncode == 0, name
        assert proc.stdout == expected, (name, proc.stdout, expected)


def test_clean_eof_exits_zero():
    proc = run_shim("add_one.py", "function", "f", "")
    assert proc.returncode == 0
    assert proc.stdout == b""


def test_readiness_signal_on_stderr():
    proc = run_shim("add_one.py", "function", "f", "")
    first_line = proc.stderr.decode().splitlines()[0]
    assert json.loads(first_line) == {"status": "ready"}


def test_load_error_for_unparseable_candidate(tmp_path):
    bad = tmp_path / "bad.py"
    bad.write_text("def f(x:\n")
    proc = subprocess.run(
        shim_command(bad, "function", "f"),
        input=b'{"id":7,"args":[1]}\n',
        capture_output=True,
        timeout=60,
    )
    assert json.loads(proc.stdout) == {"id": 7, "status": "error", "error_type": "LoadError"}


def test_entry_point_not_found(tmp_path):
    ambiguous = tmp_path / "two.py"
    ambiguous.write_text("def a(x):\n    return 1\n\ndef b(x):\n    return 2\n")
    proc = subprocess.run(
        shim_command(ambiguous, "function", "nope"),
        input=b'{"id":1,"args":[1]}\n',
        capture_output=True,
        timeout=60,
    )
    assert json.loads(proc.stdout) == {
        "id": 1,
        "status": "error",
        "error_type": "EntryPointNotFound",
    }


def test_candidate_prints_never_reach_the_wire(tmp_path):
    noisy = tmp_path / "noisy.py"
    noisy.write_text(
        "import sys\n"
        "def f(x):\n"
        "    print('to stdout')\n"
        "    print('to stderr', file=sys.stderr)\n"
        "    return x\n"
    )
    proc = subprocess.run(
        shim_command(noisy, "function", "f"),
        input=b'{"id":1,"args":[3]}\n',
        capture_output=True,
        timeout=60,
    )
    lines = proc.stdout.decode().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0]) == {"id": 1, "status": "ok", "output": 3}


def _random_json_value(rng, depth=0):
    kind = rng.randrange(6 if depth < 2 else 4)
    if kind == 0:
        return rng.randint(-10**6, 10**6)
    if kind == 1:
        return rng.uniform(-100, 100)
    if kind == 2:
        return rng.choice([True, False, None])
    if kind == 3:
        return "".join(rng.choice(string.printable[:94]) for _ in range(rng.randint(0, 12)))
    if kind == 4:
        return [_random_json_value(rng, depth + 1) for _ in range(rng.randint(0, 4))]
    return {
        f"k{i}": _random_json_value(rng, depth + 1) for i in range(rng.randint(0, 3))
    }


def _fuzz_requests(rng, count, kind):
    requests = []
    for i in range(count):
        if kind == "function":
            requests.append({"id": i, "args": [_random_json_value(rng)]})
        else:
            text = "".join(rng.choice(string.ascii_letters + " \n") for _ in range(rng.randint(0, 40)))
            requests.append({"id": i, "stdin": text})
    return requests


def _exchange(proc, requests, batch=100):
    """Send requests in batches, reading each batch's responses before the
    next write, so neither side can block on a full pipe."""
    responses = []
    for start in range(0, len(requests), batch):
        chunk = requests[start : start + batch]
        payload = "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in chunk)
        proc.stdin.write(payload.encode())
        proc.stdin.flush()
        for _ in chunk:
            line = proc.stdout.readline()
            assert line.endswith(b"\n"), "response line missing newline"
            responses.append(json.loads(line))
    return responses


def _check_response(request, response, pure_echo: bool):
    assert set(response) in ({"id", "status", "output"}, {"id", "status", "error_type"})
    assert response["id"] == request["id"]
    assert response["status"] in ("ok", "error")
    if response["status"] == "error":
        assert CLASS_NAME.fullmatch(response["error_type"]), response["error_type"]
    elif pure_echo and "args" in request:
        assert response["output"] == request["args"][0]


@pytest.mark.parametrize(
    "candidate,kind,entry,count",
    [
        ("echo.py", "function", "probe", 10_000),
        ("echo_stdin.py", "stdin", None, 2_000),
    ],
)
def test_protocol_fuzzer_zero_violations(candidate, kind, entry, count):
    rng = random.Random(count)  # distinct but fixed seeds per variant
    requests = _fuzz_requests(rng, count, kind)
    proc = subprocess.Popen(
        shim_command(FIXTURES / candidate, kind, entry),
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        stderr=subprocess.DEVNULL,
    )
    try:
        responses = _exchange(proc, requests)
        proc.stdin.close()
        leftover = proc.stdout.read()
        assert leftover == b"", "unsolicited protocol lines after the last response"
        assert proc.wait(timeout=30) == 0
    finally:
        proc.kill()
    assert len(responses) == len(requests)  # exactly one response per request
    for request, response in zip(requests, responses):
        _check_response(request, response, pure_echo=(kind == "function"))


def test_pure_candidate_is_request_order_independent():
    rng = random.Random(4)
    requests = _fuzz_requests(rng, 50, "function")
    shuffled = list(requests)
    rng.shuffle(shuffled)

    def run_order(order):
        proc = subprocess.Popen(
            shim_command(FIXTURES / "echo.py", "function", "probe"),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
        )
        try:
            responses = _exchange(proc, order)
            proc.stdin.close()
            proc.wait(timeout=30)
        finally:
            proc.kill()
        return {r["id"]: r for r in responses}

    assert run_order(requests) == run_order(shuffled)


def test_malformed_request_gets_protocol_error_response():
    proc = subprocess.run(
        shim_command(FIXTURES / "add_one.py", "function", "f"),
        input=b'not json at all\n{"id":1,"args":[1]}\n',
        capture_output=True,
        timeout=60,
    )
    lines = [json.loads(l) for l in proc.stdout.splitlines()]
    assert len(lines) == 2  # still one response per request line
    assert lines[0] == {"id": None, "status": "error", "error_type": "ProtocolError"}
    assert lines[1] == {"id": 1, "status": "ok", "output": 2}


# --- entry resolution unit coverage (in-process) ---------------------------------


def test_resolve_entry_prefers_named_function():
    from pyshim.worker import base_namespace, resolve_entry

    ns = base_namespace()
    exec("def solve(x):\n    return x\n\ndef helper(y):\n    return y\n", ns)
    assert resolve_entry(ns, "solve")(5) == 5


def test_resolve_entry_solution_class():
    from pyshim.worker import base_namespace, resolve_entry

    ns = base_namespace()
    exec("class Solution:\n    def go(self, x):\n        return x * 2\n", ns)
    assert resolve_entry(ns, "go")(4) == 8
    assert resolve_entry(ns, None)(4) == 8  # single public method


def test_resolve_entry_single_function_fallback():
    from pyshim.worker import base_namespace, resolve_entry

    ns = base_namespace()
    exec("import math\n\ndef only(x):\n    return math.floor(x)\n", ns)
    # imported callables do not count as candidate functions
    assert resolve_entry(ns, "wrong_name")(2.7) == 2


def test_resolve_entry_ambiguous_returns_none():
    from pyshim.worker import base_namespace, resolve_entry

    ns = base_namespace()
    exec("def a(x):\n    return 1\n\ndef b(x):\n    return 2\n", ns)
    assert resolve_entry(ns, None) is None
