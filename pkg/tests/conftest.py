import pytest

from codeuq.corpus import (
    CandidateProgram,
    Corpus,
    FunctionInterface,
    InputValue,
    StdinProgram,
    Task,
    write_corpus,
)

DOUBLER_OK = "def double(x):\n    return 2 * x\n"
DOUBLER_OFF_BY_ONE = "def double(x):\n    return 2 * x + 1\n"
DOUBLER_CRASHY = "def double(x):\n    return [1][x]\n"

SUM_LINE_OK = "print(sum(map(int, input().split())))"
SUM_LINE_WRONG = "print(max(map(int, input().split())))"


def build_fixture_corpus() -> Corpus:
    """Two function tasks and one stdin task with mixed candidate quality."""
    tasks = [
        Task(
            task_id="double",
            description="Return twice the integer x.",
            interface=FunctionInterface("double", (("x", "int"),), "int"),
            seed_inputs=(InputValue.args([1]), InputValue.args([5])),
            reference_tests=(
                (InputValue.args([2]), 4),
                (InputValue.args([3]), 6),
                (InputValue.args([10]), 20),
            ),
            difficulty="Easy",
        ),
        Task(
            task_id="agree",
            description="Identity function, everyone agrees.",
            interface=FunctionInterface("same", (("x", "int"),), "int"),
            seed_inputs=(InputValue.args([3]),),
            reference_tests=((InputValue.args([7]), 7),),
            difficulty="Medium",
        ),
        Task(
            task_id="sum_line",
            description="Print the sum of the integers on one stdin line.",
            interface=StdinProgram(),
            seed_inputs=(InputValue.stdin("1 2 3\n"), InputValue.stdin("10 20\n")),
            reference_tests=((InputValue.stdin("4 5\n"), "9"),),
            difficulty="Hard",
        ),
    ]
    candidates = []
    for rank, src in ((1, DOUBLER_OK), (2, DOUBLER_OK), (3, DOUBLER_OFF_BY_ONE), (4, DOUBLER_CRASHY)):
        candidates.append(CandidateProgram("double", rank, src))
    for rank in range(1, 5):
        candidates.append(CandidateProgram("agree", rank, "def same(x):\n    return x\n"))
    for rank, src in ((1, SUM_LINE_OK), (2, SUM_LINE_OK), (3, SUM_LINE_WRONG), (4, SUM_LINE_OK)):
        candidates.append(CandidateProgram("sum_line", rank, src))
    return Corpus(tasks=tasks, candidates=candidates)


@pytest.fixture
def fixture_corpus():
    return build_fixture_corpus()


@pytest.fixture
def corpus_dir(tmp_path):
    path = tmp_path / "corpus"
    write_corpus(build_fixture_corpus(), path)
    return path
