import functools

import numpy as np
import pytest

from semcomm import Dmc, KnowledgeBase, ProbVector

# Registry for the acceptance gate: each tagged test reports one verdict
# line in the terminal summary, so a full run ends with a per-criterion
# PASS/FAIL table regardless of where in the output the tests scrolled by.
ACCEPTANCE_LABELS: dict[int, str] = {}
ACCEPTANCE_RESULTS: dict[int, str] = {}


def criterion(num: int, label: str):
    def deco(fn):
        ACCEPTANCE_LABELS[num] = label

        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                ACCEPTANCE_RESULTS[num] = "FAIL"
                raise
            ACCEPTANCE_RESULTS[num] = "PASS"

        return wrapper

    return deco


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LABELS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_LABELS):
        verdict = ACCEPTANCE_RESULTS.get(num, "NOT RUN")
        terminalreporter.write_line(
            f"ACCEPTANCE {num:02d} {verdict:7s} {ACCEPTANCE_LABELS[num]}"
        )


@pytest.fixture
def student_px() -> ProbVector:
    """Three-student source with H(X) = 1.5 bits."""
    return ProbVector(("alice", "bob", "cindy"), [0.25, 0.5, 0.25])


@pytest.fixture
def kb_uniform(student_px) -> KnowledgeBase:
    """Knowledge base mapping every student to three equally likely readings."""
    return KnowledgeBase(
        student_px.labels,
        ("called-on", "praised", "warned"),
        np.full((3, 3), 1.0 / 3.0),
    )


@pytest.fixture
def kb_willingness(student_px) -> KnowledgeBase:
    """Two-meaning knowledge base with p(agree) = 3/4 under student_px."""
    return KnowledgeBase(
        student_px.labels,
        ("agree", "disagree"),
        np.array([[0.9, 0.1], [0.8, 0.2], [0.5, 0.5]]),
    )


def random_dmc(gen: np.random.Generator, n_in: int, n_out: int) -> Dmc:
    return Dmc(
        tuple(str(i) for i in range(n_in)),
        tuple(str(j) for j in range(n_out)),
        gen.dirichlet(np.ones(n_out), size=n_in),
    )
