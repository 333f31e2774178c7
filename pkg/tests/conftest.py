import os
import sys

import pytest

HERE = os.path.dirname(__file__)
sys.path.insert(0, HERE)

from elcq.answer import prepare  # noqa: E402
from elcq.kb_text import parse_kb, parse_query  # noqa: E402


def data(name: str) -> str:
    return os.path.join(HERE, "data", name)


def load_kb(name):
    with open(data(name), encoding="utf-8") as fh:
        return parse_kb(fh.read())


def load_query(name):
    with open(data(name), encoding="utf-8") as fh:
        return parse_query(fh.read())


@pytest.fixture(scope="session")
def running_kb():
    return load_kb("running.kb")


@pytest.fixture(scope="session")
def kb_store(running_kb):
    return prepare(running_kb)


@pytest.fixture(scope="session")
def fork_q():
    return load_query("fork.q")


@pytest.fixture(scope="session")
def split_q():
    return load_query("split.q")


# one line per acceptance criterion, filled in by test_acceptance and echoed at the end
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
