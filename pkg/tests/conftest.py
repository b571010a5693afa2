from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coarsekit.cayley import Presentation, generate_ball  # noqa: E402

_criteria: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, note: str = "") -> None:
    _criteria[number] = (ok, note)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok, note = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {note}")


@pytest.fixture(scope="session")
def constants() -> dict:
    return json.loads(resources.files("coarsekit").joinpath("data/constants.json").read_text())


@pytest.fixture(scope="session")
def f2():
    return Presentation.free(2)


@pytest.fixture(scope="session")
def f2_balls():
    cache: dict[int, object] = {}

    def get(r: int):
        if r not in cache:
            cache[r] = generate_ball(Presentation.free(2), r)
        return cache[r]

    return get
