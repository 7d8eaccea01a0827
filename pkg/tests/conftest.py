from pathlib import Path

import pytest

from tceer.topology import Position, Topology, dump_topology

ACCEPTANCE_LINES: list[str] = []


def write_layout(path, points, bs=(100.0, 100.0), radio_range=50.0, size=200.0) -> str:
    """Dump a hand-placed layout and return its path for ``topology_file``."""
    topo = Topology(tuple(Position(*p) for p in points), Position(*bs), radio_range, size, size)
    dump_topology(topo, path)
    return str(path)


@pytest.fixture
def layout(tmp_path):
    counter = iter(range(1000))

    def make(points, **kw):
        return write_layout(Path(tmp_path) / f"layout{next(counter)}.txt", points, **kw)

    return make


@pytest.fixture
def report():
    """Record a one-line acceptance verdict, echoed in the terminal summary."""

    def emit(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
