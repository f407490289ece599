"""Shared fixtures: hand-built instances, the seeded random family used
by the safety suites, and the acceptance summary hook."""

from __future__ import annotations

import pathlib
import random

import pytest

from steinred.model import PcInstance

DATA = pathlib.Path(__file__).parent / "data"

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def data_file(name: str) -> str:
    return str(DATA / name)


def read_data(name: str) -> str:
    return (DATA / name).read_text()


def build_relay7() -> PcInstance:
    """Seven vertices; two prize-free hubs (3, 4) route five prized ones.

    Optimum 10 on {0, 1, 2, 3, 5, 6}: hub 4 is priced out once bounds
    reach it.
    """
    inst = PcInstance(7)
    for v in (0, 1, 2, 5, 6):
        inst.set_prize(v, 5.0)
    for u, v, c in [
        (0, 1, 3),
        (0, 2, 3),
        (3, 1, 3),
        (4, 2, 3),
        (0, 3, 2),
        (0, 4, 3),
        (3, 5, 1),
        (4, 6, 3),
        (5, 6, 1),
    ]:
        inst.add_edge(u, v, float(c))
    return inst


def build_encode4() -> PcInstance:
    """Four vertices, two prized; best solution is the big prize alone."""
    inst = PcInstance(4)
    inst.set_prize(0, 2.5)
    inst.set_prize(1, 7.0)
    inst.add_edge(0, 3, 1.1)
    inst.add_edge(1, 2, 0.6)
    inst.add_edge(2, 3, 1.5)
    return inst


def build_wheel() -> PcInstance:
    """Hub 0 with cheap spokes to 2, 4, 6 and a cost-2 outer ring.

    Prizes 4 on vertices 0, 1, 3, 5 and a small 0.5 on vertex 4. Both
    optima cost 8 and both contain vertex 4, because the spoke through
    it is cheaper than the rim detour by more than its prize.
    """
    inst = PcInstance(7)
    for v in (0, 1, 3, 5):
        inst.set_prize(v, 4.0)
    inst.set_prize(4, 0.5)
    for u, v, c in [
        (0, 2, 1),
        (0, 6, 1),
        (0, 4, 1),
        (2, 3, 2),
        (3, 4, 2),
        (4, 5, 2),
        (5, 6, 2),
        (1, 2, 2),
        (1, 6, 2),
    ]:
        inst.add_edge(u, v, float(c))
    return inst


def build_path3(costs=(2.0, 3.0), prizes=(4.0, 0.0, 6.0)) -> PcInstance:
    inst = PcInstance(3)
    for v, p in enumerate(prizes):
        inst.set_prize(v, p)
    inst.add_edge(0, 1, costs[0])
    inst.add_edge(1, 2, costs[1])
    return inst


def random_instance(seed: int, lo: int = 6, hi: int = 14, fix_some: bool = False) -> PcInstance:
    """The seeded family behind the safety suites: |V| in [lo, hi],
    edge probability in [0.3, 0.7], integer costs 1-10, prizes 0-10,
    redrawn until connected. ``fix_some`` fixes 1-3 prized vertices
    using an independent stream so the graph stays identical."""
    rng = random.Random(seed)
    n = rng.randint(lo, hi)
    p = rng.uniform(0.3, 0.7)
    while True:
        inst = PcInstance(n)
        for v in range(n):
            inst.prizes[v] = float(rng.randint(0, 10))
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < p:
                    inst.add_edge(u, v, float(rng.randint(1, 10)))
        if len(inst.components()) == 1:
            break
    if fix_some:
        pots = [v for v in range(n) if inst.prizes[v] > 0]
        if pots:
            rng2 = random.Random(seed + 77)
            for v in rng2.sample(pots, min(len(pots), rng2.randint(1, 3))):
                inst.fix_vertex(v)
    return inst


@pytest.fixture
def relay7() -> PcInstance:
    return build_relay7()


@pytest.fixture
def encode4() -> PcInstance:
    return build_encode4()


@pytest.fixture
def wheel() -> PcInstance:
    return build_wheel()
