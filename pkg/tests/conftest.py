import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from polysplay import diagram as dg  # noqa: E402
from polysplay import splaying as sp  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "polysplay" / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def hopf():
    return dg.load_diagram(DATA / "hopf_basic.diagram")


@pytest.fixture(scope="session")
def hopf_bordered():
    return dg.load_diagram(DATA / "hopf_bordered.diagram")


@pytest.fixture(scope="session")
def s3():
    return dg.load_diagram(DATA / "s3_genus1.diagram")


@pytest.fixture(scope="session")
def torus_parallel():
    return dg.load_diagram(DATA / "torus_parallel.diagram")


@pytest.fixture(scope="session")
def splay_mm_lm(hopf):
    return sp.splay_full(hopf, sp.parse_stab(hopf).with_iotas(["mm", "lm"]))


@pytest.fixture(scope="session")
def splay_mm_lm_mm(hopf):
    return sp.splay_full(hopf, sp.parse_stab(hopf).with_iotas(["mm", "lm", "mm"]))


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
