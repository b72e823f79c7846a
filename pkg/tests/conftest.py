from pathlib import Path

import pytest

import l2approx
from l2approx.groupring import GroupRingElement, GroupRingMatrix, laurent
from l2approx.groups import FreeAbelianGroup

DATA = Path(l2approx.__file__).parent / "data"

Z = FreeAbelianGroup(1)
Z2 = FreeAbelianGroup(2)


def t(n: int = 1) -> GroupRingElement:
    return GroupRingElement.monomial(Z, (n,))


def lmat(*rows) -> GroupRingMatrix:
    """Matrix over Q[Z] from rows of ``{exponent: coefficient}`` dicts."""
    return GroupRingMatrix.from_rows(Z, [[laurent(Z, c) for c in r] for r in rows])


@pytest.fixture
def data_dir() -> Path:
    return DATA


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
