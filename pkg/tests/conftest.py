# tests/conftest.py - общие диаграммы и корень проекта в PYTHONPATH
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from diagram_core import parse_pd, unknot  # noqa: E402
from tests.diagrams import CINQUEFOIL, FIGURE_EIGHT, GRANNY, HOPF, KINK, TORUS_LINK_4, TREFOIL  # noqa: E402


@pytest.fixture
def trefoil():
    return parse_pd(TREFOIL)


@pytest.fixture
def figure_eight():
    return parse_pd(FIGURE_EIGHT)


@pytest.fixture
def cinquefoil():
    return parse_pd(CINQUEFOIL)


@pytest.fixture
def hopf():
    return parse_pd(HOPF)


@pytest.fixture
def torus_link():
    return parse_pd(TORUS_LINK_4)


@pytest.fixture
def kink():
    return parse_pd(KINK)


@pytest.fixture
def granny():
    return parse_pd(GRANNY)


@pytest.fixture
def circle():
    return unknot()
