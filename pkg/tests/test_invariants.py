# tests/test_invariants.py
import pytest

from diagram_core import mirror, unknot
from errors import BudgetExceeded
from invariants import LOOP_VALUE, invariant_fingerprint, jones, kauffman_bracket, r1_factor
from laurent import LaurentPoly
from moves import r1_add

TREFOIL_BRACKET = "-A^-5 - A^3 + A^7"
TREFOIL_JONES = "-t^-4 + t^-3 + t^-1"
FIGURE_EIGHT_JONES = "t^-2 - t^-1 + 1 - t + t^2"


def test_trefoil_bracket_and_jones(trefoil):
    assert kauffman_bracket(trefoil).to_text() == TREFOIL_BRACKET
    assert jones(trefoil).to_text() == TREFOIL_JONES


def test_mirror_trefoil_jones(trefoil):
    assert jones(mirror(trefoil)) == jones(trefoil).mirror()


def test_figure_eight_is_amphichiral(figure_eight):
    assert jones(figure_eight).to_text() == FIGURE_EIGHT_JONES
    assert jones(mirror(figure_eight)) == jones(figure_eight)


def test_kink_and_circles(kink):
    assert kauffman_bracket(kink).to_text() == "-A^-3"
    assert jones(kink) == LaurentPoly.one("t")
    assert kauffman_bracket(unknot()) == LaurentPoly.one()
    assert kauffman_bracket(unknot(2)) == LOOP_VALUE


def test_hopf_bracket(hopf):
    assert kauffman_bracket(hopf).to_text() == "-A^-4 - A^4"
    assert jones(hopf).to_text() in ("-t^(1/2) - t^(5/2)", "-t^(-5/2) - t^(-1/2)")


def test_r1_factor_matches_kinks(trefoil):
    for sign in (1, -1):
        with_kink = r1_add(trefoil, sign=sign)
        assert kauffman_bracket(with_kink) == kauffman_bracket(trefoil) * r1_factor(sign)
        assert jones(with_kink) == jones(trefoil)


def test_budget_is_enforced(trefoil):
    with pytest.raises(BudgetExceeded) as info:
        kauffman_bracket(trefoil, budget=2)
    assert info.value.exit_code == 4


def test_parallel_state_sum_agrees(trefoil):
    d = trefoil
    for _ in range(9):
        d = r1_add(d, sign=1)
    assert d.crossing_count == 12
    serial = kauffman_bracket(d, workers=1)
    assert kauffman_bracket(d, workers=2) == serial
    assert serial == kauffman_bracket(trefoil) * r1_factor(1) ** 9


def test_fingerprint_mirror_identification(trefoil, figure_eight):
    left = invariant_fingerprint(trefoil, mirror_identify=True)
    right = invariant_fingerprint(mirror(trefoil), mirror_identify=True)
    assert left == right
    assert invariant_fingerprint(trefoil, mirror_identify=False) != invariant_fingerprint(
        mirror(trefoil), mirror_identify=False)
    assert left.key() != invariant_fingerprint(figure_eight).key()


def test_fingerprint_of_links(hopf, torus_link):
    fp = invariant_fingerprint(hopf)
    assert fp.components == 2
    assert fp.linking == (1,)
    assert invariant_fingerprint(torus_link).linking == (2,)
