# tests/test_bounds.py
from fractions import Fraction

import pytest

from bounds import (
    BoundReport,
    evaluate_constants,
    lackenby_check,
    power_bound,
    regularity_budget,
    satellite_recursion_check,
    x_regular_instance,
)
from census import CensusTable, enumerate_diagrams
from errors import LengthMismatch, XOutOfRange


def test_all_constants_hold():
    report = evaluate_constants()
    assert report.passed, [c.name for c in report.failed()]
    assert len(report.checks) == 2 + 20 + 3 * 15 + 3
    assert report.check("stoimenow_growth").rhs == 117 ** 2
    assert report.check("trefoil_threshold").passed


def test_constants_are_exact_strings():
    data = evaluate_constants(c_max=6).to_dict()
    check = next(c for c in data["checks"] if c["name"] == "sundberg_growth")
    assert check["lhs"] == "21001"
    assert Fraction(check["rhs"]) == Fraction(1446, 10) ** 2


def test_recursion_on_synthetic_series():
    cumulative = [2 ** n for n in range(1, 8)]
    zeros = [0] * len(cumulative)
    report = satellite_recursion_check(cumulative, 1, zeros, zeros)
    assert report.values["ratio"] == 64
    assert report.values["implied_bound"] == Fraction(1, 65)
    assert not report.check("recursion_n1").passed
    assert report.check("threshold").passed
    assert not report.passed


def test_recursion_holds_when_satellites_fill_the_gap():
    cumulative = [2 ** n for n in range(1, 8)]
    s_counts = [0] * 6 + [2]
    report = satellite_recursion_check(cumulative, 1, s_counts, [0] * 7)
    assert report.passed


def test_recursion_needs_equal_lengths():
    with pytest.raises(LengthMismatch):
        satellite_recursion_check([1, 2, 3], 1, [0, 0], [0, 0, 0])


def test_trefoil_threshold_for_three_crossings():
    report = satellite_recursion_check([1, 2, 3], 3, [0] * 3, [0] * 3)
    assert report.check("threshold_trefoil").passed
    assert "ratio" not in report.values


def test_recursion_reads_census_tables():
    table = enumerate_diagrams(2, workers=1)
    report = satellite_recursion_check(table, 1, [0, 0], [0, 0])
    assert isinstance(table, CensusTable)
    assert isinstance(report, BoundReport)
    assert report.check("threshold").passed


def test_regularity_budget():
    assert regularity_budget(114, Fraction(3, 4)) == 1
    assert regularity_budget(152, 1) == 1
    assert regularity_budget(0, "1/2") == 0
    for bad in (0, Fraction(3, 2), -1):
        with pytest.raises(XOutOfRange):
            regularity_budget(10, bad)


def test_lackenby_check():
    assert lackenby_check([3, 3], 6)
    assert lackenby_check([152], 1)
    assert not lackenby_check([304], 1)


def test_power_bound_and_regular_instances():
    assert power_bound("10.4", Fraction(3, 4), "5.8")
    assert not power_bound("10.4", 1, "5.8")
    with pytest.raises(ValueError):
        power_bound(0, 1, 1)
    assert x_regular_instance(Fraction(1, 2), 10, 5)
    assert not x_regular_instance(Fraction(1, 2), 10, 4)
