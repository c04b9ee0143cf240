# bounds.py - точная проверка числовых оценок на рациональных числах
"""
Все неравенства считаются во Fraction. Корни убираются возведением в квадрат
(обе стороны заранее проверяются на положительность), дробные степени -
возведением обеих сторон в знаменатель показателя.
"""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Union

from census import CensusTable
from errors import LengthMismatch, XOutOfRange

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction, str]

BASE = Fraction(104, 10)
SUNDBERG = Fraction(614, 100)
LACKENBY = 152
REGULAR = Fraction(58, 10)


@dataclass
class BoundCheck:
    name: str
    statement: str
    lhs: Fraction
    rhs: Fraction
    relation: str
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "statement": self.statement,
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "relation": self.relation,
            "passed": self.passed,
        }


_RELATIONS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass
class BoundReport:
    checks: List[BoundCheck] = field(default_factory=list)
    values: Dict[str, Fraction] = field(default_factory=dict)

    def add(self, name: str, statement: str, lhs: Rational, relation: str, rhs: Rational) -> BoundCheck:
        lhs, rhs = Fraction(lhs), Fraction(rhs)
        check = BoundCheck(name, statement, lhs, rhs, relation, _RELATIONS[relation](lhs, rhs))
        self.checks.append(check)
        if not check.passed:
            logger.warning(f"[BOUNDS] не выполнено: {name}: {statement}")
        return check

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> List[BoundCheck]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> Optional[BoundCheck]:
        return next((c for c in self.checks if c.name == name), None)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "values": {k: str(v) for k, v in sorted(self.values.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)


def power_bound(base: Rational, x: Rational, bound: Rational) -> bool:
    """base^x < bound для положительных base, bound и рационального x"""
    base, x, bound = Fraction(base), Fraction(x), Fraction(bound)
    if base <= 0 or bound <= 0:
        raise ValueError("Основание и граница должны быть положительны")
    return base ** x.numerator < bound ** x.denominator


def _sqrt_plus_less(radicand: int, shift: int, scale: int, bound: Fraction) -> bool:
    """(sqrt(radicand) + shift) / scale < bound"""
    rhs = bound * scale - shift
    return rhs > 0 and radicand < rhs * rhs


def evaluate_constants(c_max: int = 20) -> BoundReport:
    report = BoundReport()

    # (sqrt(13681) + 91) / 20 < 10.4  <=>  13681 < 117^2
    rhs = BASE * 20 - 91
    report.add("stoimenow_growth", "(sqrt(13681)+91)/20 < 10.4  <=>  13681 < (208-91)^2", 13681, "<", rhs * rhs)
    # (sqrt(21001) + 101) / 40 > 6.14  <=>  21001 > 144.6^2
    rhs = SUNDBERG * 40 - 101
    report.add("sundberg_growth", "(sqrt(21001)+101)/40 > 6.14  <=>  21001 > (245.6-101)^2", 21001, ">", rhs * rhs)
    report.values["stoimenow_bound"] = BASE
    report.values["sundberg_bound"] = SUNDBERG

    for c in range(1, c_max + 1):
        report.add(f"prime_density_c{c}",
                   f"1/(1+10.4^{6 * c}) > 10^-{7 * c}  <=>  10^{7 * c} > 1 + 10.4^{6 * c}",
                   Fraction(10) ** (7 * c), ">", 1 + BASE ** (6 * c))
    for c in range(6, c_max + 1):
        report.add(f"composite_density_c{c}",
                   f"1/(1+10.4^{6 * (4 * c + 1)}) > 10^-{26 * c}",
                   Fraction(10) ** (26 * c), ">", 1 + BASE ** (6 * (4 * c + 1)))
        report.add(f"composite_exponent_c{c}", f"24*{c}+6 <= 25*{c}", 24 * c + 6, "<=", 25 * c)
        report.add(f"composite_chain_c{c}",
                   f"1/(1+10.4^{25 * c}) >= 10^-{26 * c}",
                   Fraction(10) ** (26 * c), ">=", 1 + BASE ** (25 * c))

    report.add("trefoil_threshold", "1/(1+10.4^18) > 10^-19", Fraction(10) ** 19, ">", 1 + BASE ** 18)
    report.add("regular_growth", "10.4^(3/4) < 5.8  <=>  10.4^3 < 5.8^4", BASE ** 3, "<", REGULAR ** 4)
    report.add("regular_rarity", "5.8 < 6.14", REGULAR, "<", SUNDBERG)
    logger.info(f"[BOUNDS] проверено {len(report.checks)} неравенств, все верны: {report.passed}")
    return report


def satellite_recursion_check(table: Union[CensusTable, Sequence[int]], cr_k: int,
                             s_counts: Sequence[int], n_counts: Sequence[int]) -> BoundReport:
    """Проверка S_{n+6c} >= P_n - S_n - N_n по рядам, начинающимся с n=1.

    В values кладётся min P_{n+6c}/P_n по доступным n (конечная замена нижнего
    предела) и следующая из него оценка 1/(1 + отношение).
    """
    cumulative = table.cumulative if isinstance(table, CensusTable) else list(table)
    if len(s_counts) != len(cumulative) or len(n_counts) != len(cumulative):
        raise LengthMismatch(
            "Ряды S_n и N_n должны быть той же длины, что и P_n",
            {"P": len(cumulative), "S": len(s_counts), "N": len(n_counts)},
        )
    if cr_k < 1:
        raise LengthMismatch("Число перекрёстков компаньона должно быть положительным", {"cr_k": cr_k})
    shift = 6 * cr_k
    report = BoundReport()
    ratios = []
    for i in range(len(cumulative) - shift):
        n = i + 1
        report.add(f"recursion_n{n}", f"S_{n + shift} >= P_{n} - S_{n} - N_{n}",
                   s_counts[i + shift], ">=", cumulative[i] - s_counts[i] - n_counts[i])
        if cumulative[i] > 0:
            ratios.append(Fraction(cumulative[i + shift], cumulative[i]))
    if ratios:
        ratio = min(ratios)
        report.values["ratio"] = ratio
        report.values["implied_bound"] = 1 / (1 + ratio)
    threshold = 1 / (1 + BASE ** shift)
    report.values["threshold"] = threshold
    report.add("threshold", f"1/(1+10.4^{shift}) > 10^-{7 * cr_k}", threshold, ">", Fraction(1, 10 ** (7 * cr_k)))
    if cr_k == 3:
        report.add("threshold_trefoil", "1/(1+10.4^18) > 10^-19", threshold, ">", Fraction(1, 10 ** 19))
    return report


def regularity_budget(card: int, x: Rational) -> Fraction:
    """Верхняя оценка card/(152*x) числа не x-регулярных узлов"""
    x = Fraction(x)
    if not 0 < x <= 1:
        raise XOutOfRange(f"x={x} вне (0, 1]", {"x": str(x)})
    if card < 0:
        raise XOutOfRange("Мощность не может быть отрицательной", {"card": card})
    return Fraction(card) / (LACKENBY * x)


def lackenby_check(factor_crossings: Sequence[int], composite_cr: int) -> bool:
    """(cr(K_1)+...+cr(K_n))/152 <= cr(K_1 # ... # K_n); справа число перекрёстков диаграммы суммы"""
    return Fraction(sum(factor_crossings), LACKENBY) <= composite_cr


def x_regular_instance(x: Rational, cr_p: int, cr_k: int) -> bool:
    return Fraction(x) * cr_p <= cr_k
