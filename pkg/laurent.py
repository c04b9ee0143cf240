# laurent.py - точные многочлены Лорана от одной переменной
"""
LaurentPoly хранит пары (показатель, коэффициент) с целыми коэффициентами.
Показатель записан в долях 1/unit: при unit=2 значение 3 означает t^(3/2).
Это нужно для многочлена Джонса зацеплений с чётным числом компонент.
"""

import json
import logging
from dataclasses import dataclass
from math import gcd
from typing import Any, Dict, Iterable, Mapping, Tuple, Union

import sympy as sp

logger = logging.getLogger(__name__)

Number = Union[int, "LaurentPoly"]


@dataclass(frozen=True)
class LaurentPoly:
    terms: Tuple[Tuple[int, int], ...] = ()
    variable: str = "A"
    unit: int = 1

    # --- конструкторы ---

    @classmethod
    def from_terms(cls, terms: Union[Mapping[int, int], Iterable[Tuple[int, int]]],
                   variable: str = "A", unit: int = 1) -> "LaurentPoly":
        """Сложение одинаковых степеней, удаление нулей, сокращение unit"""
        acc: Dict[int, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for exp, coef in items:
            acc[exp] = acc.get(exp, 0) + int(coef)
        clean = {e: c for e, c in acc.items() if c != 0}
        if unit > 1:
            g = unit
            for e in clean:
                g = gcd(g, e)
            if g > 1:
                clean = {e // g: c for e, c in clean.items()}
                unit //= g
        return cls(tuple(sorted(clean.items())), variable, unit)

    @classmethod
    def one(cls, variable: str = "A") -> "LaurentPoly":
        return cls(((0, 1),), variable, 1)

    @classmethod
    def monomial(cls, exp: int, coef: int = 1, variable: str = "A", unit: int = 1) -> "LaurentPoly":
        return cls.from_terms({exp: coef}, variable, unit)

    # --- доступ ---

    def as_dict(self) -> Dict[int, int]:
        return dict(self.terms)

    def coefficient(self, exp: int) -> int:
        return self.as_dict().get(exp, 0)

    @property
    def span(self) -> int:
        if not self.terms:
            return 0
        return self.terms[-1][0] - self.terms[0][0]

    # --- арифметика ---

    def _lift(self, unit: int) -> Dict[int, int]:
        k = unit // self.unit
        return {e * k: c for e, c in self.terms}

    def _common(self, other: "LaurentPoly") -> Tuple[Dict[int, int], Dict[int, int], int]:
        if self.variable != other.variable and self.terms and other.terms:
            if not (self.is_constant() or other.is_constant()):
                raise ValueError(f"Разные переменные: {self.variable} и {other.variable}")
        unit = self.unit * other.unit // gcd(self.unit, other.unit)
        return self._lift(unit), other._lift(unit), unit

    def is_constant(self) -> bool:
        return all(e == 0 for e, _ in self.terms)

    def _var(self, other: "LaurentPoly") -> str:
        if self.is_constant() and not other.is_constant():
            return other.variable
        return self.variable

    def _coerce(self, other: Number) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, int):
            return LaurentPoly.from_terms({0: other}, self.variable)
        return NotImplemented

    def __add__(self, other: Number) -> "LaurentPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, unit = self._common(other)
        for e, c in b.items():
            a[e] = a.get(e, 0) + c
        return LaurentPoly.from_terms(a, self._var(other), unit)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(tuple((e, -c) for e, c in self.terms), self.variable, self.unit)

    def __sub__(self, other: Number) -> "LaurentPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Number) -> "LaurentPoly":
        return (-self) + other

    def __mul__(self, other: Number) -> "LaurentPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, unit = self._common(other)
        out: Dict[int, int] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly.from_terms(out, self._var(other), unit)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentPoly":
        if k < 0:
            if len(self.terms) != 1 or abs(self.terms[0][1]) != 1:
                raise ValueError("Отрицательная степень определена только для мономов ±x^e")
            (e, c), = self.terms
            return LaurentPoly.from_terms({-e * -k: c ** -k}, self.variable, self.unit)
        result = LaurentPoly.one(self.variable)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def shift(self, k: int) -> "LaurentPoly":
        """Умножение на x^(k/unit)"""
        return LaurentPoly.from_terms({e + k: c for e, c in self.terms}, self.variable, self.unit)

    def mirror(self) -> "LaurentPoly":
        """Подстановка x -> x^-1"""
        return LaurentPoly.from_terms({-e: c for e, c in self.terms}, self.variable, self.unit)

    # --- текст и sympy ---

    def _exp_text(self, e: int) -> str:
        if e % self.unit == 0:
            v = e // self.unit
            if v == 1:
                return self.variable
            return f"{self.variable}^{v}"
        return f"{self.variable}^({e}/{self.unit})"

    def to_text(self) -> str:
        """Канонический вид по возрастанию степеней: -A^-5 - A^3 + A^7"""
        if not self.terms:
            return "0"
        parts = []
        for i, (e, c) in enumerate(self.terms):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if e == 0:
                body = str(mag)
            elif mag == 1:
                body = self._exp_text(e)
            else:
                body = f"{mag}*{self._exp_text(e)}"
            if i == 0:
                parts.append(body if sign == "+" else f"-{body}")
            else:
                parts.append(f"{sign} {body}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.to_text()

    def symbol(self) -> sp.Symbol:
        return sp.Symbol(self.variable)

    def to_sympy(self) -> sp.Expr:
        x = self.symbol()
        return sp.Add(*[c * x ** sp.Rational(e, self.unit) for e, c in self.terms])

    @classmethod
    def from_sympy(cls, expr: sp.Expr, variable: str = "A") -> "LaurentPoly":
        x = sp.Symbol(variable)
        expr = sp.expand(sp.sympify(expr))
        exps: Dict[sp.Rational, int] = {}
        for mono, coef in expr.as_coefficients_dict().items():
            if not coef.is_integer:
                raise ValueError(f"Нецелый коэффициент {coef}")
            if mono == 1:
                e = sp.Integer(0)
            else:
                base, e = mono.as_base_exp()
                if base != x:
                    raise ValueError(f"Моном {mono} не от переменной {variable}")
            e = sp.Rational(e)
            exps[e] = exps.get(e, 0) + int(coef)
        unit = 1
        for e in exps:
            unit = unit * e.q // gcd(unit, e.q)
        return cls.from_terms({int(e * unit): c for e, c in exps.items()}, variable, unit)

    @classmethod
    def from_text(cls, text: str, variable: str = "A") -> "LaurentPoly":
        x = sp.Symbol(variable)
        return cls.from_sympy(sp.sympify(text, locals={variable: x}), variable)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variable": self.variable,
            "unit": self.unit,
            "terms": [[e, c] for e, c in self.terms],
            "text": self.to_text(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LaurentPoly":
        return cls.from_terms([(int(e), int(c)) for e, c in data["terms"]],
                              data.get("variable", "A"), int(data.get("unit", 1)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)
