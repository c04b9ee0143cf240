# invariants.py - скобка Кауффмана, многочлен Джонса и отпечаток для дедупликации
"""
Скобка считается полной суммой по 2^n состояниям. A-сглаживание соединяет слоты
(0,1) и (2,3), B-сглаживание - (0,3) и (1,2). Петли считаются системой
непересекающихся множеств с откатом, поэтому перебор идёт обходом в глубину.
"""

import logging
import multiprocessing as mp
from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import config
from diagram_core import Diagram, linking_matrix, writhe
from errors import BudgetExceeded
from laurent import LaurentPoly

logger = logging.getLogger(__name__)

# d = -A^2 - A^-2
LOOP_VALUE = LaurentPoly.from_terms({2: -1, -2: -1})

_A_PAIRS = ((0, 1), (2, 3))
_B_PAIRS = ((0, 3), (1, 2))


class _RollbackUnionFind:
    """Объединение по рангу без сжатия путей, чтобы каждое слияние можно было отменить"""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size
        self.classes = size
        self.history: List[Optional[Tuple[int, int, bool]]] = []

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            self.history.append(None)
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        bumped = self.rank[ra] == self.rank[rb]
        self.parent[rb] = ra
        if bumped:
            self.rank[ra] += 1
        self.classes -= 1
        self.history.append((ra, rb, bumped))

    def undo(self) -> None:
        step = self.history.pop()
        if step is None:
            return
        ra, rb, bumped = step
        self.parent[rb] = rb
        if bumped:
            self.rank[ra] -= 1
        self.classes += 1


def _index_crossings(crossings: Sequence[Sequence[int]]) -> Tuple[List[Tuple[int, ...]], int]:
    index: Dict[int, int] = {}
    out = []
    for tup in crossings:
        out.append(tuple(index.setdefault(x, len(index)) for x in tup))
    return out, len(index)


def _state_counts(crossings: Sequence[Tuple[int, ...]], size: int,
                  prefix: Sequence[int] = ()) -> Counter:
    """Счётчик состояний по ключу (число A минус число B, число петель)"""
    uf = _RollbackUnionFind(size)
    counts: Counter = Counter()
    n = len(crossings)
    balance = 0
    for c, choice in enumerate(prefix):
        pairs = _A_PAIRS if choice > 0 else _B_PAIRS
        for s, t in pairs:
            uf.union(crossings[c][s], crossings[c][t])
        balance += choice

    def descend(c: int, bal: int) -> None:
        if c == n:
            counts[(bal, uf.classes)] += 1
            return
        tup = crossings[c]
        for pairs, step in ((_A_PAIRS, 1), (_B_PAIRS, -1)):
            for s, t in pairs:
                uf.union(tup[s], tup[t])
            descend(c + 1, bal + step)
            uf.undo()
            uf.undo()

    descend(len(prefix), balance)
    return counts


def _prefix_worker(args: Tuple[List[Tuple[int, ...]], int, Tuple[int, ...]]) -> Counter:
    crossings, size, prefix = args
    return _state_counts(crossings, size, prefix)


def kauffman_bracket(d: Diagram, budget: Optional[int] = None,
                     workers: Optional[int] = None) -> LaurentPoly:
    """Ненормированная скобка <D>; <круг> = 1"""
    budget = config.STATE_SUM_BUDGET if budget is None else budget
    workers = config.WORKERS if workers is None else workers
    n = d.crossing_count
    if n > budget:
        raise BudgetExceeded(
            f"Сумма по состояниям на {n} перекрёстках превышает бюджет {budget}",
            {"crossings": n, "budget": budget},
        )
    if n == 0:
        return LOOP_VALUE ** (d.loops - 1) if d.loops > 0 else LaurentPoly.one()

    crossings, size = _index_crossings(d.crossings)
    if workers > 1 and n >= 12:
        depth = min(n, max(1, (workers - 1).bit_length() + 2))
        prefixes = [tuple(1 if (mask >> i) & 1 else -1 for i in range(depth)) for mask in range(2 ** depth)]
        logger.info(f"[BRACKET] {n} перекрёстков, {len(prefixes)} префиксов на {workers} процессах")
        with mp.Pool(workers) as pool:
            parts = pool.map(_prefix_worker, [(crossings, size, p) for p in prefixes])
        counts: Counter = Counter()
        for part in parts:
            counts.update(part)
    else:
        counts = _state_counts(crossings, size)

    result = LaurentPoly()
    loop_powers: Dict[int, LaurentPoly] = {}
    for (bal, classes), mult in sorted(counts.items()):
        loops = classes + d.loops
        if loops not in loop_powers:
            loop_powers[loops] = LOOP_VALUE ** (loops - 1)
        result = result + loop_powers[loops].shift(bal) * mult
    logger.debug(f"[BRACKET] {n} перекрёстков -> {result}")
    return result


def r1_factor(sign: int) -> LaurentPoly:
    """Множитель скобки при добавлении петли знака sign: (-A^3)^sign"""
    return LaurentPoly.monomial(3 * sign, -1)


def jones_from_bracket(bracket: LaurentPoly, w: int) -> LaurentPoly:
    """(-A^3)^(-w) <D> с подстановкой A = t^(-1/4)"""
    normalized = bracket * (LaurentPoly.monomial(3, -1) ** (-w))
    return LaurentPoly.from_terms({-e: c for e, c in normalized.terms}, "t", 4 * normalized.unit)


def jones(d: Diagram, budget: Optional[int] = None, workers: Optional[int] = None) -> LaurentPoly:
    return jones_from_bracket(kauffman_bracket(d, budget, workers), writhe(d))


@dataclass(frozen=True)
class Fingerprint:
    """Грубый инвариант для предварительной дедупликации; совпадение не означает эквивалентности"""
    components: int
    linking: Tuple[int, ...]
    jones: str

    def to_dict(self) -> Dict[str, Any]:
        return {"components": self.components, "linking": list(self.linking), "jones": self.jones}

    def key(self) -> str:
        return f"{self.components}|{','.join(map(str, self.linking))}|{self.jones}"


def invariant_fingerprint(d: Diagram, mirror_identify: Optional[bool] = None,
                          budget: Optional[int] = None) -> Fingerprint:
    mirror_identify = config.MIRROR_IDENTIFY if mirror_identify is None else mirror_identify
    lm = linking_matrix(d)
    k = lm.components
    linking = tuple(sorted(abs(lm.lk(i, j)) for i in range(k) for j in range(i + 1, k)))
    poly = jones(d, budget)
    text = poly.to_text()
    if mirror_identify:
        text = min(text, poly.mirror().to_text())
    return Fingerprint(components=k, linking=linking, jones=text)
