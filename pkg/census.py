# census.py - перепись связных простых диаграмм по числу перекрёстков
"""
Тень - связная 4-валентная плоская карта: дротики 0..4n-1, вершина v держит
дротики 4v..4v+3 против часовой стрелки, alpha - инволюция склейки рёбер.
Корневые карты строятся обходом в ширину: очередной свободный дротик либо
открывает новую вершину, либо склеивается со свободным дротиком той же
частичной грани (иначе вложение перестаёт быть плоским). Из корневых карт
остаются только те, чей код минимален по всем корням и обеим ориентациям.

Над/под на вершине - один бит: 0 означает, что верхняя нить проходит через
нечётные локальные слоты. Диаграммы дедуплицируются минимумом битового кода по
автоморфизмам тени, затем раскладываются по корзинам invariant_fingerprint.
Число корзин - только нижняя оценка числа классов зацеплений.
"""

import json
import logging
import multiprocessing as mp
import os
import tempfile
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import yaml

import config
from diagram_core import Diagram, build_diagram
from errors import BudgetExceeded, TableMismatch
from invariants import invariant_fingerprint
from structure import is_prime_diagram

logger = logging.getLogger(__name__)

Shadow = Tuple[int, ...]
Symmetry = Tuple[int, Tuple[int, ...], Tuple[int, ...]]

COLUMNS = ("n", "shadows", "prime_shadows", "diagrams", "buckets", "p_n", "P_n")


# === ГЕНЕРАЦИЯ ТЕНЕЙ ===

def _rotate_dart(x: int, step: int) -> int:
    return 4 * (x // 4) + (x % 4 + step) % 4


def _same_partial_face(alpha: List[int], p: int, q: int) -> bool:
    """Свободные дротики считаются неподвижными точками alpha"""
    x = p
    while True:
        y = alpha[x] if alpha[x] >= 0 else x
        x = _rotate_dart(y, 1)
        if x == q:
            return True
        if x == p:
            return False


def rooted_shadows(n: int) -> Iterator[Shadow]:
    """Все корневые связные плоские 4-валентные карты с n вершинами в BFS-нумерации"""
    alpha = [-1] * (4 * n)

    def grow(m: int) -> Iterator[Shadow]:
        p = next((x for x in range(4 * m) if alpha[x] < 0), None)
        if p is None:
            if m == n:
                yield tuple(alpha)
            return
        if m < n:
            alpha[p], alpha[4 * m] = 4 * m, p
            yield from grow(m + 1)
            alpha[p] = alpha[4 * m] = -1
        for q in range(p + 1, 4 * m):
            if alpha[q] < 0 and _same_partial_face(alpha, p, q):
                alpha[p], alpha[q] = q, p
                yield from grow(m)
                alpha[p] = alpha[q] = -1

    if n < 1:
        return
    yield from grow(1)


def _relabel(alpha: Shadow, root: int, orient: int,
             against: Optional[Shadow] = None) -> Tuple[int, Optional[Shadow], List[int]]:
    """BFS-код карты от корня root при обходе вершин в направлении orient.

    С against сравнивает на лету и выходит при первом расхождении:
    возвращает (знак сравнения, код или None, опорные дротики вершин).
    """
    size = len(alpha)
    refs = [root]
    order = {root // 4: 0}
    code: List[int] = []
    for i in range(size):
        v_new, k = divmod(i, 4)
        x = _rotate_dart(refs[v_new], orient * k)
        y = alpha[x]
        if y // 4 not in order:
            order[y // 4] = len(refs)
            refs.append(y)
        w = order[y // 4]
        val = 4 * w + (orient * (y % 4 - refs[w] % 4)) % 4
        if against is not None and val != against[i]:
            return (-1 if val < against[i] else 1), None, refs
        code.append(val)
    return 0, tuple(code), refs


def is_canonical_shadow(alpha: Shadow) -> bool:
    for root in range(len(alpha)):
        for orient in (1, -1):
            cmp, _, _ = _relabel(alpha, root, orient, against=alpha)
            if cmp < 0:
                return False
    return True


def canonical_shadow(alpha: Shadow) -> Shadow:
    """Минимальный код по всем корням и ориентациям"""
    best = None
    for root in range(len(alpha)):
        for orient in (1, -1):
            _, code, _ = _relabel(alpha, root, orient)
            if best is None or code < best:
                best = code
    return best


def shadows(n: int) -> List[Shadow]:
    """Тени с n вершинами с точностью до гомеоморфизмов сферы (включая отражения)"""
    return [a for a in rooted_shadows(n) if is_canonical_shadow(a)]


def shadow_symmetries(alpha: Shadow) -> List[Symmetry]:
    """Автоморфизмы канонической тени: (ориентация, старая вершина для новой, чётность опоры)"""
    out = []
    for root in range(len(alpha)):
        for orient in (1, -1):
            cmp, _, refs = _relabel(alpha, root, orient, against=alpha)
            if cmp == 0:
                out.append((orient, tuple(r // 4 for r in refs), tuple(r % 2 for r in refs)))
    return out


# === ДИАГРАММЫ НАД ТЕНЬЮ ===

def _allowed_flips(orient: int, mirror_identify: bool) -> Tuple[int, ...]:
    if mirror_identify:
        return (0, 1)
    # отражение плоскости вместе с заменой всех перекрёстков - поворот
    return (0,) if orient > 0 else (1,)


def canonical_bits(bits: Sequence[int], syms: Sequence[Symmetry], mirror_identify: bool) -> Tuple[int, ...]:
    best: Optional[Tuple[int, ...]] = None
    for orient, old_vertex, parity in syms:
        moved = [bits[old_vertex[v]] ^ parity[v] for v in range(len(bits))]
        for flip in _allowed_flips(orient, mirror_identify):
            cand = tuple(b ^ flip for b in moved)
            if best is None or cand < best:
                best = cand
    return best


def shadow_diagram(alpha: Shadow, bits: Optional[Sequence[int]] = None) -> Diagram:
    """Диаграмма по тени и битам над/под"""
    n = len(alpha) // 4
    bits = bits if bits is not None else (0,) * n
    label: Dict[int, int] = {}
    for x in range(len(alpha)):
        if x not in label:
            label[x] = label[alpha[x]] = len(label) // 2 + 1
    raw = []
    for v in range(n):
        tup = [label[4 * v + j] for j in range(4)]
        if bits[v]:
            tup = tup[1:] + tup[:1]
        raw.append(tup)
    return build_diagram(raw)


def _shadow_worker(args: Tuple[Shadow, bool, int]) -> List[Tuple[Tuple[int, ...], str]]:
    """Все неэквивалентные расстановки над/под для одной тени и их отпечатки"""
    alpha, mirror_identify, state_budget = args
    n = len(alpha) // 4
    syms = shadow_symmetries(alpha)
    out = []
    for mask in range(2 ** n):
        bits = tuple((mask >> v) & 1 for v in range(n))
        if canonical_bits(bits, syms, mirror_identify) != bits:
            continue
        fp = invariant_fingerprint(shadow_diagram(alpha, bits), mirror_identify, state_budget)
        out.append((bits, fp.key()))
    return out


# === ТАБЛИЦА ===

@dataclass(frozen=True)
class CensusRow:
    n: int
    shadows: int
    prime_shadows: int
    diagrams: int
    buckets: int
    p_n: int
    P_n: int

    def to_tsv(self) -> str:
        return "\t".join(str(getattr(self, c)) for c in COLUMNS)

    @classmethod
    def from_tsv(cls, line: str) -> "CensusRow":
        parts = line.rstrip("\n").split("\t")
        if len(parts) != len(COLUMNS):
            raise TableMismatch("Строка таблицы не той ширины", {"line": line.rstrip()})
        return cls(*(int(p) for p in parts))


@dataclass
class CensusTable:
    """Перепись: строки по n, провенанс и корзины отпечатков (ключ -> n первого появления).

    p_n - число корзин, впервые встреченных при n; P_n = p_1 + ... + p_n.
    Корзины - нижняя оценка числа классов, а не сами классы.
    """
    rows: List[CensusRow] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)
    buckets: Dict[str, int] = field(default_factory=dict)

    @property
    def p(self) -> List[int]:
        return [r.p_n for r in self.rows]

    @property
    def cumulative(self) -> List[int]:
        return [r.P_n for r in self.rows]

    def row(self, n: int) -> Optional[CensusRow]:
        return next((r for r in self.rows if r.n == n), None)

    def validate(self) -> List[str]:
        errors = []
        total = 0
        for i, r in enumerate(self.rows):
            if r.n != i + 1:
                errors.append(f"n={r.n}: строки должны идти подряд с n=1")
            total += r.p_n
            if r.P_n != total:
                errors.append(f"n={r.n}: P_n={r.P_n}, а сумма p_k={total}")
            if r.prime_shadows > r.shadows:
                errors.append(f"n={r.n}: простых теней больше, чем всех")
            if r.p_n > r.buckets:
                errors.append(f"n={r.n}: новых корзин больше, чем корзин")
        return errors

    def to_dict(self) -> Dict[str, Any]:
        return {
            "provenance": dict(self.provenance),
            "rows": [asdict(r) for r in self.rows],
            "buckets": dict(sorted(self.buckets.items())),
            "note": "buckets are a lower bound on distinct link classes",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)

    def to_text(self) -> str:
        header = yaml.safe_dump(self.provenance, sort_keys=True, allow_unicode=True).splitlines()
        lines = [f"# {h}" for h in header]
        lines.append("\t".join(COLUMNS))
        lines.extend(r.to_tsv() for r in self.rows)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CensusTable":
        header, body = [], []
        for line in text.splitlines():
            if line.startswith("#"):
                header.append(line[2:] if line.startswith("# ") else line[1:])
            elif line.strip():
                body.append(line)
        provenance = yaml.safe_load("\n".join(header)) or {}
        if not body or tuple(body[0].split("\t")) != COLUMNS:
            raise TableMismatch("Нет строки заголовка столбцов", {"expected": list(COLUMNS)})
        return cls(rows=[CensusRow.from_tsv(line) for line in body[1:]], provenance=provenance)

    @classmethod
    def load(cls, path: str) -> "CensusTable":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_text(f.read())

    def save(self, path: str) -> "CensusTable":
        """Дописывает таблицу: существующие строки сверяются, новые добавляются в конец"""
        merged = self
        if os.path.exists(path):
            old = CensusTable.load(path)
            for key in ("mirror_identify", "code_version"):
                if key in old.provenance and old.provenance.get(key) != self.provenance.get(key):
                    raise TableMismatch(
                        f"Параметр {key} сохранённой таблицы отличается",
                        {"stored": old.provenance.get(key), "current": self.provenance.get(key)},
                    )
            for r in self.rows:
                stored = old.row(r.n)
                if stored is not None and stored != r:
                    raise TableMismatch(f"Строка n={r.n} расходится с пересчётом",
                                        {"stored": asdict(stored), "computed": asdict(r)})
            extra = [r for r in self.rows if r.n > len(old.rows)]
            rows = old.rows + extra
            provenance = dict(self.provenance)
            provenance["n_max"] = max(r.n for r in rows) if rows else 0
            merged = CensusTable(rows=rows, provenance=provenance, buckets=self.buckets)
            logger.info(f"[CENSUS] {path}: сверено {len(old.rows)} строк, добавлено {len(extra)}")
        problems = merged.validate()
        if problems:
            raise TableMismatch("Таблица не согласована", {"problems": problems})
        write_atomic(path, merged.to_text())
        return merged


def write_atomic(path: str, text: str) -> None:
    """Запись через временный файл в той же папке и rename"""
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".uzel-", dir=folder)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


# === ПЕРЕПИСЬ ===

def enumerate_diagrams(n_max: int, mirror_identify: Optional[bool] = None, workers: Optional[int] = None,
                       budget: Optional[int] = None, state_budget: Optional[int] = None) -> CensusTable:
    mirror_identify = config.MIRROR_IDENTIFY if mirror_identify is None else mirror_identify
    workers = config.WORKERS if workers is None else workers
    budget = config.CENSUS_BUDGET if budget is None else budget
    state_budget = config.STATE_SUM_BUDGET if state_budget is None else state_budget
    if n_max > budget:
        raise BudgetExceeded(f"Перепись до n={n_max} превышает бюджет {budget}",
                             {"n_max": n_max, "budget": budget})

    table = CensusTable(provenance={
        "app": config.APP_NAME,
        "code_version": config.CODE_VERSION,
        "n_max": n_max,
        "mirror_identify": mirror_identify,
        "state_sum_budget": state_budget,
        "counts": "buckets are a lower bound on distinct link classes",
    })
    total = 0
    pool = mp.Pool(workers) if workers > 1 else None
    try:
        for n in range(1, n_max + 1):
            all_shadows = shadows(n)
            prime = [a for a in all_shadows if is_prime_diagram(shadow_diagram(a))[0]]
            tasks = [(a, mirror_identify, state_budget) for a in prime]
            results = pool.map(_shadow_worker, tasks) if pool else [_shadow_worker(t) for t in tasks]

            keys = set()
            diagrams = 0
            for res in results:
                diagrams += len(res)
                keys.update(k for _, k in res)
            new = sorted(k for k in keys if k not in table.buckets)
            for k in new:
                table.buckets[k] = n
            total += len(new)
            table.rows.append(CensusRow(n, len(all_shadows), len(prime), diagrams, len(keys), len(new), total))
            logger.info(f"[CENSUS] n={n}: теней {len(all_shadows)}, простых {len(prime)}, "
                        f"диаграмм {diagrams}, корзин {len(keys)} (новых {len(new)})")
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return table
