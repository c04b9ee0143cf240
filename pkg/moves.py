# moves.py - ходы Рейдемейстера, нормализация writhe и сокращение удвоенных петель
"""
Все ходы - чистые функции Diagram -> Diagram. Метки рёбер сохраняются, новые рёбра
получают метки больше текущего максимума. Каждый применённый ход пишется в
MoveTrace, который воспроизводится через replay().

Виды записей: R1+ / R1- (добавить / убрать петлю), R2+ / R2- (добавить / убрать
двуугольник), R3, Reduce4to2 (удвоенная петля -> полный оборот ленты).
"""

import json
import random
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import config
from diagram_core import (
    Diagram, KinkTag, Position, build_diagram, dart_faces, head_hints,
    kept_index_map, splice_out, writhe, _face_orbits,
)
from errors import InvalidMove, MultiComponent, UntaggedInput

logger = logging.getLogger(__name__)


@dataclass
class MoveRecord:
    kind: str
    site: Dict[str, Any]
    before: int
    after: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class MoveTrace:
    moves: List[MoveRecord] = field(default_factory=list)
    before: int = 0
    after: int = 0

    def add(self, record: MoveRecord) -> None:
        self.moves.append(record)
        self.after = record.after

    def extend(self, other: "MoveTrace") -> None:
        for record in other.moves:
            self.add(record)

    def __len__(self) -> int:
        return len(self.moves)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "before": self.before,
            "after": self.after,
            "moves": [m.to_dict() for m in self.moves],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MoveTrace":
        return cls(
            moves=[MoveRecord(**m) for m in data.get("moves", [])],
            before=int(data.get("before", 0)),
            after=int(data.get("after", 0)),
        )


def _top_label(d: Diagram) -> int:
    return max(d.labels, default=0)


def _identity(d: Diagram) -> Dict[int, int]:
    return {c: c for c in range(d.crossing_count)}


def _remap_tags(d: Diagram, old_to_new: Dict[int, int]) -> List[KinkTag]:
    return [t for t in (tag.remapped(old_to_new, {}) for tag in d.tags) if t is not None]


def _rebuild_without(d: Diagram, removed: Sequence[int]) -> Diagram:
    """Удаление перекрёстков со сшиванием нитей; теги с удалёнными перекрёстками пропадают"""
    raw, closed = splice_out(d, removed)
    old_to_new = kept_index_map(d.crossing_count, removed)
    new_to_old = {v: k for k, v in old_to_new.items()}
    return build_diagram(
        raw, loops=d.loops + closed, tags=_remap_tags(d, old_to_new), relabel=False,
        head_hints=head_hints(d, raw, new_to_old),
    )


# === R1 ===

def r1_add(d: Diagram, edge: Optional[int] = None, sign: int = 1) -> Diagram:
    """Петля знака sign на ребре edge (по умолчанию наименьшая метка; без перекрёстков - свободная петля).

    Новый перекрёсток добавляется последним и помечается тегом kind="kink".
    """
    if sign not in (1, -1):
        raise InvalidMove(f"Знак петли должен быть ±1, получено {sign}")
    n = d.crossing_count
    top = _top_label(d)
    loop_label = top + 1
    raw: List[List[int]] = [list(t) for t in d.crossings]
    if edge is None and not d.crossings:
        if d.loops < 1:
            raise InvalidMove("Нет ни рёбер, ни свободных петель")
        x = top + 2
        kink = [x, x, loop_label, loop_label] if sign > 0 else [loop_label, x, x, loop_label]
        raw.append(kink)
        loops = d.loops - 1
    else:
        if edge is None:
            edge = min(d.labels)
        if edge not in d.labels:
            raise InvalidMove(f"Нет ребра {edge}")
        tail, head = d.tail(edge), d.head(edge)
        out_label = top + 2
        raw[head[0]][head[1]] = out_label
        kink = [edge, out_label, loop_label, loop_label] if sign > 0 else [loop_label, edge, out_label, loop_label]
        raw.append(kink)
        loops = d.loops
    internal = frozenset({(n, 2), (n, 3)} if sign > 0 else {(n, 0), (n, 3)})
    tags = list(d.tags) + [KinkTag((n,), internal, sign, "kink")]
    hints = head_hints(d, raw, _identity(d))
    out = build_diagram(raw, loops=loops, tags=tags, relabel=False, head_hints=hints)
    logger.debug(f"[MOVES] R1+ ребро={edge} знак={sign}: {n} -> {out.crossing_count}")
    return out


def kink_sites(d: Diagram) -> List[int]:
    """Перекрёстки, у которых два соседних слота занимает одно ребро"""
    return [c for c, t in enumerate(d.crossings) if any(t[s] == t[(s + 1) % 4] for s in range(4))]


def r1_remove(d: Diagram, crossing: int) -> Diagram:
    if crossing not in kink_sites(d):
        raise InvalidMove(f"Перекрёсток {crossing} не является петлёй", {"crossing": crossing})
    return _rebuild_without(d, [crossing])


# === R2 ===

def r2_add(d: Diagram, dart1: Position, dart2: Position, over: bool = True) -> Diagram:
    """Палец ребра dart1 проталкивается через общую грань над (over=True) или под ребром dart2.

    Дротики задаются как (перекрёсток, слот), грань лежит справа от каждого.
    """
    dart1, dart2 = tuple(dart1), tuple(dart2)
    owner = dart_faces(d)
    if dart1 not in owner or dart2 not in owner:
        raise InvalidMove("Дротик вне диаграммы", {"dart1": dart1, "dart2": dart2})
    if owner[dart1] != owner[dart2]:
        raise InvalidMove("Дротики лежат на разных гранях", {"dart1": dart1, "dart2": dart2})
    e1, e2 = d.label_at(dart1), d.label_at(dart2)
    if e1 == e2:
        raise InvalidMove("Для R2 нужны два разных ребра", {"edge": e1})
    top = _top_label(d)
    b1, m1, b2, m2 = top + 1, top + 2, top + 3, top + 4
    a1, a2 = e1, e2
    raw: List[List[int]] = [list(t) for t in d.crossings]
    far1, far2 = d.other_end(dart1), d.other_end(dart2)
    raw[far1[0]][far1[1]] = b1
    raw[far2[0]][far2[1]] = b2
    if over:
        x, y = [m2, a1, b2, m1], [a2, b1, m2, m1]
    else:
        x, y = [m1, m2, a1, b2], [m1, a2, b1, m2]
    raw.extend([x, y])
    hints = head_hints(d, raw, _identity(d))
    out = build_diagram(raw, loops=d.loops, tags=d.tags, relabel=False, head_hints=hints)
    logger.debug(f"[MOVES] R2+ рёбра {e1}/{e2}: {d.crossing_count} -> {out.crossing_count}")
    return out


def r2_sites(d: Diagram) -> List[Tuple[int, int]]:
    """Двуугольники, у которых одно ребро сверху в обоих концах, другое снизу"""
    sites = set()
    for face in _face_orbits(d):
        if len(face) != 2:
            continue
        (x, _), (y, _) = face
        if x == y:
            continue
        e1, e2 = d.label_at(face[0]), d.label_at(face[1])
        if e1 == e2:
            continue
        par1 = {s % 2 for _, s in d.positions(e1)}
        par2 = {s % 2 for _, s in d.positions(e2)}
        if len(par1) == 1 and len(par2) == 1 and par1 != par2:
            sites.add((min(x, y), max(x, y)))
    return sorted(sites)


def r2_remove(d: Diagram, x: int, y: int) -> Diagram:
    pair = (min(x, y), max(x, y))
    if pair not in r2_sites(d):
        raise InvalidMove(f"Перекрёстки {x}, {y} не образуют двуугольник R2", {"crossings": list(pair)})
    return _rebuild_without(d, list(pair))


# === R3 ===

def _contraction_walk(d: Diagram, internal, start: Position, count: int) -> List[Position]:
    """Внешние позиции области против часовой стрелки, как вокруг стянутой вершины"""
    out = [start]
    p = start
    for _ in range(count - 1):
        q = (p[0], (p[1] + 1) % 4)
        while internal(q):
            a = d.other_end(q)
            q = (a[0], (a[1] + 1) % 4)
        out.append(q)
        p = q
    return out


def _exit_through(d: Diagram, internal, p: Position) -> Position:
    """Проход нити от внешней позиции p сквозь область до другой внешней позиции"""
    q = (p[0], (p[1] + 2) % 4)
    while internal(q):
        a = d.other_end(q)
        q = (a[0], (a[1] + 2) % 4)
    return q


def r3(d: Diagram, dart: Position) -> Diagram:
    """Третий ход на треугольной грани, содержащей dart.

    Три нити должны быть упорядочены по высоте. Порядок перекрёстков вдоль каждой
    нити меняется на обратный, пары верх/низ сохраняются.
    """
    dart = tuple(dart)
    face = next((f for f in _face_orbits(d) if dart in f), None)
    if face is None or len(face) != 3 or len({c for c, _ in face}) != 3:
        raise InvalidMove("R3 требует треугольную грань с тремя разными перекрёстками", {"dart": dart})
    tri = sorted({c for c, _ in face})
    sides = {d.label_at(p) for p in face}

    def internal(q: Position) -> bool:
        return d.label_at(q) in sides

    ext = sorted((c, s) for c in tri for s in range(4) if not internal((c, s)))
    if len(ext) != 6:
        raise InvalidMove("Треугольник без шести внешних концов", {"dart": dart})
    xs = _contraction_walk(d, internal, ext[0], 6)
    if len(set(xs)) != 6:
        raise InvalidMove("Обход треугольника не замкнулся", {"dart": dart})
    for m in range(3):
        if _exit_through(d, internal, xs[m]) != xs[m + 3]:
            raise InvalidMove("Нити треугольника не соединяют противоположные концы", {"dart": dart})
    index = {p: m for m, p in enumerate(xs)}

    def line(m: int) -> int:
        return m % 3

    partner_at: Dict[int, int] = {}
    pair_of: Dict[frozenset, int] = {}
    over_line: Dict[frozenset, int] = {}
    for c in tri:
        ends = [p for p in xs if p[0] == c]
        lines = [line(index[p]) for p in ends]
        pair = frozenset(lines)
        pair_of[pair] = c
        over_line[pair] = next(line(index[p]) for p in ends if p[1] % 2 == 1)
        for p in ends:
            partner_at[index[p]] = (set(lines) - {line(index[p])}).pop()
    if len(pair_of) != 3:
        raise InvalidMove("Треугольник не из трёх попарно пересекающихся нитей", {"dart": dart})
    wins = {i: sum(1 for pair, top in over_line.items() if top == i) for i in range(3)}
    if sorted(wins.values()) != [0, 1, 2]:
        raise InvalidMove("Нити треугольника не упорядочены по высоте", {"dart": dart})

    top = _top_label(d)
    fresh = {i: top + 1 + i for i in range(3)}
    new_first = {m: partner_at[(m + 3) % 6] for m in range(6)}
    raw: List[List[int]] = [list(t) for t in d.crossings]
    explicit: Dict[int, Position] = {}
    for pair, c in pair_of.items():
        i, j = sorted(pair)
        arms = [i, j, i + 3, j + 3]
        labels = []
        for m in arms:
            ext_label = d.label_at(xs[m])
            other = next(iter(pair - {line(m)}))
            labels.append(ext_label if new_first[m] == other else fresh[line(m)])
        shift = 0 if over_line[pair] == j else 1
        tup = [labels[(k + shift) % 4] for k in range(4)]
        raw[c] = tup
        for k in range(4):
            m = arms[(k + shift) % 4]
            if tup[k] != fresh[line(m)] and d.head(tup[k]) == xs[m]:
                explicit[tup[k]] = (c, k)
    kept = {c: c for c in range(d.crossing_count) if c not in tri}
    hints = head_hints(d, raw, kept)
    hints.update(explicit)
    tags = [t for t in d.tags if not set(t.crossings) & set(tri)]
    out = build_diagram(raw, loops=d.loops, tags=tags, relabel=False, head_hints=hints)
    logger.debug(f"[MOVES] R3 на перекрёстках {tri}")
    return out


def r3_sites(d: Diagram) -> List[Position]:
    """По одному дротику (наименьшему) на каждую треугольную грань, где R3 допустим"""
    sites = []
    for face in _face_orbits(d):
        if len(face) != 3:
            continue
        try:
            r3(d, min(face))
        except InvalidMove:
            continue
        sites.append(min(face))
    return sorted(sites)


# === НОРМАЛИЗАЦИЯ И УПРОЩЕНИЕ ===

def _exit_label(d: Diagram, crossing: int) -> int:
    """Ребро, выходящее из петли наружу"""
    for label in d.crossings[crossing]:
        if d.tail(label)[0] == crossing and d.head(label)[0] != crossing:
            return label
    return d.crossings[crossing][0]


def normalize_writhe(d: Diagram) -> Tuple[Diagram, MoveTrace]:
    """Петли знака -sign(w) на наименьшем ребре, каждая следующая сразу за предыдущей"""
    if d.component_count != 1:
        raise MultiComponent("Нормализация writhe определена для узлов", {"components": d.component_count})
    w = writhe(d)
    trace = MoveTrace(before=d.crossing_count, after=d.crossing_count)
    if w == 0:
        return d, trace
    sign = -1 if w > 0 else 1
    edge: Optional[int] = min(d.labels) if d.crossings else None
    out = d
    for _ in range(abs(w)):
        before = out.crossing_count
        out = r1_add(out, edge, sign)
        trace.add(MoveRecord("R1+", {"edge": edge, "sign": sign}, before, out.crossing_count))
        edge = _exit_label(out, out.crossing_count - 1)
    logger.info(f"[MOVES] writhe {w} -> {writhe(out)}, перекрёстков {d.crossing_count} -> {out.crossing_count}")
    return out, trace


def simplify(d: Diagram, rounds: Optional[int] = None) -> Tuple[Diagram, MoveTrace]:
    """Жадное удаление петель R1 и двуугольников R2, не больше rounds шагов"""
    rounds = config.SIMPLIFY_ROUNDS if rounds is None else rounds
    trace = MoveTrace(before=d.crossing_count, after=d.crossing_count)
    out = d
    for _ in range(rounds):
        before = out.crossing_count
        kinks = kink_sites(out)
        if kinks:
            out = r1_remove(out, kinks[0])
            trace.add(MoveRecord("R1-", {"crossing": kinks[0]}, before, out.crossing_count))
            continue
        bigons = r2_sites(out)
        if bigons:
            x, y = bigons[0]
            out = r2_remove(out, x, y)
            trace.add(MoveRecord("R2-", {"crossings": [x, y]}, before, out.crossing_count))
            continue
        break
    if len(trace):
        logger.info(f"[MOVES] Упрощение: {d.crossing_count} -> {out.crossing_count} за {len(trace)} ходов")
    return out, trace


# === УДВОЕННЫЕ ПЕТЛИ ===

def _reduce_quadruple(d: Diagram, tag: KinkTag) -> Diagram:
    quad = set(tag.crossings)

    def internal(q: Position) -> bool:
        return q in tag.internal

    ext = sorted((c, s) for c in quad for s in range(4) if not internal((c, s)))
    if len(quad) != 4 or len(ext) != 4:
        raise InvalidMove("Тег не описывает блок из 4 перекрёстков с 4 концами", tag.to_dict())
    ring = _contraction_walk(d, internal, ext[0], 4)
    partner = {p: _exit_through(d, internal, p) for p in ring}
    shift = next((r for r in range(4) if partner[ring[(r + 1) % 4]] == ring[(r + 2) % 4]), None)
    if shift is None:
        raise InvalidMove("Нити блока не параллельны", tag.to_dict())
    d1, d2, d3, d4 = (ring[(shift + k) % 4] for k in range(4))
    l1, l2, l3, l4 = (d.label_at(p) for p in (d1, d2, d3, d4))
    top = _top_label(d)
    ml, mr = top + 1, top + 2
    old_to_new = kept_index_map(d.crossing_count, quad)
    raw: List[List[int]] = [list(t) for c, t in enumerate(d.crossings) if c not in quad]
    i1, i2 = len(raw), len(raw) + 1
    if tag.sign > 0:
        t1, t2 = [l2, ml, mr, l1], [ml, l3, l4, mr]
        slots = {d1: (i1, 3), d2: (i1, 0), d3: (i2, 1), d4: (i2, 2)}
    else:
        t1, t2 = [l1, l2, ml, mr], [mr, ml, l3, l4]
        slots = {d1: (i1, 0), d2: (i1, 1), d3: (i2, 2), d4: (i2, 3)}
    raw.extend([t1, t2])
    new_to_old = {v: k for k, v in old_to_new.items()}
    hints = head_hints(d, raw, new_to_old)
    for p, label in zip((d1, d2, d3, d4), (l1, l2, l3, l4)):
        if d.head(label) == p:
            hints[label] = slots[p]
    others = [t for t in (tg.remapped(old_to_new, {}) for tg in d.tags if tg is not tag) if t is not None]
    return build_diagram(raw, loops=d.loops, tags=others, relabel=False, head_hints=hints)


def reduce_kink_quadruples(d: Diagram, strict: bool = False) -> Tuple[Diagram, MoveTrace]:
    """Каждый помеченный блок из 4 перекрёстков (удвоенная петля) -> 2 перекрёстка.

    Без тегов диаграмма возвращается как есть; при strict=True - UntaggedInput.
    """
    trace = MoveTrace(before=d.crossing_count, after=d.crossing_count)
    if not any(t.kind == "quadruple" for t in d.tags):
        if strict:
            raise UntaggedInput("На диаграмме нет помеченных удвоенных петель")
        return d, trace
    out = d
    while True:
        quads = [t for t in out.tags if t.kind == "quadruple"]
        if not quads:
            break
        tag = min(quads, key=lambda t: t.crossings)
        before = out.crossing_count
        out = _reduce_quadruple(out, tag)
        trace.add(MoveRecord("Reduce4to2", {"crossings": list(tag.crossings)}, before, out.crossing_count))
    logger.info(f"[MOVES] Сокращение блоков: {d.crossing_count} -> {out.crossing_count}")
    return out, trace


# === ВОСПРОИЗВЕДЕНИЕ И СЛУЧАЙНЫЕ ХОДЫ ===

def apply_move(d: Diagram, record: MoveRecord) -> Diagram:
    site = record.site
    if record.kind == "R1+":
        return r1_add(d, site.get("edge"), int(site["sign"]))
    if record.kind == "R1-":
        return r1_remove(d, int(site["crossing"]))
    if record.kind == "R2+":
        return r2_add(d, tuple(site["dart1"]), tuple(site["dart2"]), bool(site["over"]))
    if record.kind == "R2-":
        x, y = site["crossings"]
        return r2_remove(d, int(x), int(y))
    if record.kind == "R3":
        return r3(d, tuple(site["dart"]))
    if record.kind == "Reduce4to2":
        crossings = tuple(site["crossings"])
        tag = next((t for t in d.tags if t.kind == "quadruple" and t.crossings == crossings), None)
        if tag is None:
            raise InvalidMove("Нет блока с такими перекрёстками", {"crossings": list(crossings)})
        return _reduce_quadruple(d, tag)
    raise InvalidMove(f"Неизвестный вид хода {record.kind}")


def replay(d: Diagram, trace: MoveTrace) -> Diagram:
    out = d
    for record in trace.moves:
        out = apply_move(out, record)
    return out


def random_move(d: Diagram, rng: random.Random) -> Tuple[Diagram, MoveRecord]:
    """Случайный допустимый ход; для проверок инвариантности"""
    options: List[Tuple[str, Dict[str, Any]]] = []
    if d.crossings or d.loops:
        edge = rng.choice(d.labels) if d.crossings else None
        options.append(("R1+", {"edge": edge, "sign": rng.choice((1, -1))}))
    kinks = kink_sites(d)
    if kinks:
        options.append(("R1-", {"crossing": rng.choice(kinks)}))
    wide = [f for f in _face_orbits(d) if len({d.label_at(p) for p in f}) >= 2]
    if wide:
        face = rng.choice(wide)
        dart1 = rng.choice(face)
        dart2 = rng.choice([p for p in face if d.label_at(p) != d.label_at(dart1)])
        options.append(("R2+", {"dart1": list(dart1), "dart2": list(dart2), "over": rng.random() < 0.5}))
    bigons = r2_sites(d)
    if bigons:
        options.append(("R2-", {"crossings": list(rng.choice(bigons))}))
    triangles = r3_sites(d)
    if triangles:
        options.append(("R3", {"dart": list(rng.choice(triangles))}))
    kind, site = rng.choice(options)
    record = MoveRecord(kind, site, d.crossing_count, 0)
    out = apply_move(d, record)
    record.after = out.crossing_count
    return out, record
