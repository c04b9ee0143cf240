# structure.py - разрезающие окружности, простота диаграмм, связная сумма, диск компаньона и тэнглы

import json
import logging
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Any, Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

import networkx as nx

from diagram_core import (
    Diagram, UnionFind, build_diagram, crossing_graph, dart_faces, edge_faces,
    head_hints,
)
from errors import Disconnected, InvalidDisk, NoInterComponentCrossing, ScreeningFailed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CutCircle:
    """Окружность, пересекающая диаграмму в двух точках на рёбрах edges.

    Для окружности вокруг куска одного ребра edges = (e, e) и side_a пуста.
    """
    edges: Tuple[int, ...]
    faces: Tuple[int, ...]
    side_a: FrozenSet[int]
    side_b: FrozenSet[int]

    @property
    def simple(self) -> bool:
        """Одна из сторон без перекрёстков: окружность отрезает простую дугу"""
        return not self.side_a or not self.side_b

    def to_dict(self) -> Dict[str, Any]:
        return {
            "edges": list(self.edges),
            "faces": list(self.faces),
            "side_a": sorted(self.side_a),
            "side_b": sorted(self.side_b),
            "simple": self.simple,
        }


def _require_connected(d: Diagram) -> None:
    if not d.is_connected():
        raise Disconnected("Операция требует связной диаграммы",
                           {"crossings": d.crossing_count, "loops": d.loops})


def _sides(d: Diagram, e1: int, e2: int) -> Tuple[FrozenSet[int], FrozenSet[int]]:
    g = crossing_graph(d)
    (a1, _), (b1, _) = d.positions(e1)
    (a2, _), (b2, _) = d.positions(e2)
    g.remove_edge(a1, b1, key=e1)
    g.remove_edge(a2, b2, key=e2)
    parts = sorted((frozenset(p) for p in nx.connected_components(g)), key=min)
    if len(parts) == 1:
        return parts[0], frozenset()
    first = parts[0]
    rest = frozenset().union(*parts[1:])
    return first, rest


def enumerate_cut_circles(d: Diagram) -> List[CutCircle]:
    """Все окружности с двумя точками пересечения: по одной на ребро и по одной на пару рёбер с двумя общими гранями"""
    _require_connected(d)
    if not d.crossings:
        return [CutCircle(edges=(), faces=(0, 1), side_a=frozenset(), side_b=frozenset())]
    by_edge = edge_faces(d)
    everything = frozenset(range(d.crossing_count))
    out = [CutCircle((e,) * 2, tuple(sorted(by_edge[e])), frozenset(), everything) for e in d.labels]
    for e1, e2 in combinations(d.labels, 2):
        if set(by_edge[e1]) != set(by_edge[e2]):
            continue
        side_a, side_b = _sides(d, e1, e2)
        out.append(CutCircle((e1, e2), tuple(sorted(by_edge[e1])), side_a, side_b))
    return out


def is_prime_diagram(d: Diagram) -> Tuple[bool, Optional[CutCircle]]:
    """Простота по парам граней: две грани с двумя общими рёбрами дают несводимую окружность"""
    _require_connected(d)
    if not d.crossings:
        return True, None
    shared: Dict[Tuple[int, int], List[int]] = {}
    for e, (f, g) in edge_faces(d).items():
        if f != g:
            shared.setdefault((min(f, g), max(f, g)), []).append(e)
    for pair in sorted(shared):
        edges = sorted(shared[pair])
        for e1, e2 in combinations(edges, 2):
            side_a, side_b = _sides(d, e1, e2)
            if side_a and side_b:
                return False, CutCircle((e1, e2), pair, side_a, side_b)
    return True, None


def _side_factor(d: Diagram, side: FrozenSet[int], e1: int, e2: int) -> Diagram:
    order = sorted(side)
    raw = [[e1 if x == e2 else x for x in d.crossings[c]] for c in order]
    kept = {i: c for i, c in enumerate(order)}
    hints = head_hints(d, raw, kept)
    return build_diagram(raw, relabel=False, head_hints=hints)


def split_connected_sum(d: Diagram) -> List[Diagram]:
    """Рекурсивное разрезание по несводимым окружностям; сторона с наименьшим перекрёстком идёт первой"""
    prime, witness = is_prime_diagram(d)
    if prime or witness is None:
        return [d]
    e1, e2 = witness.edges
    logger.debug(f"[STRUCTURE] Разрез по рёбрам {e1}, {e2}: {sorted(witness.side_a)} | {sorted(witness.side_b)}")
    out: List[Diagram] = []
    for side in (witness.side_a, witness.side_b):
        out.extend(split_connected_sum(_side_factor(d, side, e1, e2)))
    return out


# === ТЭНГЛЫ ===

@dataclass(frozen=True)
class Tangle:
    """Диаграмма в диске с концами NW, NE, SE, SW (против часовой стрелки).

    Метка конца встречается в crossings и boundary суммарно дважды; хорда без
    перекрёстков встречается только в boundary.
    """
    crossings: Tuple[Tuple[int, int, int, int], ...]
    boundary: Tuple[int, int, int, int]
    loops: int = 0

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)

    def strings(self) -> List[Tuple[int, int]]:
        """Пары концов, соединённых нитями (индексы 0..3 в boundary)"""
        where: Dict[int, List[Tuple[int, int]]] = {}
        for c, tup in enumerate(self.crossings):
            for s, label in enumerate(tup):
                where.setdefault(label, []).append((c, s))
        pairs = []
        seen = set()
        for i, label in enumerate(self.boundary):
            if i in seen:
                continue
            came_from = None
            while label in where:
                c, s = next(p for p in where[label] if p != came_from)
                came_from = (c, (s + 2) % 4)
                label = self.crossings[c][(s + 2) % 4]
                if len(where[label]) == 1:
                    break
            j = next(k for k, b in enumerate(self.boundary) if b == label and k != i)
            seen.update((i, j))
            pairs.append((i, j))
        return pairs

    def to_dict(self) -> Dict[str, Any]:
        return {
            "crossings": [list(t) for t in self.crossings],
            "boundary": {"NW": self.boundary[0], "NE": self.boundary[1],
                         "SE": self.boundary[2], "SW": self.boundary[3]},
            "loops": self.loops,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Tangle":
        b = data["boundary"]
        return cls(
            crossings=tuple(tuple(int(x) for x in t) for t in data.get("crossings", [])),  # type: ignore[misc]
            boundary=(int(b["NW"]), int(b["NE"]), int(b["SE"]), int(b["SW"])),
            loops=int(data.get("loops", 0)),
        )


def _close(crossings: Sequence[Sequence[int]], joins: Sequence[Tuple[int, int]], loops: int) -> Diagram:
    """Склейка концов по меткам; класс меток без вхождений в перекрёстки - свободная петля"""
    labels = {x for t in crossings for x in t} | {x for pair in joins for x in pair}
    uf = UnionFind(sorted(labels))
    for a, b in joins:
        uf.union(a, b)
    classes: Dict[Hashable, List[int]] = {}
    for x in sorted(labels):
        classes.setdefault(uf.find(x), []).append(x)
    rep = {x: min(members) for members in classes.values() for x in members}
    raw = [[rep[x] for x in t] for t in crossings]
    alive = {x for t in raw for x in t}
    closed = len({rep[x] for x in labels} - alive)
    return build_diagram(raw, loops=loops + closed, relabel=False)


def numerator_closure(t: Tangle) -> Diagram:
    """NW-NE и SW-SE"""
    nw, ne, se, sw = t.boundary
    return _close(t.crossings, [(nw, ne), (sw, se)], t.loops)


def denominator_closure(t: Tangle) -> Diagram:
    """NW-SW и NE-SE"""
    nw, ne, se, sw = t.boundary
    return _close(t.crossings, [(nw, sw), (ne, se)], t.loops)


def glue_tangles(inside: Tangle, outside: Tangle) -> Diagram:
    """Склейка по одноимённым концам; метки внутреннего тэнгла сдвигаются, чтобы не пересекаться"""
    top = max([x for t in outside.crossings for x in t] + list(outside.boundary) + [0])
    shift = {x: x + top for t in inside.crossings for x in t}
    shift.update({x: x + top for x in inside.boundary})
    inner = [[shift[x] for x in t] for t in inside.crossings]
    joins = [(outside.boundary[i], shift[inside.boundary[i]]) for i in range(4)]
    return _close(list(outside.crossings) + inner, joins, outside.loops + inside.loops)


# === ДИСК КОМПАНЬОНА ===

@dataclass(frozen=True)
class CompanionDisk:
    """Диск у угла (slot, slot+1) перекрёстка crossing внутри грани face.

    Диск пересекает ребро edge_a (слот slot) и edge_b (слот slot+1) по дуге без
    перекрёстков. inner_face лежит за edge_a, outer_face - за edge_b. Для диаграммы
    из параллельных окружностей crossing = None, а дуги берутся на первых двух петлях.
    """
    crossing: Optional[int]
    slot: int
    face: int
    edge_a: Optional[int]
    edge_b: Optional[int]
    inner_face: int
    outer_face: int
    components: Tuple[int, int]
    screened: bool = False
    explicit: bool = False

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["components"] = list(self.components)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CompanionDisk":
        data = dict(data)
        data["components"] = tuple(data.get("components", (0, 1)))
        return cls(**data)


@dataclass
class ScreenReport:
    passed: bool
    reasons: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "reasons": list(self.reasons)}


def loop_disk(d: Diagram) -> CompanionDisk:
    """Диск через две первые из параллельных окружностей диаграммы без перекрёстков"""
    if d.crossings or d.loops < 2:
        raise InvalidDisk("Диск через петли нужен диаграмме из не менее чем двух окружностей")
    return CompanionDisk(None, 0, 1, None, None, 0, 2, (0, 1), explicit=True)


def _corner_disk(d: Diagram, crossing: int, slot: int) -> CompanionDisk:
    if not 0 <= crossing < d.crossing_count or slot not in range(4):
        raise InvalidDisk("Нет такого угла", {"crossing": crossing, "slot": slot})
    owner = dart_faces(d)
    pa, pb = (crossing, slot), (crossing, (slot + 1) % 4)
    edge_a, edge_b = d.label_at(pa), d.label_at(pb)
    if edge_a == edge_b:
        raise InvalidDisk("Угол петли: обе дуги на одном ребре", {"crossing": crossing, "slot": slot})
    inner = owner[pa]
    outer = owner[d.other_end(pb)]
    if inner == outer:
        raise InvalidDisk("Внутренняя и внешняя грани совпадают", {"crossing": crossing, "slot": slot})
    return CompanionDisk(
        crossing=crossing, slot=slot, face=owner[pb], edge_a=edge_a, edge_b=edge_b,
        inner_face=inner, outer_face=outer,
        components=(d.component_of(edge_a), d.component_of(edge_b)),
    )


def explicit_disk(d: Diagram, crossing: int, corner: int) -> CompanionDisk:
    """Ручной выбор диска без фильтра локальной тривиальности"""
    _require_connected(d)
    disk = _corner_disk(d, crossing, corner)
    return CompanionDisk(**{**asdict(disk), "components": disk.components, "explicit": True})


def extract_tangle(d: Diagram, disk: CompanionDisk) -> Tuple[Tangle, Tangle]:
    """(тэнгл внутри диска, тэнгл снаружи); внутри всегда две хорды NW-NE и SW-SE"""
    top = max(d.labels, default=0)
    if disk.crossing is None:
        inside = Tangle((), (1, 1, 2, 2), 0)
        outside = Tangle((), (3, 3, 4, 4), d.loops - 2)
        return inside, outside
    x, s = disk.crossing, disk.slot
    raw = [list(t) for t in d.crossings]
    far_a, far_b = d.other_end((x, s)), d.other_end((x, (s + 1) % 4))
    raw[far_a[0]][far_a[1]] = top + 1
    raw[far_b[0]][far_b[1]] = top + 2
    outside = Tangle(
        crossings=tuple(tuple(t) for t in raw),  # type: ignore[misc]
        boundary=(disk.edge_a, top + 1, top + 2, disk.edge_b),  # type: ignore[arg-type]
        loops=d.loops,
    )
    inside = Tangle((), (top + 3, top + 3, top + 4, top + 4), 0)
    return inside, outside


def screen_tangle(t: Tangle) -> ScreenReport:
    """Диаграммный фильтр локальной тривиальности тэнгла.

    Граф перекрёстков с вершиной-границей должен быть связен, никакая пара рёбер
    не должна отрезать перекрёстки от границы, обе замыкания должны быть связны.
    """
    reasons: List[str] = []
    g = nx.MultiGraph()
    g.add_node("boundary")
    g.add_nodes_from(range(t.crossing_count))
    where: Dict[int, List[Any]] = {}
    for c, tup in enumerate(t.crossings):
        for label in tup:
            where.setdefault(label, []).append(c)
    for label in t.boundary:
        where.setdefault(label, []).append("boundary")
    for label, ends in sorted(where.items()):
        if len(ends) == 2:
            g.add_edge(ends[0], ends[1], key=label)
    if t.loops:
        reasons.append("свободные петли внутри тэнгла")
    if not nx.is_connected(g):
        reasons.append("граф тэнгла несвязен")
    else:
        edges = [(u, v, k) for u, v, k in g.edges(keys=True) if u != v]
        for (u1, v1, k1), (u2, v2, k2) in combinations(edges, 2):
            h = g.copy()
            h.remove_edge(u1, v1, key=k1)
            h.remove_edge(u2, v2, key=k2)
            reach = nx.node_connected_component(h, "boundary")
            if len(reach) < h.number_of_nodes():
                reasons.append(f"рёбра {k1}, {k2} отрезают перекрёстки от границы")
                break
    for name, closure in (("числитель", numerator_closure), ("знаменатель", denominator_closure)):
        if not closure(t).is_connected():
            reasons.append(f"{name} несвязен")
    return ScreenReport(passed=not reasons, reasons=reasons)


def find_companion_disk(d: Diagram) -> CompanionDisk:
    """Диск для сателлитной конструкции.

    Зацепление: наименьший перекрёсток между разными компонентами. Узел: первый
    угол, дополнительный тэнгл которого проходит screen_tangle.
    """
    _require_connected(d)
    if not d.crossings:
        raise InvalidDisk("У узла без перекрёстков нет подходящего угла")
    if len(d.components) >= 2:
        for c in range(d.crossing_count):
            under, over = d.crossing_components(c)
            if under == over:
                continue
            for s in range(4):
                try:
                    return _corner_disk(d, c, s)
                except InvalidDisk:
                    continue
        raise NoInterComponentCrossing("В связной многокомпонентной диаграмме нет перекрёстка между компонентами")
    tried = 0
    for c in range(d.crossing_count):
        for s in range(4):
            try:
                disk = _corner_disk(d, c, s)
            except InvalidDisk:
                continue
            tried += 1
            _, outside = extract_tangle(d, disk)
            if screen_tangle(outside).passed:
                logger.debug(f"[STRUCTURE] Диск у перекрёстка {c}, угол {s}")
                return CompanionDisk(**{**asdict(disk), "components": disk.components, "screened": True})
    raise ScreeningFailed("Ни один угол не прошёл фильтр локальной тривиальности", {"candidates": tried})
