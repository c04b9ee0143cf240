# satellite.py - кольцевые диаграммы, число обмотки, удвоение по доске, запутывание и кабель
"""
Паттерн - диаграмма в кольце: кольцо получается выкалыванием внутренней и
внешней граней диска компаньона. Число обмотки считается кратчайшим путём в
двойственном графе граней. Компаньон нормализуется до нулевого writhe, удваивается
по доске (4 перекрёстка на перекрёсток) и вклеивается вместо двух дуг диска.
"""

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Hashable, List, Optional, Tuple

import networkx as nx

import config
from diagram_core import Diagram, KinkTag, build_diagram, edge_faces, emit_pd, linking_matrix, relabel_map, writhe
from errors import InvalidDisk, NotAKnot, WrappingTooSmall
from moves import MoveTrace, normalize_writhe, reduce_kink_quadruples
from structure import CompanionDisk, extract_tangle, find_companion_disk, loop_disk

logger = logging.getLogger(__name__)


# === КОЛЬЦЕВЫЕ ДИАГРАММЫ ===

@dataclass(frozen=True)
class AnnularDiagram:
    """Диаграмма в кольце S^2 без внутренней и внешней граней.

    Две дуги диска (рёбра disk.edge_a и disk.edge_b) образуют отмеченную
    полукольцевую область без перекрёстков; все перекрёстки лежат вне неё.
    """
    diagram: Diagram
    disk: CompanionDisk
    inner_face: int
    outer_face: int

    @cached_property
    def _dual_edges(self) -> List[Tuple[int, int, Hashable, int]]:
        """(грань справа, грань слева, ребро, компонента) для каждого ребра, свободные петли цепочкой"""
        d = self.diagram
        if not d.crossings:
            return [(i + 1, i, ("loop", i), i) for i in range(d.loops)]
        by_edge = edge_faces(d)
        return [(by_edge[e][0], by_edge[e][1], e, d.component_of(e)) for e in d.labels]

    def dual_graph(self, component: Optional[int] = None) -> nx.Graph:
        """Двойственный граф; при заданной компоненте рёбра остальных компонент бесплатны"""
        g = nx.Graph()
        faces_n = (self.diagram.loops + 1) if not self.diagram.crossings else self.diagram.crossing_count + 2
        g.add_nodes_from(range(faces_n))
        for right, left, edge, comp in self._dual_edges:
            w = 1 if component is None or comp == component else 0
            if g.has_edge(right, left):
                if w < g[right][left]["weight"]:
                    g[right][left].update(weight=w, edge=edge)
            else:
                g.add_edge(right, left, weight=w, edge=edge)
        return g

    def spanning_path(self) -> List[int]:
        """Кратчайший путь граней от внутренней к внешней"""
        return nx.shortest_path(self.dual_graph(), self.inner_face, self.outer_face, weight="weight")

    @cached_property
    def winding(self) -> Tuple[int, ...]:
        """Алгебраическое число пересечений каждой компоненты со спанящей дугой"""
        counts = [0] * self.diagram.component_count
        path = self.spanning_path()
        lookup: Dict[Tuple[int, int], Tuple[int, int]] = {}
        for right, left, _, comp in sorted(self._dual_edges, key=lambda t: str(t[2])):
            lookup.setdefault((right, left), (comp, 1))
            lookup.setdefault((left, right), (comp, -1))
        for a, b in zip(path, path[1:]):
            comp, step = lookup[(a, b)]
            counts[comp] += step
        return tuple(counts)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "diagram": self.diagram.to_dict(),
            "disk": self.disk.to_dict(),
            "inner_face": self.inner_face,
            "outer_face": self.outer_face,
            "winding": list(self.winding),
            "wrapping": wrapping_number(self),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AnnularDiagram":
        d = Diagram.from_dict(data["diagram"])
        disk = CompanionDisk.from_dict(data["disk"])
        return annular_embed(d, disk)


def annular_embed(d: Diagram, disk: Optional[CompanionDisk] = None) -> AnnularDiagram:
    """Кольцевое представление по диску; без диска он ищется find_companion_disk (или loop_disk)"""
    if disk is None:
        disk = loop_disk(d) if not d.crossings else find_companion_disk(d)
    faces_n = (d.loops + 1) if not d.crossings else d.crossing_count + 2
    for face in (disk.inner_face, disk.outer_face, disk.face):
        if not 0 <= face < faces_n:
            raise InvalidDisk("Грань диска вне диаграммы", disk.to_dict())
    if disk.crossing is not None:
        if disk.crossing >= d.crossing_count:
            raise InvalidDisk("Перекрёсток диска вне диаграммы", disk.to_dict())
        x, s = disk.crossing, disk.slot
        if (d.label_at((x, s)), d.label_at((x, (s + 1) % 4))) != (disk.edge_a, disk.edge_b):
            raise InvalidDisk("Рёбра диска не совпадают с углом", disk.to_dict())
    if disk.inner_face == disk.outer_face:
        raise InvalidDisk("Внутренняя и внешняя грани совпадают", disk.to_dict())
    return AnnularDiagram(d, disk, disk.inner_face, disk.outer_face)


def wrapping_number(a: AnnularDiagram) -> int:
    """Минимум пересечений спанящей дуги с проекцией (кратчайший путь в двойственном графе)"""
    if a.inner_face == a.outer_face:
        return 0
    return int(nx.shortest_path_length(a.dual_graph(), a.inner_face, a.outer_face, weight="weight"))


def component_wrapping(a: AnnularDiagram) -> Tuple[int, ...]:
    """Число обмотки каждой компоненты по отдельности"""
    out = []
    for comp in range(a.diagram.component_count):
        if a.inner_face == a.outer_face:
            out.append(0)
            continue
        g = a.dual_graph(component=comp)
        out.append(int(nx.shortest_path_length(g, a.inner_face, a.outer_face, weight="weight")))
    return tuple(out)


def is_reliable(a: AnnularDiagram) -> bool:
    """Не меньше двух компонент с ненулевым числом обмотки"""
    return sum(1 for w in component_wrapping(a) if w > 0) >= 2


# === УДВОЕНИЕ ПО ДОСКЕ ===

@dataclass
class DoubleParts:
    """Сырые кортежи удвоения и концы копий рёбер: (ребро, сторона, роль) -> (перекрёсток, слот)"""
    raw: List[List[Hashable]]
    loops: int
    ends: Dict[Tuple[int, str, str], Tuple[int, int]]
    tags: List[KinkTag] = field(default_factory=list)


def _double_parts(d: Diagram) -> DoubleParts:
    raw: List[List[Hashable]] = []
    ends: Dict[Tuple[int, str, str], Tuple[int, int]] = {}

    def copy(label: int, side: str) -> Hashable:
        return ("d", label, side)

    for c, tup in enumerate(d.crossings):
        sign = d.signs[c]
        north, south = ("L", "R") if sign > 0 else ("R", "L")
        u_in, o_e, u_out, o_w = tup
        mid = {k: ("m", c, k) for k in ("W", "E", "N", "S")}
        nw = [mid["W"], mid["N"], copy(u_out, "L"), copy(o_w, north)]
        ne = [mid["E"], copy(o_e, north), copy(u_out, "R"), mid["N"]]
        sw = [copy(u_in, "L"), mid["S"], mid["W"], copy(o_w, south)]
        se = [copy(u_in, "R"), copy(o_e, south), mid["E"], mid["S"]]
        base = len(raw)
        raw.extend([nw, ne, sw, se])
        ends[(u_in, "L", "head")] = (base + 2, 0)
        ends[(u_in, "R", "head")] = (base + 3, 0)
        ends[(u_out, "L", "tail")] = (base + 0, 2)
        ends[(u_out, "R", "tail")] = (base + 1, 2)
        o_in_role, o_out_role = ("head", "tail") if sign > 0 else ("tail", "head")
        ends[(o_w, north, o_in_role)] = (base + 0, 3)
        ends[(o_w, south, o_in_role)] = (base + 2, 3)
        ends[(o_e, north, o_out_role)] = (base + 1, 1)
        ends[(o_e, south, o_out_role)] = (base + 3, 1)

    tags: List[KinkTag] = []
    for tag in d.tags:
        if tag.kind != "kink" or len(tag.crossings) != 1:
            continue
        c = tag.crossings[0]
        loop_labels = {d.label_at(p) for p in tag.internal}
        inner = {("m", c, k) for k in ("W", "E", "N", "S")}
        inner |= {copy(label, side) for label in loop_labels for side in ("L", "R")}
        block = tuple(range(4 * c, 4 * c + 4))
        internal = frozenset((b, s) for b in block for s in range(4) if raw[b][s] in inner)
        tags.append(KinkTag(block, internal, tag.sign, "quadruple"))
    return DoubleParts(raw=raw, loops=2 * d.loops, ends=ends, tags=tags)


def blackboard_double(d: Diagram) -> Diagram:
    """Две параллельные копии каждой компоненты; теги петель становятся тегами блоков"""
    parts = _double_parts(d)
    if not parts.raw:
        return Diagram(crossings=(), loops=parts.loops)
    return build_diagram(parts.raw, loops=parts.loops, tags=parts.tags, relabel=True)


# === РЕЗУЛЬТАТЫ ===

@dataclass(frozen=True)
class CompanionBand:
    """Меридиан кольца компаньона в сырой выходной диаграмме.

    strands - метки двух параллельных копий ребра companion_edge, components -
    компоненты выхода, которым они принадлежат.
    """
    companion_edge: int
    strands: Tuple[int, ...]
    components: Tuple[int, ...]

    @property
    def wrapping(self) -> int:
        return len(self.strands)

    def component_counts(self) -> List[int]:
        """Число проходов каждой задетой компоненты, по убыванию"""
        counts: Dict[int, int] = {}
        for comp in self.components:
            counts[comp] = counts.get(comp, 0) + 1
        return sorted(counts.values(), reverse=True)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "companion_edge": self.companion_edge,
            "strands": list(self.strands),
            "wrapping": self.wrapping,
            "component_counts": self.component_counts(),
        }


@dataclass
class SatelliteResult:
    diagram: Diagram
    raw_crossings: int
    reduced_crossings: int
    companion_crossings: int
    normalized_companion_crossings: int
    pattern_crossings: int
    framing_lk: int
    wrapping: int
    reliable: bool = False
    knot_case: bool = False
    kinks: int = 0
    trace: MoveTrace = field(default_factory=MoveTrace)
    band: Optional[CompanionBand] = None

    @property
    def bound(self) -> int:
        return self.pattern_crossings + 6 * self.companion_crossings

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pd": emit_pd(self.diagram),
            "components": self.diagram.component_count,
            "raw": self.raw_crossings,
            "reduced": self.reduced_crossings,
            "companion_crossings": self.companion_crossings,
            "normalized_companion_crossings": self.normalized_companion_crossings,
            "pattern_crossings": self.pattern_crossings,
            "bound": self.bound,
            "framing_lk": self.framing_lk,
            "framing": verify_zero_framing(self),
            "wrapping": self.wrapping,
            "reliable": self.reliable,
            "knot_case": self.knot_case,
            "kinks": self.kinks,
            "band": self.band.to_dict() if self.band else None,
            "band_wrapping": band_wrapping(self),
            "trace": self.trace.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)


def band_wrapping(r: SatelliteResult) -> int:
    """Число обмотки, измеренное заново по меридиану кольца компаньона в выходе.

    Без перекрёстков у компаньона кольцо совпадает с кольцом паттерна.
    """
    return r.band.wrapping if r.band is not None else r.wrapping


def verify_zero_framing(r: SatelliteResult) -> bool:
    """Коэффициент зацепления двух граничных кривых удвоенного компаньона равен нулю"""
    return r.framing_lk == 0


def _double_lk(companion: Diagram) -> int:
    double = blackboard_double(companion)
    lm = linking_matrix(double)
    return lm.lk(0, 1) if lm.components >= 2 else 0


def _require_knot(companion: Diagram) -> None:
    if companion.component_count != 1:
        raise NotAKnot("Компаньон должен быть узлом", {"components": companion.component_count})


def double_companion(companion: Diagram, normalize: bool = True) -> SatelliteResult:
    """Удвоение компаньона без паттерна; normalize=False даёт отрицательный контроль оснащения"""
    _require_knot(companion)
    base, trace = normalize_writhe(companion) if normalize else (companion, MoveTrace())
    double = blackboard_double(base)
    return SatelliteResult(
        diagram=double,
        raw_crossings=double.crossing_count,
        reduced_crossings=double.crossing_count,
        companion_crossings=companion.crossing_count,
        normalized_companion_crossings=base.crossing_count,
        pattern_crossings=0,
        framing_lk=_double_lk(base),
        wrapping=2,
        trace=trace,
    )


def entangle(pattern: AnnularDiagram, companion: Diagram, reduce: bool = True) -> SatelliteResult:
    """Сателлит паттерна с компаньоном и нулевым оснащением.

    Сырое число перекрёстков cr(P) + 4 cr(D'_K); после сокращения блоков петель
    не больше cr(P) + 6 cr(K).
    """
    _require_knot(companion)
    wrap = wrapping_number(pattern)
    if wrap < 2:
        raise WrappingTooSmall("Число обмотки паттерна должно быть не меньше 2", {"wrapping": wrap})
    knot_case = pattern.diagram.component_count == 1
    if knot_case and wrap != 2:
        raise WrappingTooSmall("Для паттерна-узла нужно число обмотки ровно 2", {"wrapping": wrap})

    base, trace = normalize_writhe(companion)
    kinks = abs(writhe(companion))
    framing = _double_lk(base)
    band = None
    if not base.crossings:
        out = pattern.diagram
    else:
        out, band = _splice(pattern, base)
    raw_count = out.crossing_count
    if reduce and base.crossings:
        out, reduce_trace = reduce_kink_quadruples(out)
        trace.extend(reduce_trace)
    trace.before = companion.crossing_count
    result = SatelliteResult(
        diagram=out,
        raw_crossings=raw_count,
        reduced_crossings=out.crossing_count,
        companion_crossings=companion.crossing_count,
        normalized_companion_crossings=base.crossing_count,
        pattern_crossings=pattern.diagram.crossing_count,
        framing_lk=framing,
        wrapping=wrap,
        reliable=is_reliable(pattern),
        knot_case=knot_case,
        kinks=kinks,
        trace=trace,
        band=band,
    )
    logger.info(
        f"[SATELLITE] Паттерн {result.pattern_crossings} x компаньон {result.companion_crossings}: "
        f"raw={raw_count}, reduced={result.reduced_crossings}, граница={result.bound}"
    )
    return result


def _splice(pattern: AnnularDiagram, base: Diagram) -> Tuple[Diagram, CompanionBand]:
    """Вклейка внешнего тэнгла паттерна в удвоение base вдоль наименьшего ребра.

    Вместе с диаграммой возвращает меридиан ленты у наибольшего ребра base.
    """
    _, outside = extract_tangle(pattern.diagram, pattern.disk)
    parts = _double_parts(base)
    star = min(base.labels)
    raw: List[List[Hashable]] = [[("p", x) for x in t] for t in outside.crossings]
    offset = len(raw)
    double_raw = [list(t) for t in parts.raw]
    for side in ("L", "R"):
        for role in ("head", "tail"):
            c, s = parts.ends[(star, side, role)]
            double_raw[c][s] = ("cut", side, role)
    raw.extend(double_raw)
    nw, ne, se, sw = (("p", x) for x in outside.boundary)
    joins = [
        (nw, ("cut", "L", "tail")),
        (ne, ("cut", "L", "head")),
        (se, ("cut", "R", "head")),
        (sw, ("cut", "R", "tail")),
    ]
    parent: Dict[Hashable, Hashable] = {}

    def find(x: Hashable) -> Hashable:
        while parent.get(x, x) != x:
            x = parent[x]
        return x

    for a, b in joins:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    merged = [[find(x) for x in t] for t in raw]
    alive = {x for t in merged for x in t}
    closed = len({find(x) for pair in joins for x in pair} - alive)
    shift = {c: c + offset for c in range(len(parts.raw))}
    tags = [t for t in (tag.remapped(shift, {}) for tag in parts.tags) if t is not None]
    out = build_diagram(merged, loops=outside.loops + closed, tags=tags, relabel=True)
    labels = relabel_map(merged)
    edge = max(base.labels)
    strands = tuple(labels[("d", edge, side)] for side in ("L", "R"))
    return out, CompanionBand(edge, strands, tuple(out.component_of(s) for s in strands))


def cable(companion: Diagram, clasp_sign: Optional[int] = None) -> SatelliteResult:
    """Удвоение по доске плюс один перекрёсток, сшивающий копии в узел: 4 cr + 1"""
    _require_knot(companion)
    sign = config.CLASP_SIGN if clasp_sign is None else clasp_sign
    if sign not in (1, -1):
        raise InvalidDisk("Знак перекрёстка кабеля должен быть ±1", {"clasp_sign": sign})
    if not companion.crossings:
        raise NotAKnot("Кабель строится по диаграмме с перекрёстками", {"crossings": 0})
    parts = _double_parts(companion)
    star = min(companion.labels)
    raw = [list(t) for t in parts.raw]
    cut = {}
    for side in ("L", "R"):
        for role in ("head", "tail"):
            c, s = parts.ends[(star, side, role)]
            cut[(side, role)] = ("clasp", side, role)
            raw[c][s] = cut[(side, role)]
    t_l, h_l = cut[("L", "tail")], cut[("L", "head")]
    t_r, h_r = cut[("R", "tail")], cut[("R", "head")]
    clasp = [t_r, h_r, h_l, t_l] if sign > 0 else [t_l, t_r, h_r, h_l]
    raw.append(clasp)
    out = build_diagram(raw, loops=parts.loops, relabel=True)
    framing = _double_lk(companion)
    logger.info(f"[SATELLITE] Кабель: {companion.crossing_count} -> {out.crossing_count} перекрёстков")
    return SatelliteResult(
        diagram=out,
        raw_crossings=out.crossing_count,
        reduced_crossings=out.crossing_count,
        companion_crossings=companion.crossing_count,
        normalized_companion_crossings=companion.crossing_count,
        pattern_crossings=1,
        framing_lk=framing,
        wrapping=2,
        knot_case=True,
    )
