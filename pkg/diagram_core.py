# diagram_core.py - диаграммы зацеплений как комбинаторные карты (PD-коды, грани, writhe, зацепления)
"""
Диаграмма хранится как список перекрёстков X(a,b,c,d): метки рёбер против часовой
стрелки, начиная с входящего нижнего ребра. Слоты 0 и 2 - нижняя нить, 1 и 3 - верхняя.
Компоненты без перекрёстков хранятся счётчиком ``loops``.
"""

import re
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from errors import EmptyDiagram, FixedOrientation, MalformedCode, NonPlanar

logger = logging.getLogger(__name__)

Position = Tuple[int, int]
Crossing = Tuple[int, int, int, int]

_TOKEN = re.compile(r"X\s*[\(\[]\s*([^\)\]]*)[\)\]]|O(?:\s*\(\s*\))?|\S+")


@dataclass(frozen=True)
class KinkTag:
    """Группа перекрёстков, возникшая из петли R1 (kind="kink") или её удвоения (kind="quadruple")"""
    crossings: Tuple[int, ...]
    internal: FrozenSet[Position]
    sign: int
    kind: str = "kink"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "sign": self.sign,
            "crossings": list(self.crossings),
            "internal": sorted([list(p) for p in self.internal]),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "KinkTag":
        return cls(
            crossings=tuple(int(c) for c in data["crossings"]),
            internal=frozenset((int(c), int(s)) for c, s in data["internal"]),
            sign=int(data["sign"]),
            kind=data.get("kind", "kink"),
        )

    def remapped(self, index_map: Dict[int, int], shifts: Dict[int, int]) -> Optional["KinkTag"]:
        """Перенос на новую нумерацию; shifts[c] = k значит, что кортеж повёрнут влево на k"""
        if any(c not in index_map for c in self.crossings):
            return None
        internal = frozenset(
            (index_map[c], (s - shifts.get(c, 0)) % 4) for c, s in self.internal
        )
        return KinkTag(tuple(index_map[c] for c in self.crossings), internal, self.sign, self.kind)


@dataclass(frozen=True)
class HalfEdge:
    """Полуребро: конец ребра в слоте перекрёстка; successor - следующее вдоль нити"""
    id: int
    crossing: int
    slot: int
    successor: int


@dataclass(frozen=True)
class LinkingMatrix:
    """Симметричная матрица: вне диагонали - коэффициенты зацепления, на диагонали - writhe компоненты"""
    matrix: np.ndarray = field(compare=False)
    components: int = 0

    def lk(self, i: int, j: int) -> int:
        return int(self.matrix[i, j])

    def to_dict(self) -> Dict[str, Any]:
        return {"components": self.components, "matrix": self.matrix.astype(int).tolist()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinkingMatrix):
            return NotImplemented
        return self.components == other.components and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash((self.components, tuple(map(tuple, self.matrix.tolist()))))


class UnionFind:
    """Система непересекающихся множеств над произвольными метками"""

    def __init__(self, items: Iterable[Hashable] = ()):
        self.parent: Dict[Hashable, Hashable] = {}
        for item in items:
            self.parent[item] = item

    def find(self, x: Hashable) -> Hashable:
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: Hashable, b: Hashable) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


@dataclass(frozen=True)
class Diagram:
    """Связная (или помеченная как несвязная) диаграмма зацепления на сфере"""
    crossings: Tuple[Crossing, ...]
    loops: int = 0
    tags: Tuple[KinkTag, ...] = ()

    # --- базовые свойства ---

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)

    def label_at(self, pos: Position) -> int:
        return self.crossings[pos[0]][pos[1]]

    @cached_property
    def _positions(self) -> Dict[int, Tuple[Position, Position]]:
        occ: Dict[int, List[Position]] = {}
        for c, tup in enumerate(self.crossings):
            for s, label in enumerate(tup):
                occ.setdefault(label, []).append((c, s))
        return {label: (ps[0], ps[1]) for label, ps in occ.items()}

    @property
    def labels(self) -> List[int]:
        return sorted(self._positions)

    def positions(self, label: int) -> Tuple[Position, Position]:
        return self._positions[label]

    def other_end(self, pos: Position) -> Position:
        a, b = self._positions[self.label_at(pos)]
        return b if a == pos else a

    # --- ориентация ---

    @cached_property
    def _orientation(self) -> Tuple[Dict[int, Position], Dict[int, Position], List[List[int]]]:
        """Голова и хвост каждого ребра и компоненты (списки меток вдоль ориентации)"""
        head: Dict[int, Position] = {}
        tail: Dict[int, Position] = {}
        comps: List[List[int]] = []
        seen: set = set()
        for start_label in self.labels:
            if start_label in seen:
                continue
            strand = _strand_positions(self, self._positions[start_label][0])
            members = {self.label_at(p) for p in strand}
            under = sorted(p for p in strand if p[1] in (0, 2))
            if under:
                entry = (under[0][0], 0)
            else:
                low = min(members)
                first = min(self._positions[low])
                entry = self.other_end(first)
            order: List[int] = []
            pos = entry
            while True:
                label = self.label_at(pos)
                head[label] = pos
                tail[label] = self.other_end(pos)
                order.append(label)
                pos = self.other_end((pos[0], (pos[1] + 2) % 4))
                if pos == entry:
                    break
            # список начинается с наименьшей метки
            k = order.index(min(order))
            comps.append(order[k:] + order[:k])
            seen.update(members)
        comps.sort(key=lambda labels: labels[0])
        return head, tail, comps

    def head(self, label: int) -> Position:
        """Позиция, в которой ребро входит в перекрёсток"""
        return self._orientation[0][label]

    def tail(self, label: int) -> Position:
        return self._orientation[1][label]

    @property
    def components(self) -> List[List[int]]:
        return self._orientation[2]

    @property
    def component_count(self) -> int:
        return len(self.components) + self.loops

    @cached_property
    def _component_of(self) -> Dict[int, int]:
        return {label: i for i, comp in enumerate(self.components) for label in comp}

    def component_of(self, label: int) -> int:
        return self._component_of[label]

    def crossing_components(self, c: int) -> Tuple[int, int]:
        """(компонента нижней нити, компонента верхней нити)"""
        tup = self.crossings[c]
        return self.component_of(tup[0]), self.component_of(tup[1])

    @cached_property
    def signs(self) -> Tuple[int, ...]:
        out = []
        for c, tup in enumerate(self.crossings):
            over_in = self.head(tup[3]) == (c, 3)
            out.append(1 if over_in else -1)
        return tuple(out)

    def is_connected(self) -> bool:
        if not self.crossings:
            return self.loops == 1
        return self.loops == 0 and nx.is_connected(crossing_graph(self))

    # --- сериализация ---

    def to_dict(self) -> Dict[str, Any]:
        return {
            "crossings": [list(t) for t in self.crossings],
            "loops": self.loops,
            "tags": [t.to_dict() for t in self.tags],
            "orientation": [list(comp) for comp in self.components],
            "signs": list(self.signs),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Diagram":
        """Метки рёбер сохраняются; orientation и signs только сверяются с пересчитанными"""
        tags = tuple(KinkTag.from_dict(t) for t in data.get("tags", []))
        d = build_diagram(data.get("crossings", []), loops=int(data.get("loops", 0)), tags=tags, relabel=False)
        if "orientation" in data and [list(c) for c in data["orientation"]] != d.components:
            raise MalformedCode("Поле orientation не совпадает с ориентацией по перекрёсткам",
                                {"stored": data["orientation"], "derived": d.components})
        if "signs" in data and list(data["signs"]) != list(d.signs):
            raise MalformedCode("Поле signs не совпадает со знаками по перекрёсткам",
                                {"stored": data["signs"], "derived": list(d.signs)})
        return d

    @classmethod
    def from_json(cls, text: str) -> "Diagram":
        return cls.from_dict(json.loads(text))

    def __str__(self) -> str:
        return emit_pd(self, canonical=False)


# === ПОСТРОЕНИЕ ===

def _strand_positions(d: Diagram, entry: Position) -> List[Position]:
    """Все позиции, которые проходит нить, вошедшая в перекрёсток в entry"""
    out: List[Position] = []
    pos = entry
    while True:
        exit_pos = (pos[0], (pos[1] + 2) % 4)
        out.extend([pos, exit_pos])
        pos = d.other_end(exit_pos)
        if pos == entry:
            return out


def _rotate(tup: Sequence[Any], k: int) -> Tuple[Any, ...]:
    return tuple(tup[(i + k) % 4] for i in range(4))


def relabel_map(raw: Sequence[Sequence[Hashable]]) -> Dict[Hashable, int]:
    """Метки 1..2n в порядке первого появления, как их раздаёт build_diagram(relabel=True)"""
    mapping: Dict[Hashable, int] = {}
    for tup in raw:
        for label in tup:
            mapping.setdefault(label, len(mapping) + 1)
    return mapping


def build_diagram(raw: Sequence[Sequence[Hashable]], loops: int = 0,
                  tags: Sequence[KinkTag] = (), relabel: bool = True,
                  check_planar: bool = True,
                  head_hints: Optional[Dict[Hashable, Position]] = None) -> Diagram:
    """Проверка и нормализация сырого набора перекрёстков.

    Метки могут быть любыми хешируемыми значениями; при relabel=True они
    переводятся в 1..2n в порядке первого появления. Кортежи поворачиваются так,
    чтобы слот 0 был входящим нижним ребром.

    head_hints: метка -> позиция (в координатах raw), в которую ребро входит.
    Компонента с подсказкой сохраняет это направление, иначе направление
    задаёт первый перекрёсток, где она идёт снизу.
    """
    if not raw and loops <= 0:
        raise EmptyDiagram("Пустая диаграмма")
    counts: Dict[Hashable, int] = {}
    for tup in raw:
        if len(tup) != 4:
            raise MalformedCode(f"Перекрёсток {tuple(tup)} должен иметь 4 ребра")
        for label in tup:
            counts[label] = counts.get(label, 0) + 1
    bad = {str(k): v for k, v in counts.items() if v != 2}
    if bad:
        raise MalformedCode("Каждая метка ребра должна встречаться ровно дважды", {"counts": bad})
    if relabel:
        mapping = relabel_map(raw)
    else:
        if any(not isinstance(k, int) or isinstance(k, bool) or k <= 0 for k in counts):
            raise MalformedCode("Метки рёбер должны быть положительными целыми")
        mapping = {label: label for label in counts}
    crossings = tuple(tuple(mapping[x] for x in tup) for tup in raw)
    draft = Diagram(crossings=crossings, loops=loops)  # type: ignore[arg-type]
    hints = {mapping[k]: tuple(v) for k, v in (head_hints or {}).items() if k in mapping}

    # нормализация направлений нижних нитей
    shifts: Dict[int, int] = {}
    seen: set = set()
    for label in draft.labels:
        if label in seen:
            continue
        strand = _strand_positions(draft, draft.positions(label)[0])
        seen.update(draft.label_at(p) for p in strand)
        under = sorted(p for p in strand if p[1] in (0, 2))
        if not under:
            continue
        hinted = sorted(hints[draft.label_at(p)] for p in strand
                        if hints.get(draft.label_at(p)) in draft.positions(draft.label_at(p)))
        entry = hinted[0] if hinted else (under[0][0], 0)
        pos = entry
        while True:
            if pos[1] == 2:
                shifts[pos[0]] = 2
            pos = draft.other_end((pos[0], (pos[1] + 2) % 4))
            if pos == entry:
                break
    if shifts:
        logger.debug(f"[PD] Поворот кортежей для согласования ориентации: {sorted(shifts)}")
        crossings = tuple(_rotate(t, shifts.get(c, 0)) for c, t in enumerate(crossings))
    index_map = {c: c for c in range(len(crossings))}
    new_tags = tuple(t for t in (tag.remapped(index_map, shifts) for tag in tags) if t is not None)
    d = Diagram(crossings=crossings, loops=loops, tags=new_tags)  # type: ignore[arg-type]
    if check_planar and d.crossings:
        pieces = nx.number_connected_components(crossing_graph(d))
        face_orbits = len(_face_orbits(d))
        if face_orbits != d.crossing_count + 2 * pieces:
            raise NonPlanar(
                "Система вращений не вкладывается в сферу",
                {"crossings": d.crossing_count, "faces": face_orbits, "pieces": pieces},
            )
    return d


def parse_pd(text: str) -> Diagram:
    """Разбор PD-кода: X(a,b,c,d) через пробелы, O - компонента без перекрёстков"""
    if text is None or not text.strip():
        raise EmptyDiagram("Пустой PD-код")
    raw: List[Tuple[int, ...]] = []
    loops = 0
    if text.lstrip().startswith("["):
        return _parse_nested_list(text)
    for m in _TOKEN.finditer(text):
        token = m.group(0)
        if token.startswith("X"):
            parts = [p.strip() for p in (m.group(1) or "").split(",") if p.strip()]
            try:
                raw.append(tuple(int(p) for p in parts))
            except ValueError:
                raise MalformedCode(f"Нечисловая метка в {token}")
        elif token.startswith("O") and re.fullmatch(r"O(\s*\(\s*\))?", token):
            loops += 1
        else:
            raise MalformedCode(f"Непонятный токен {token!r}")
    if not raw and loops == 0:
        raise EmptyDiagram("В PD-коде нет ни одного перекрёстка")
    return build_diagram(raw, loops=loops, relabel=False)


def _parse_nested_list(text: str) -> Diagram:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedCode(f"Не удалось разобрать список перекрёстков: {e}")
    if not isinstance(data, list) or not all(isinstance(t, list) for t in data):
        raise MalformedCode("Ожидается список кортежей [[a,b,c,d], ...]")
    if not data:
        raise EmptyDiagram("В PD-коде нет ни одного перекрёстка")
    return build_diagram([tuple(t) for t in data], relabel=False)


def canonical(d: Diagram) -> Diagram:
    """Перенумерация рёбер 1..2n вдоль ориентации компонент"""
    mapping: Dict[int, int] = {}
    for comp in d.components:
        for label in comp:
            mapping[label] = len(mapping) + 1
    crossings = tuple(tuple(mapping[x] for x in t) for t in d.crossings)
    return Diagram(crossings=crossings, loops=d.loops, tags=d.tags)  # type: ignore[arg-type]


def emit_pd(d: Diagram, canonical_labels: bool = True, canonical: Optional[bool] = None) -> str:
    """PD-текст; по умолчанию в канонической нумерации"""
    if canonical is not None:
        canonical_labels = canonical
    src = _canonical(d) if canonical_labels else d
    tokens = ["X(%d,%d,%d,%d)" % t for t in src.crossings]
    tokens.extend("O" for _ in range(d.loops))
    return " ".join(tokens)


_canonical = canonical


def unknot(loops: int = 1) -> Diagram:
    return Diagram(crossings=(), loops=loops)


# === ОПЕРАЦИИ ===

def faces(d: Diagram) -> List[Tuple[Position, ...]]:
    """Граничные обходы граней (дротики (перекрёсток, слот), грань справа от дротика).

    Свободная петля добавляет одну пустую грань; у диаграммы из k петель k+1 грань.
    """
    if not d.crossings:
        return [() for _ in range(d.loops + 1)]
    return _face_orbits(d) + [() for _ in range(d.loops)]


def _face_orbits(d: Diagram) -> List[Tuple[Position, ...]]:
    seen: set = set()
    out: List[Tuple[Position, ...]] = []
    for c in range(d.crossing_count):
        for s in range(4):
            if (c, s) in seen:
                continue
            orbit = []
            dart = (c, s)
            while dart not in seen:
                seen.add(dart)
                orbit.append(dart)
                c2, s2 = d.other_end(dart)
                dart = (c2, (s2 + 1) % 4)
            out.append(tuple(orbit))
    return out


def dart_faces(d: Diagram) -> Dict[Position, int]:
    """Номер грани для каждого дротика"""
    return {dart: i for i, face in enumerate(_face_orbits(d)) for dart in face}


def edge_faces(d: Diagram) -> Dict[int, Tuple[int, int]]:
    """Для каждого ребра: (грань справа от направления ребра, грань слева)"""
    owner = dart_faces(d)
    out = {}
    for label in d.labels:
        out[label] = (owner[d.tail(label)], owner[d.head(label)])
    return out


def writhe(d: Diagram) -> int:
    return sum(d.signs)


def crossing_signs(d: Diagram) -> Tuple[int, ...]:
    return d.signs


def components(d: Diagram) -> List[List[int]]:
    return d.components


def half_edges(d: Diagram) -> List[HalfEdge]:
    """Полурёбра с отображением successor; оно биективно"""
    out = []
    for c in range(d.crossing_count):
        for s in range(4):
            label = d.label_at((c, s))
            if d.head(label) == (c, s):
                nxt = (c, (s + 2) % 4)
            else:
                nxt = d.head(label)
            out.append(HalfEdge(id=4 * c + s, crossing=c, slot=s, successor=4 * nxt[0] + nxt[1]))
    return out


def linking_matrix(d: Diagram) -> LinkingMatrix:
    k = d.component_count
    m = np.zeros((k, k), dtype=np.int64)
    for c, sign in enumerate(d.signs):
        i, j = d.crossing_components(c)
        if i == j:
            m[i, i] += sign
        else:
            m[i, j] += sign
            m[j, i] += sign
    off = ~np.eye(k, dtype=bool)
    if np.any(m[off] % 2):
        raise NonPlanar("Нечётная сумма знаков между компонентами", {"matrix": m.tolist()})
    m[off] //= 2
    return LinkingMatrix(matrix=m, components=k)


def crossing_graph(d: Diagram) -> nx.MultiGraph:
    """Граф перекрёстков: ребро на каждую метку"""
    g = nx.MultiGraph()
    g.add_nodes_from(range(d.crossing_count))
    for label, ((c1, _), (c2, _)) in sorted(d._positions.items()):
        g.add_edge(c1, c2, key=label)
    return g


def mirror(d: Diagram) -> Diagram:
    """Смена верх/низ во всех перекрёстках, ориентация сохраняется"""
    raw = []
    shifts: Dict[int, int] = {}
    for c, tup in enumerate(d.crossings):
        k = 1 if d.head(tup[1]) == (c, 1) else 3
        shifts[c] = k
        raw.append(_rotate(tup, k))
    index_map = {c: c for c in range(d.crossing_count)}
    tags = []
    for tag in d.tags:
        moved = tag.remapped(index_map, shifts)
        if moved is not None:
            tags.append(KinkTag(moved.crossings, moved.internal, -moved.sign, moved.kind))
    return build_diagram(raw, loops=d.loops, tags=tags, relabel=False)


def reorient(d: Diagram, component: int) -> Diagram:
    """Обращение одной компоненты.

    Направление компоненты, которая нигде не идёт снизу, кортежами не хранится,
    поэтому для неё ход недоступен (FixedOrientation).
    """
    members = set(d.components[component])
    shifts = {c: 2 for c, t in enumerate(d.crossings) if t[0] in members}
    if not shifts:
        raise FixedOrientation("Компонента идёт только сверху, её направление задаётся правилом",
                               {"component": component})
    raw = [_rotate(t, shifts.get(c, 0)) for c, t in enumerate(d.crossings)]
    index_map = {c: c for c in range(d.crossing_count)}
    tags = [t for t in (tag.remapped(index_map, shifts) for tag in d.tags) if t is not None]
    return build_diagram(raw, loops=d.loops, tags=tags, relabel=False)


def splice_out(d: Diagram, removed: Iterable[int]) -> Tuple[List[Tuple[Hashable, ...]], int]:
    """Удаляет перекрёстки, соединяя нити напрямую.

    Возвращает сырые кортежи оставшихся перекрёстков (в исходном порядке) и число
    замкнувшихся петель без перекрёстков.
    """
    removed = set(removed)
    uf = UnionFind(d.labels)
    for c in removed:
        t = d.crossings[c]
        uf.union(t[0], t[2])
        uf.union(t[1], t[3])
    raw = [tuple(uf.find(x) for x in t) for c, t in enumerate(d.crossings) if c not in removed]
    alive = {x for t in raw for x in t}
    closed = {uf.find(x) for x in d.labels} - alive
    return raw, len(closed)


def kept_index_map(total: int, removed: Iterable[int]) -> Dict[int, int]:
    removed = set(removed)
    out: Dict[int, int] = {}
    for c in range(total):
        if c not in removed:
            out[c] = len(out)
    return out


def head_hints(old: Diagram, raw: Sequence[Sequence[Hashable]],
               kept: Dict[int, int]) -> Dict[Hashable, Position]:
    """Подсказки направлений для build_diagram по перекрёсткам, перенесённым без изменений.

    kept: новый индекс -> старый индекс; слоты перенесённых кортежей совпадают.
    """
    where: Dict[Hashable, List[Position]] = {}
    for c, tup in enumerate(raw):
        for s, label in enumerate(tup):
            where.setdefault(label, []).append((c, s))
    hints: Dict[Hashable, Position] = {}
    tails: Dict[Hashable, Position] = {}
    for nc, oc in kept.items():
        for s in range(4):
            label = raw[nc][s]
            if old.head(old.crossings[oc][s]) == (oc, s):
                hints[label] = (nc, s)
            else:
                tails[label] = (nc, s)
    for label, pos in tails.items():
        if label not in hints:
            others = [p for p in where[label] if p != pos]
            if others:
                hints[label] = others[0]
    return hints
