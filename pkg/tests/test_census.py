# tests/test_census.py
from functools import lru_cache
from itertools import combinations, permutations, product

import networkx as nx
import pytest

from census import CensusRow, CensusTable, enumerate_diagrams, shadow_diagram, shadows
from diagram_core import parse_pd, unknot
from errors import BudgetExceeded, TableMismatch
from invariants import invariant_fingerprint
from tests.diagrams import TREFOIL

ORACLE_NS = [1, 2, 3, 4]


# === НЕЗАВИСИМЫЙ ПЕРЕБОР: все паросочетания дротиков ===

def _rot(x, k):
    return 4 * (x // 4) + (x % 4 + k) % 4


def _matchings(darts):
    if not darts:
        yield []
        return
    first = darts[0]
    for i in range(1, len(darts)):
        rest = darts[1:i] + darts[i + 1:]
        for m in _matchings(rest):
            yield [(first, darts[i])] + m


def _alpha(pairs, size):
    out = [0] * size
    for x, y in pairs:
        out[x], out[y] = y, x
    return tuple(out)


def _face_count(alpha):
    seen = set()
    count = 0
    for start in range(len(alpha)):
        if start in seen:
            continue
        count += 1
        x = start
        while x not in seen:
            seen.add(x)
            x = _rot(alpha[x], 1)
    return count


def _graph(alpha):
    g = nx.MultiGraph()
    g.add_nodes_from(range(len(alpha) // 4))
    for x, y in enumerate(alpha):
        if x < y:
            g.add_edge(x // 4, y // 4, key=x)
    return g


def _two_edge_connected(alpha):
    g = _graph(alpha)
    edges = list(g.edges(keys=True))
    for (a1, b1, k1), (a2, b2, k2) in combinations(edges, 2):
        h = g.copy()
        h.remove_edge(a1, b1, key=k1)
        h.remove_edge(a2, b2, key=k2)
        if not nx.is_connected(h):
            return False
    return True


def _group(n):
    for perm in permutations(range(n)):
        for rots in product(range(4), repeat=n):
            for refl in (1, -1):
                yield perm, rots, refl


def _apply(alpha, t):
    perm, rots, refl = t

    def move(x):
        v, j = divmod(x, 4)
        return 4 * perm[v] + (refl * (j - rots[v])) % 4

    out = [0] * len(alpha)
    for x, y in enumerate(alpha):
        out[move(x)] = move(y)
    return tuple(out)


def _flips(refl, mirror_identify):
    if mirror_identify:
        return (0, 1)
    return (0,) if refl > 0 else (1,)


@lru_cache(maxsize=None)
def oracle_shadows(n):
    """Классы плоских связных карт замыканием орбит по всей группе перенумераций"""
    group = list(_group(n))
    seen = set()
    classes = []
    for pairs in _matchings(list(range(4 * n))):
        alpha = _alpha(pairs, 4 * n)
        if alpha in seen:
            continue
        if not nx.is_connected(_graph(alpha)) or _face_count(alpha) != n + 2:
            continue
        orbit = {_apply(alpha, t) for t in group}
        seen |= orbit
        classes.append(min(orbit))
    return tuple(classes)


def oracle_counts(n, mirror_identify):
    """(тени, простые тени, диаграммы) прямым перебором"""
    group = list(_group(n))
    classes = oracle_shadows(n)
    prime = [a for a in classes if _two_edge_connected(a)]
    diagrams = 0
    for rep in prime:
        stab = [t for t in group if _apply(rep, t) == rep]
        seen = set()
        for bits in product((0, 1), repeat=n):
            orbit = []
            for perm, rots, refl in stab:
                for flip in _flips(refl, mirror_identify):
                    moved = [0] * n
                    for v in range(n):
                        moved[perm[v]] = bits[v] ^ (rots[v] % 2) ^ flip
                    orbit.append(tuple(moved))
            seen.add(min(orbit))
        diagrams += len(seen)
    return len(classes), len(prime), diagrams


# === ПЕРЕПИСЬ ===

@pytest.fixture(scope="module")
def table3():
    return enumerate_diagrams(3, mirror_identify=True, workers=1)


def test_first_row(table3):
    assert table3.row(1) == CensusRow(1, 1, 1, 1, 1, 1, 1)
    unknot_key = invariant_fingerprint(unknot(), True).key()
    assert table3.buckets[unknot_key] == 1


def test_first_row_without_mirror_identification():
    table = enumerate_diagrams(1, mirror_identify=False, workers=1)
    row = table.row(1)
    assert (row.shadows, row.diagrams, row.buckets) == (1, 2, 1)


def test_trefoil_appears_at_three(table3):
    key = invariant_fingerprint(parse_pd(TREFOIL), True).key()
    assert table3.buckets[key] == 3


def test_table_is_consistent(table3):
    assert table3.validate() == []
    assert table3.cumulative[-1] == sum(table3.p)
    assert table3.cumulative[-1] == len(table3.buckets)


def test_parallel_run_is_identical(table3):
    parallel = enumerate_diagrams(3, mirror_identify=True, workers=2)
    assert parallel.to_text() == table3.to_text()


def test_four_crossings_are_deterministic():
    serial = enumerate_diagrams(4, mirror_identify=True, workers=1).to_text()
    assert enumerate_diagrams(4, mirror_identify=True, workers=1).to_text() == serial
    assert enumerate_diagrams(4, mirror_identify=True, workers=3).to_text() == serial


@pytest.mark.parametrize("n", ORACLE_NS)
@pytest.mark.parametrize("mirror_identify", [True, False])
def test_counts_match_brute_force(n, mirror_identify):
    row = enumerate_diagrams(n, mirror_identify=mirror_identify, workers=1).row(n)
    assert (row.shadows, row.prime_shadows, row.diagrams) == oracle_counts(n, mirror_identify)


def test_shadow_diagrams_are_connected():
    for n in (1, 2, 3):
        for alpha in shadows(n):
            d = shadow_diagram(alpha)
            assert d.crossing_count == n
            assert d.is_connected()


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded) as info:
        enumerate_diagrams(5, budget=4)
    assert info.value.exit_code == 4


# === ФАЙЛ ТАБЛИЦЫ ===

def test_save_load_save_is_byte_stable(tmp_path, table3):
    path = tmp_path / "census.csk"
    table3.save(str(path))
    first = path.read_bytes()
    CensusTable.load(str(path)).save(str(path))
    assert path.read_bytes() == first
    again = CensusTable.load(str(path))
    assert again.rows == table3.rows
    assert again.provenance["mirror_identify"] is True


def test_tampered_row_is_detected(tmp_path):
    path = tmp_path / "census.csk"
    enumerate_diagrams(2, workers=1).save(str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    i = next(k for k, line in enumerate(lines) if line.startswith("2\t"))
    parts = lines[i].split("\t")
    parts[3] = str(int(parts[3]) + 1)
    lines[i] = "\t".join(parts)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(TableMismatch):
        enumerate_diagrams(2, workers=1).save(str(path))


def test_mirror_setting_must_match(tmp_path):
    path = tmp_path / "census.csk"
    enumerate_diagrams(1, mirror_identify=True, workers=1).save(str(path))
    with pytest.raises(TableMismatch):
        enumerate_diagrams(1, mirror_identify=False, workers=1).save(str(path))


def test_append_extends_the_table(tmp_path, table3):
    path = tmp_path / "census.csk"
    enumerate_diagrams(2, workers=1).save(str(path))
    merged = table3.save(str(path))
    assert [r.n for r in merged.rows] == [1, 2, 3]
    loaded = CensusTable.load(str(path))
    assert loaded.validate() == []
    assert loaded.provenance["n_max"] == 3


def test_missing_header_is_rejected():
    with pytest.raises(TableMismatch):
        CensusTable.from_text("# app: uzel\n1\t1\t1\t1\t1\t1\t1\n")
