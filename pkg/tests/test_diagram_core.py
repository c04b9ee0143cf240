# tests/test_diagram_core.py
import pytest

from diagram_core import (
    Diagram,
    build_diagram,
    canonical,
    components,
    crossing_graph,
    edge_faces,
    emit_pd,
    faces,
    half_edges,
    linking_matrix,
    mirror,
    parse_pd,
    reorient,
    unknot,
    writhe,
)
from errors import EmptyDiagram, FixedOrientation, MalformedCode, NonPlanar, UsageError
from moves import normalize_writhe, r1_add
from tests.diagrams import GRANNY, HOPF, KINK, TREFOIL


def test_trefoil_parses_with_negative_writhe(trefoil):
    assert trefoil.crossing_count == 3
    assert trefoil.component_count == 1
    assert trefoil.signs == (-1, -1, -1)
    assert writhe(trefoil) == -3


def test_kink_sign_is_negative(kink):
    assert kink.signs == (-1,)
    assert kink.is_connected()


def test_mirror_flips_every_sign(trefoil, hopf):
    assert writhe(mirror(trefoil)) == 3
    assert [-s for s in hopf.signs] == list(mirror(hopf).signs)


def test_hopf_and_torus_link_linking(hopf, torus_link):
    lm = linking_matrix(hopf)
    assert lm.components == 2
    assert abs(lm.lk(0, 1)) == 1
    assert lm.lk(0, 1) == lm.lk(1, 0)
    assert abs(linking_matrix(torus_link).lk(0, 1)) == 2


def test_reorient_negates_linking(hopf):
    before = linking_matrix(hopf).lk(0, 1)
    after = linking_matrix(reorient(hopf, 0)).lk(0, 1)
    assert after == -before


def test_components_follow_orientation(trefoil, hopf):
    assert len(components(trefoil)) == 1
    assert sorted(len(c) for c in components(hopf)) == [2, 2]
    for comp in trefoil.components:
        for a, b in zip(comp, comp[1:] + comp[:1]):
            assert trefoil.tail(b)[0] == trefoil.head(a)[0]


def test_face_count_is_euler(trefoil, figure_eight, granny):
    for d in (trefoil, figure_eight, granny):
        assert len(faces(d)) == d.crossing_count + 2


def test_crossingless_faces():
    assert len(faces(unknot())) == 2
    assert len(faces(unknot(3))) == 4


def test_edge_faces_differ_on_each_side(figure_eight):
    for right, left in edge_faces(figure_eight).values():
        assert right != left


def test_half_edges_successor_is_a_bijection(trefoil):
    hes = half_edges(trefoil)
    assert len(hes) == 4 * trefoil.crossing_count
    successors = [h.successor for h in hes]
    assert sorted(successors) == sorted(h.id for h in hes)


def test_crossing_graph_keys_are_labels(trefoil):
    g = crossing_graph(trefoil)
    assert g.number_of_nodes() == 3
    assert sorted(k for _, _, k in g.edges(keys=True)) == trefoil.labels


def test_emit_then_parse_keeps_the_diagram(figure_eight):
    again = parse_pd(emit_pd(figure_eight))
    assert again.crossing_count == figure_eight.crossing_count
    assert again.signs == canonical(figure_eight).signs
    assert emit_pd(again) == emit_pd(figure_eight)


def test_emit_free_loops():
    assert emit_pd(unknot(2)) == "O O"
    assert parse_pd("O O").component_count == 2


def test_nested_list_form():
    d = parse_pd("[[1,4,2,5],[3,6,4,1],[5,2,6,3]]")
    assert emit_pd(d) == emit_pd(parse_pd(TREFOIL))


def test_json_mirror(hopf):
    data = hopf.to_dict()
    assert set(data) >= {"crossings", "loops", "tags"}
    again = Diagram.from_json(hopf.to_json())
    assert again.crossing_count == 2
    assert again.component_count == 2


@pytest.mark.parametrize("text,error", [
    ("", EmptyDiagram),
    ("   ", EmptyDiagram),
    ("X(1,2,3)", MalformedCode),
    ("X(1,1,1,2)", MalformedCode),
    ("X(1,2,a,b)", MalformedCode),
    ("hello world", MalformedCode),
    ("X(1,2,1,2)", NonPlanar),
])
def test_bad_codes_are_usage_errors(text, error):
    with pytest.raises(error) as info:
        parse_pd(text)
    assert isinstance(info.value, UsageError)
    assert info.value.exit_code == 2


def test_relabel_accepts_any_hashable_labels():
    d = build_diagram([["a", "d", "b", "e"], ["c", "f", "d", "a"], ["e", "b", "f", "c"]])
    assert d.labels == [1, 2, 3, 4, 5, 6]
    assert writhe(d) == -3


def test_hopf_text_round():
    assert parse_pd(HOPF).component_count == 2


# диаграмма-разделитель: окружность из рёбер 3, 4 дважды проходит над окружностью 1, 2
OVER_ONLY = "X(1,3,2,4) X(2,3,1,4)"


@pytest.mark.parametrize("text", [HOPF, TREFOIL, GRANNY, KINK, OVER_ONLY])
def test_json_mirror_keeps_labels(text):
    d = parse_pd(text)
    again = Diagram.from_dict(d.to_dict())
    assert again.crossings == d.crossings
    assert again.components == d.components
    assert again.signs == d.signs


def test_json_mirror_keeps_kink_tags(trefoil):
    d, _ = normalize_writhe(trefoil)
    again = Diagram.from_json(d.to_json())
    assert again.crossings == d.crossings
    assert again.tags == d.tags


KINK_MIRROR = {
    "crossings": [[1, 2, 2, 1]],
    "loops": 0,
    "tags": [{"kind": "kink", "sign": -1, "crossings": [0], "internal": [[0, 0], [0, 3]]}],
    "orientation": [[1, 2]],
    "signs": [-1],
}


def test_kink_mirror_matches_r1_on_circle():
    d = Diagram.from_dict(KINK_MIRROR)
    assert d.crossings == ((1, 2, 2, 1),)
    assert d.signs == (-1,)
    assert all(c < d.crossing_count for tag in d.tags for c in tag.crossings)
    assert d.to_dict() == r1_add(unknot(), sign=-1).to_dict() == KINK_MIRROR


def test_json_mirror_rejects_foreign_signs(hopf):
    data = hopf.to_dict()
    data["signs"] = [-s for s in data["signs"]]
    with pytest.raises(MalformedCode):
        Diagram.from_dict(data)


def test_json_mirror_rejects_foreign_orientation(trefoil):
    data = trefoil.to_dict()
    data["orientation"] = [list(reversed(data["orientation"][0]))]
    with pytest.raises(MalformedCode):
        Diagram.from_dict(data)


def test_reorient_needs_an_under_pass():
    d = parse_pd(OVER_ONLY)
    assert d.component_count == 2
    over = d.component_of(3)
    with pytest.raises(FixedOrientation) as info:
        reorient(d, over)
    assert info.value.exit_code == 3
    flipped = reorient(d, d.component_of(1))
    assert [-s for s in d.signs] == list(flipped.signs)
