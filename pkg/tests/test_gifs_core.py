from fractions import Fraction

import pytest

from errors import ModelError
from ftc_core import IteratedFunctionSystem, explore_types
from geometry import ConvexPolygon, Similitude
from gifs_core import GifsModel, GraphEdge, explore_types_gifs, validate_invariance
from model_io import preset

THIRD = Fraction(1, 3)


def _edge(name, source, target, shift):
    return GraphEdge(name, source, target, Similitude.homothety(THIRD, (shift,)))


def test_model_validation():
    unit = ConvexPolygon.interval(0, 1)
    with pytest.raises(ModelError):
        GifsModel(0, (_edge("e1", 0, 0, 0),), ())
    with pytest.raises(ModelError):
        GifsModel(2, (_edge("e1", 0, 0, 0),), (unit,))
    with pytest.raises(ModelError):
        GifsModel(1, (), (unit,))
    with pytest.raises(ModelError):
        GifsModel(1, (_edge("e1", 0, 0, 0), _edge("e1", 0, 0, THIRD)), (unit,))


def test_vertex_without_outgoing_edge_is_rejected():
    unit = ConvexPolygon.interval(0, 1)
    model = GifsModel(2, (_edge("e1", 0, 1, 0), _edge("e2", 0, 0, THIRD)), (unit, unit))
    with pytest.raises(ModelError):
        validate_invariance(model)


def test_edge_pointing_outside_the_graph_is_rejected():
    unit = ConvexPolygon.interval(0, 1)
    model = GifsModel(1, (_edge("e1", 0, 3, 0),), (unit,))
    with pytest.raises(ModelError):
        model.as_directed()


def test_from_ifs_matches_ifs_exploration(sierpinski):
    system = sierpinski.system
    assert isinstance(system, IteratedFunctionSystem)
    as_graph = GifsModel.from_ifs(system)
    assert as_graph.t == 1
    assert [e.id for e in as_graph.edges] == ["e1", "e2", "e3"]
    assert explore_types_gifs(as_graph).productions() == explore_types(system).productions()


def test_twin_cantor_keeps_components_apart():
    model = preset("twin_cantor")
    automaton = explore_types_gifs(model.system)
    assert automaton.q == 2
    assert automaton.root_ids == (0, 1)
    assert automaton.productions() == ["T1 -> 2*T1", "T2 -> 2*T2"]


def test_edges_between(torus):
    graph = torus.system
    assert [e.id for e in graph.edges_between(0, 0)] == ["e1", "e2", "e3"]
    assert [e.id for e in graph.edges_between(0, 1)] == ["e4"]
    assert [e.id for e in graph.edges_between(1, 0)] == ["e8"]


def test_graph_words_are_printed_with_edge_ids(torus_automaton):
    assert torus_automaton.format_word((0, 3)) == "e1e4"
    assert torus_automaton.format_word(()) == "()"


def test_invariance_report_lists_every_edge(torus):
    report = validate_invariance(torus.system)
    assert report.checked == tuple(f"e{i}" for i in range(1, 9))
