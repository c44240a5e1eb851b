from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from conftest import GOLDEN_FIXPOINT_LEVEL, GOLDEN_TYPES, PRINTED_TORUS_MATRIX, TORUS_PARTITION
from dimension import assemble_matrix, quotient_matrix
from errors import EquivalenceCheckFailed, FiniteTypeNotDetected, InvarianceError, ModelError
from ftc_core import (
    ExplorationLimits,
    IteratedFunctionSystem,
    LevelBuilder,
    build_level,
    check_representative_independence,
    closure_counts,
    explore_types,
    neighborhood,
    stopping_family,
    verify_condition_b,
    wsc_multiplicity_probe,
)
from geometry import ConvexPolygon, Similitude, compose

TORUS_PRODUCTIONS = [
    "T1 -> T2 + T3 + T4 + T5",
    "T2 -> T1 + T6 + T7 + T8",
    "T3 -> T2 + T3 + T4",
    "T4 -> T2 + 2*T4",
    "T5 -> T2 + 2*T4 + T5",
    "T6 -> T1 + T6 + T7",
    "T7 -> T1 + 2*T7",
    "T8 -> T1 + 2*T7 + T8",
]


def test_sierpinski_has_a_single_type(sierpinski_automaton):
    assert sierpinski_automaton.q == 1
    assert sierpinski_automaton.root_ids == (0,)
    assert sierpinski_automaton.fixpoint_level == 1
    assert sierpinski_automaton.productions() == ["T1 -> 3*T1"]


def test_torus_types_and_productions(torus_automaton):
    assert torus_automaton.q == 8
    assert torus_automaton.root_ids == (0, 1)
    assert torus_automaton.productions() == TORUS_PRODUCTIONS


def test_torus_counts_match_quotient_of_printed_matrix(torus_automaton):
    counts = assemble_matrix(torus_automaton).counts()
    np.testing.assert_array_equal(counts, quotient_matrix(PRINTED_TORUS_MATRIX, TORUS_PARTITION))


def test_exploration_is_deterministic(torus):
    first = explore_types(torus.directed(), torus.rule)
    second = explore_types(torus.directed(), torus.rule)
    assert first.to_json() == second.to_json()


def test_coinciding_compositions_keep_lexicographically_smallest_edge(torus):
    level = build_level(torus.directed(), torus.rule, 2)
    target = Similitude.homothety(Fraction(1, 4), (Fraction(1, 4), Fraction(3, 8)))
    index = next(
        i for i, v in enumerate(level.vertices) if v.map == target and v.initial == 0
    )
    vertex = level.vertices[index]
    assert vertex.smallest_word == (0, 2)

    incoming = [e for e in level.edges if e.child == index]
    assert len(incoming) == 2
    retained = [e for e in incoming if e.retained]
    assert len(retained) == 1
    parents = LevelBuilder(torus.directed(), torus.rule).build(1).vertices
    assert retained[0].word == (0,)
    assert parents[retained[0].parent].smallest_word == (1,)


def test_neighborhood_contains_the_vertex_itself(torus):
    builder = LevelBuilder(torus.directed(), torus.rule)
    vertices = builder.build(2).vertices
    regions = torus.directed().omegas
    for index, vertex in enumerate(vertices):
        members = neighborhood(vertex, vertices, regions)
        assert vertex in members
        assert len(members) == len(builder.neighborhoods(2)[index])


def test_every_vertex_is_classified_consistently(torus, torus_automaton):
    report = check_representative_independence(torus.directed(), torus_automaton, 3)
    assert report.ok, report.mismatches
    assert sum(report.vertices_checked.values()) > 0


def test_condition_b_re_expansion_agrees(torus, torus_automaton, golden, golden_automaton):
    assert verify_condition_b(torus.directed(), torus_automaton, 2) > 0
    assert verify_condition_b(golden.directed(), golden_automaton, 2) > 0


def test_condition_b_detects_diverging_representatives(golden, golden_automaton):
    node = next(n for n in golden_automaton.types if len(n.representatives) >= 2)
    first, second = node.representatives[:2]
    # one more factor ρ moves the second representative to a different normalized scale
    shifted = replace(second, map=compose(second.map, golden.directed().maps[0]))
    broken_node = replace(node, representatives=(first, shifted))
    types = tuple(broken_node if n.id == node.id else n for n in golden_automaton.types)
    broken = replace(golden_automaton, types=types)
    with pytest.raises(EquivalenceCheckFailed) as info:
        verify_condition_b(golden.directed(), broken, 2)
    assert info.value.message.startswith(node.label)


def test_golden_gasket_reaches_a_fixpoint(golden_automaton):
    assert golden_automaton.q == GOLDEN_TYPES
    assert golden_automaton.fixpoint_level == GOLDEN_FIXPOINT_LEVEL
    assert golden_automaton.rule.uses_scale
    assert all(node.scale is not None for node in golden_automaton.types)


def test_type_limit_reports_resource_error(torus):
    with pytest.raises(FiniteTypeNotDetected) as info:
        explore_types(torus.directed(), torus.rule, ExplorationLimits(max_types=2))
    assert info.value.exit_code == 2
    assert info.value.types_found == 2


def test_level_limit_reports_resource_error(torus):
    with pytest.raises(FiniteTypeNotDetected) as info:
        explore_types(torus.directed(), torus.rule, ExplorationLimits(max_level=1))
    assert info.value.level_reached == 1
    assert info.value.rule == "fixed_length"


def test_limits_must_be_positive():
    with pytest.raises(ValueError):
        ExplorationLimits(max_types=0)


def test_invariance_failure_names_the_map():
    system = IteratedFunctionSystem(
        (Similitude.homothety(Fraction(1, 2), (0,)), Similitude.homothety(Fraction(1, 2), (Fraction(3, 4),))),
        ConvexPolygon.interval(0, 1),
    )
    with pytest.raises(InvarianceError) as info:
        explore_types(system)
    assert info.value.edge == "f2"
    assert info.value.exit_code == 1


def test_non_contractive_map_is_rejected():
    with pytest.raises(ModelError):
        IteratedFunctionSystem((Similitude.homothety(1, (0,)),), ConvexPolygon.interval(0, 1))


def test_stopping_family_sizes(sierpinski):
    assert len(stopping_family(sierpinski.directed(), Fraction(1, 4))) == 9
    assert len(stopping_family(sierpinski.directed(), Fraction(1, 3))) == 9
    assert len(stopping_family(sierpinski.directed(), 1)) == 1
    with pytest.raises(ModelError):
        stopping_family(sierpinski.directed(), 0)


def test_stopping_family_merges_coinciding_maps(torus):
    family = stopping_family(torus.directed(), Fraction(1, 4))
    words = [m.word for m in family if m.initial == 0]
    # e1e3 and e2e1 are the same map
    assert (0, 2) in words
    assert (1, 0) not in words


def test_closure_counts_on_interior_points(sierpinski):
    family = stopping_family(sierpinski.directed(), Fraction(1, 2))
    points = np.array([[0.0, 0.75], [-0.25, 0.25], [0.25, 0.25]])
    counts = closure_counts(points, None, family, sierpinski.directed().omegas)
    assert counts.tolist() == [1, 1, 1]


def test_wsc_probe_on_supplied_points(sierpinski):
    points = np.array([[0.0, 0.95]])
    assert wsc_multiplicity_probe(sierpinski.directed(), Fraction(1, 8), points=points) == 1


def test_wsc_probe_samples_the_attractor(sierpinski):
    multiplicity = wsc_multiplicity_probe(sierpinski.directed(), Fraction(1, 8), samples=64)
    assert 1 <= multiplicity <= 3


@pytest.mark.parametrize("fixture_name", ["torus", "golden", "sierpinski"])
def test_wsc_multiplicity_stays_bounded_as_b_shrinks(fixture_name, request):
    model = request.getfixturevalue(fixture_name)
    sequence = [
        wsc_multiplicity_probe(model.directed(), Fraction(1, 2 ** k))
        for k in (3, 5, 7)
    ]
    assert all(1 <= m <= 8 for m in sequence), sequence
    assert sequence == sorted(sequence, reverse=True), sequence
