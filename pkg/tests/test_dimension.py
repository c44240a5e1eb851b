import math
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from conftest import GOLDEN_ALPHA, LOG3_LOG2, PRINTED_TORUS_MATRIX, TORUS_ALPHA, TORUS_PARTITION
from dimension import (
    WeightedIncidenceMatrix,
    assemble_matrix,
    characteristic_polynomial_in,
    dimension_from_polynomial,
    lambda_grid,
    measure_defects,
    perron_measure,
    quotient_matrix,
    solve_dimension,
    spectral_radius,
    spectral_radius_at,
)
from errors import DegenerateModelError, MalformedAutomatonError, ModelError
from ftc_core import explore_types
from model_io import PRESETS, preset
from scalar import ONE, QuadScalar, golden_ratio_conjugate

HALF = QuadScalar(Fraction(1, 2))


MEASURED_PRESETS = ["sierpinski", "lau_ngai", "golden_gasket", "torus_gifs"]


@pytest.fixture(scope="module")
def solved():
    cache = {}

    def solve(name):
        if name not in cache:
            model = preset(name)
            automaton = explore_types(model.directed(), model.rule)
            result = solve_dimension(assemble_matrix(automaton), space_dim=model.space_dim)
            cache[name] = (model, automaton, result)
        return cache[name]

    return solve


def single(ratio, multiplicity):
    return WeightedIncidenceMatrix((((((ratio, multiplicity),),),)))


def test_single_type_matrix_gives_similarity_dimension():
    result = solve_dimension(single(HALF, 3), space_dim=2)
    assert result.alpha == pytest.approx(LOG3_LOG2, abs=1e-10)
    assert result.lambda_at_alpha == pytest.approx(1.0, abs=1e-9)
    assert result.perron_vector.tolist() == [1.0]


def test_degenerate_and_malformed_matrices():
    with pytest.raises(DegenerateModelError):
        solve_dimension(single(HALF, 1))
    empty = WeightedIncidenceMatrix((((),),))
    with pytest.raises(MalformedAutomatonError):
        solve_dimension(empty)


def test_matrix_validation():
    with pytest.raises(ModelError):
        single(QuadScalar(2), 1)
    with pytest.raises(ModelError):
        single(HALF, 0)
    with pytest.raises(ModelError):
        WeightedIncidenceMatrix(((((HALF, 1),), ()),))
    with pytest.raises(ModelError):
        WeightedIncidenceMatrix(())


def test_spectral_radius_examples():
    assert spectral_radius(np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx(1.0, abs=1e-12)
    assert spectral_radius(np.array([[2.0, 0.0], [0.0, 3.0]])) == pytest.approx(3.0, abs=1e-12)
    assert spectral_radius(np.zeros((2, 2))) == 0.0
    with pytest.raises(ValueError):
        spectral_radius(np.array([[1.0, -1.0], [0.0, 1.0]]))


def test_torus_dimension(torus_dimension):
    assert torus_dimension.alpha == pytest.approx(TORUS_ALPHA, abs=1e-10)
    assert torus_dimension.perron_vector[0] == 1.0
    assert np.all(torus_dimension.perron_vector > 0)


def test_solution_is_permutation_invariant(torus_automaton, torus_dimension):
    matrix = assemble_matrix(torus_automaton)
    reordered = matrix.permuted(list(reversed(range(matrix.q))))
    assert reordered.root_ids == (7, 6)
    alpha = solve_dimension(reordered, space_dim=2).alpha
    assert alpha == pytest.approx(torus_dimension.alpha, abs=1e-10)
    with pytest.raises(ValueError):
        matrix.permuted([0, 0, 1, 2, 3, 4, 5, 6])


def test_printed_matrix_has_the_same_dimension():
    counts = quotient_matrix(PRINTED_TORUS_MATRIX, TORUS_PARTITION)
    radius = spectral_radius(PRINTED_TORUS_MATRIX * 0.5 ** TORUS_ALPHA)
    assert radius == pytest.approx(1.0, abs=1e-10)
    assert spectral_radius(counts * 0.5 ** TORUS_ALPHA) == pytest.approx(1.0, abs=1e-10)


def test_quotient_requires_an_equitable_partition():
    with pytest.raises(ValueError):
        quotient_matrix(PRINTED_TORUS_MATRIX, [[0, 1], list(range(2, 12))])
    with pytest.raises(ValueError):
        quotient_matrix(PRINTED_TORUS_MATRIX, [[0], list(range(2, 12))])


def test_lambda_decreases_in_alpha(torus_automaton):
    values = lambda_grid(assemble_matrix(torus_automaton), 0.0, 3.0)
    assert len(values) == 20
    assert np.all(np.diff(values) < 0)
    assert values[0] == pytest.approx(2 + math.sqrt(2), abs=1e-10)


def test_polynomial_oracle_agrees(sierpinski_automaton, torus_automaton, torus_dimension):
    sierpinski_matrix = assemble_matrix(sierpinski_automaton)
    assert characteristic_polynomial_in(sierpinski_matrix, HALF) == [1, -3]
    assert dimension_from_polynomial([1, -3], HALF) == pytest.approx(LOG3_LOG2, abs=1e-12)

    coefficients = characteristic_polynomial_in(assemble_matrix(torus_automaton), HALF)
    assert dimension_from_polynomial(coefficients, HALF) == pytest.approx(torus_dimension.alpha, abs=1e-9)


def test_golden_gasket_dimension_below_similarity_bound(golden_automaton):
    matrix = assemble_matrix(golden_automaton)
    result = solve_dimension(matrix, space_dim=2)
    rho = golden_ratio_conjugate().to_float()
    similarity_bound = math.log(math.sqrt(2) - 1) / math.log(rho)
    assert 1.0 < result.alpha < similarity_bound
    assert spectral_radius_at(matrix, result.alpha) == pytest.approx(1.0, abs=1e-9)
    assert all(r in (ONE, golden_ratio_conjugate(), golden_ratio_conjugate() ** 2) for r in matrix.distinct_ratios())


def test_golden_gasket_polynomial_oracle(golden_automaton):
    matrix = assemble_matrix(golden_automaton)
    rho = golden_ratio_conjugate()
    coefficients = characteristic_polynomial_in(matrix, rho)
    expected = solve_dimension(matrix, space_dim=2).alpha
    assert dimension_from_polynomial(coefficients, rho) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("name, expected", [
    ("torus_ifs", 1.0),
    ("twin_cantor", math.log(2) / math.log(3)),
    ("cantor_interval", 1.0),
])
def test_small_models(name, expected):
    model = preset(name)
    automaton = explore_types(model.directed(), model.rule)
    result = solve_dimension(assemble_matrix(automaton), space_dim=model.space_dim)
    assert result.alpha == pytest.approx(expected, abs=1e-10)


def test_symbolic_entries_and_frame(sierpinski_automaton, tmp_path):
    matrix = assemble_matrix(sierpinski_automaton)
    assert matrix.symbolic(0, 0) == "3*(1/2)^a"
    frame = matrix.to_frame(LOG3_LOG2)
    assert list(frame.columns) == ["row", "col", "symbolic", "value"]
    assert frame.loc[0, "value"] == pytest.approx(1.0)

    target = matrix.to_csv(str(tmp_path / "matrix.csv"), LOG3_LOG2)
    loaded = pd.read_csv(target)
    assert loaded.loc[0, "symbolic"] == "3*(1/2)^a"


def test_perron_measure_is_additive(sierpinski, sierpinski_automaton, sierpinski_dimension):
    table = perron_measure(sierpinski.directed(), sierpinski_automaton, sierpinski_dimension, 3)
    assert len(table) == 1 + 3 + 9 + 27
    assert table.loc[0, "measure"] == pytest.approx(1.0)
    defects = measure_defects(table)
    assert defects["additivity"] < 1e-9
    assert defects["level_sum"] < 1e-9


def test_torus_measure_covers_both_components(torus, torus_automaton, torus_dimension):
    table = perron_measure(torus.directed(), torus_automaton, torus_dimension, 3)
    assert set(table["initial"]) == {1, 2}
    defects = measure_defects(table)
    assert defects["additivity"] < 1e-9
    assert defects["level_sum"] < 1e-9
    with pytest.raises(ValueError):
        perron_measure(torus.directed(), torus_automaton, torus_dimension, -1)


@pytest.mark.parametrize("name", MEASURED_PRESETS)
def test_measure_is_additive_to_depth_five(name, solved):
    model, automaton, result = solved(name)
    table = perron_measure(model.directed(), automaton, result, 5)
    assert table["level"].max() == 5
    defects = measure_defects(table)
    assert defects["additivity"] < 1e-10
    assert defects["level_sum"] < 1e-10


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_lambda_decreases_on_the_solver_bracket(name, solved):
    _, automaton, result = solved(name)
    lo, hi = result.bracket
    values = lambda_grid(assemble_matrix(automaton), lo, hi)
    assert len(values) == 20
    assert np.all(np.diff(values) < 0), values


def test_golden_gasket_dimension_is_pinned(solved):
    _, _, result = solved("golden_gasket")
    assert result.alpha == pytest.approx(GOLDEN_ALPHA, abs=1e-10)


def test_lau_ngai_dimension_lies_between_one_and_two(solved):
    _, automaton, result = solved("lau_ngai")
    assert automaton.q == 3
    assert 1.0 < result.alpha < 2.0
    assert result.alpha == pytest.approx(math.log(2 + math.sqrt(3)) / math.log(3), abs=1e-9)
