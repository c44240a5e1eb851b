from fractions import Fraction

import pytest

from errors import ModelError, NestedIndexViolation
from index_sets import (
    IndexSetRule,
    NestedViolation,
    SymbolTable,
    children_in_next,
    enumerate_level,
    extension_words,
    format_word,
    in_level,
    validate_nested_properties,
)
from scalar import ONE, golden_ratio_conjugate

RHO = golden_ratio_conjugate()


@pytest.fixture
def golden_table():
    return SymbolTable.for_ifs([RHO, RHO, RHO * RHO])


@pytest.fixture
def golden_rule():
    return IndexSetRule.ratio_stopping(RHO)


def test_rule_validation():
    with pytest.raises(ModelError):
        IndexSetRule("fixed_length", ONE / 2)
    with pytest.raises(ModelError):
        IndexSetRule("ratio_stopping")
    with pytest.raises(ModelError):
        IndexSetRule.ratio_stopping(1)
    with pytest.raises(ValueError):
        IndexSetRule("shortest_first")


def test_rule_serialization(golden_rule):
    assert IndexSetRule.fixed_length().to_dict() == {"kind": "fixed_length"}
    assert golden_rule.to_dict() == {"kind": "ratio_stopping", "base": "-1/2 + 1/2*sqrt(5)"}
    assert golden_rule.describe() == "ratio_stopping(base=-1/2 + 1/2*sqrt(5))"


def test_symbol_table_rejects_non_contractive_ratio():
    with pytest.raises(ModelError):
        SymbolTable.for_ifs([Fraction(1, 2), 1])
    with pytest.raises(ModelError):
        SymbolTable((ONE / 2,), sources=(0,))


def test_fixed_length_levels_are_all_words_of_length_k():
    table = SymbolTable.for_ifs([Fraction(1, 2)] * 3)
    rule = IndexSetRule.fixed_length()
    level = enumerate_level(rule, table, 2)
    assert len(level) == 9
    assert level[0] == (0, 0) and level[-1] == (2, 2)
    assert children_in_next((1,), rule, table) == [(1, 0), (1, 1), (1, 2)]


def test_graph_levels_follow_edges():
    table = SymbolTable.for_graph([Fraction(1, 3)] * 4, [0, 0, 1, 1], [0, 0, 1, 1])
    rule = IndexSetRule.fixed_length()
    assert enumerate_level(rule, table, 2, start=1) == [(2, 2), (2, 3), (3, 2), (3, 3)]
    assert enumerate_level(rule, table, 1, start=0) == [(0,), (1,)]


def test_ratio_stopping_levels_overlap(golden_rule, golden_table):
    assert enumerate_level(golden_rule, golden_table, 1) == [(0,), (1,), (2,)]
    second = enumerate_level(golden_rule, golden_table, 2)
    assert len(second) == 7
    assert (2,) in second
    assert in_level((2,), golden_rule, golden_table, 1)
    assert in_level((2,), golden_rule, golden_table, 2)
    assert not in_level((0,), golden_rule, golden_table, 2)


def test_children_of_word_in_two_levels_needs_explicit_level(golden_rule, golden_table):
    with pytest.raises(ValueError):
        children_in_next((2,), golden_rule, golden_table)
    assert children_in_next((2,), golden_rule, golden_table, level=1) == [(2,)]
    assert children_in_next((2,), golden_rule, golden_table, level=2) == [(2, 0), (2, 1), (2, 2)]
    with pytest.raises(ValueError):
        children_in_next((0,), golden_rule, golden_table, level=2)


def test_small_scale_keeps_the_word(golden_rule, golden_table):
    assert extension_words(golden_rule, golden_table, RHO) == [((), ONE)]
    assert extension_words(golden_rule, golden_table, ONE) == [
        ((0,), RHO), ((1,), RHO), ((2,), RHO * RHO)
    ]


@pytest.mark.parametrize("rule_name", ["fixed", "ratio"])
def test_nested_properties_hold(rule_name, golden_rule, golden_table):
    rule = IndexSetRule.fixed_length() if rule_name == "fixed" else golden_rule
    report = validate_nested_properties(rule, golden_table, 4)
    assert report.ok
    assert report.gap_bound == 1
    assert len(report.level_sizes) == 5
    report.raise_for_violations()


def test_nested_properties_on_graph_start_vertices():
    table = SymbolTable.for_graph([Fraction(1, 3)] * 4, [0, 0, 1, 1], [0, 0, 1, 1])
    report = validate_nested_properties(IndexSetRule.fixed_length(), table, 3, starts=[0, 1])
    assert report.ok
    assert report.level_sizes == [2, 4, 8, 16]


def test_dead_end_vertex_breaks_extension_property():
    # e2 runs into vertex 2, which has no outgoing edge
    table = SymbolTable.for_graph([Fraction(1, 2)] * 2, [0, 0], [0, 1])
    assert enumerate_level(IndexSetRule.fixed_length(), table, 2) == [(0, 0), (0, 1)]
    report = validate_nested_properties(IndexSetRule.fixed_length(), table, 2)
    assert not report.ok
    assert [(v.condition, v.level, v.witnesses) for v in report.violations] == [("d", 2, ((1,),))]
    with pytest.raises(NestedIndexViolation):
        report.raise_for_violations()


def test_violations_are_raised_with_report(golden_table):
    report = validate_nested_properties(IndexSetRule.fixed_length(), golden_table, 1)
    report.violations.append(NestedViolation("b", 1, ((0,), (0, 1)), "M_k is not an antichain"))
    with pytest.raises(NestedIndexViolation) as info:
        report.raise_for_violations()
    assert info.value.report is report
    assert "(1), (1,2)" in str(report.violations[0])
    assert report.to_dict()["ok"] is False


def test_depth_must_be_positive(golden_rule, golden_table):
    with pytest.raises(ValueError):
        validate_nested_properties(golden_rule, golden_table, 0)


def test_format_word_is_one_based():
    assert format_word((0, 2)) == "(1,3)"
    assert format_word(()) == "()"
