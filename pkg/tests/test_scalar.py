import math
from fractions import Fraction

import pytest

from errors import FieldMismatchError, ModelError
from scalar import ONE, QuadField, QuadScalar, compare, golden_ratio_conjugate


def test_parse_rational_and_irrational_forms():
    field = QuadField(5)
    x = field.parse("1/2 + 3/4*sqrt(5)")
    assert (x.a, x.b, x.d) == (Fraction(1, 2), Fraction(3, 4), 5)

    assert field.parse("sqrt(5)") == QuadScalar(0, 1, 5)
    assert field.parse("-3/2*sqrt(5)") == QuadScalar(0, Fraction(-3, 2), 5)
    assert field.parse("-1/2 - sqrt(5)") == QuadScalar(Fraction(-1, 2), -1, 5)
    assert field.parse("7") == QuadScalar(7)


def test_parse_rejects_other_radicands_and_garbage():
    with pytest.raises(FieldMismatchError):
        QuadField(5).parse("1 + sqrt(3)")
    with pytest.raises(ModelError):
        QuadField().parse("1/2x")
    with pytest.raises(ModelError):
        QuadField().parse(0.5)


@pytest.mark.parametrize("d", [0, 4, 12])
def test_field_discriminant_must_be_positive_and_square_free(d):
    with pytest.raises(ModelError):
        QuadField(d)


def test_rationals_normalize_to_d_one():
    x = QuadScalar(3, 0, 5)
    assert x.d == 1
    assert x == QuadScalar(3) == 3
    assert hash(x) == hash(Fraction(3))


def test_golden_ratio_identity_is_exact():
    rho = golden_ratio_conjugate()
    assert rho * rho + rho == ONE
    assert Fraction(1, 2) < rho < 1
    assert math.isclose(rho.to_float(), (math.sqrt(5) - 1) / 2, rel_tol=0, abs_tol=1e-15)


def test_sign_handles_opposite_sign_parts():
    assert QuadScalar(-2, 1, 5).sign() == 1
    assert QuadScalar(3, -1, 5).sign() == 1
    assert QuadScalar(2, -1, 5).sign() == -1
    assert QuadScalar(0).sign() == 0
    assert compare(QuadScalar(0, 1, 2), Fraction(7, 5)) == 1


def test_field_operations_round_trip():
    x = QuadScalar(1, 1, 2)
    assert x * x.inverse() == ONE
    assert (x + 1) - 1 == x
    assert 1 / x == x.inverse()
    assert x ** 2 == QuadScalar(3, 2, 2)
    assert x ** -1 == x.inverse()


def test_division_by_zero_raises_builtin_error():
    with pytest.raises(ZeroDivisionError):
        QuadScalar(1) / QuadScalar(0)


def test_mixing_fields_raises():
    with pytest.raises(FieldMismatchError):
        QuadScalar(0, 1, 2) + QuadScalar(0, 1, 3)


@pytest.mark.parametrize("value, text", [
    (QuadScalar(Fraction(-1, 2), Fraction(1, 2), 5), "-1/2 + 1/2*sqrt(5)"),
    (QuadScalar(0, 1, 5), "sqrt(5)"),
    (QuadScalar(0, Fraction(-3, 2), 5), "-3/2*sqrt(5)"),
    (QuadScalar(Fraction(1, 4)), "1/4"),
])
def test_string_form_is_parseable(value, text):
    assert str(value) == text
    assert QuadField(value.d if value.d != 1 else 5).parse(text) == value
