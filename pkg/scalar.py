# scalar.py - ftc-dim 정확한 이차체 산술
# Q 또는 Q(√d) 위의 정확한 스칼라: 사상 동치와 다각형 판정을 부동소수점 없이 결정

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from typing import Tuple, Union

import mpmath

from errors import FieldMismatchError, ModelError

# =============================================================================
# 1. 이차체 정의
# =============================================================================

_FLOAT_PRECISION_BITS = 200

_NUMBER = r"\d+(?:/\d+)?"
_SCALAR_PATTERN = re.compile(
    rf"""^
    (?:
        (?P<a>[+-]?{_NUMBER})
        (?:(?P<op>[+-])(?:(?P<b>{_NUMBER})\*)?sqrt\((?P<d>\d+)\))?
      |
        (?P<sign>[+-]?)(?:(?P<b_only>{_NUMBER})\*)?sqrt\((?P<d_only>\d+)\)
    )
    $""",
    re.VERBOSE,
)


def _is_square_free(d: int) -> bool:
    for p in range(2, math.isqrt(d) + 1):
        if d % (p * p) == 0:
            return False
    return True


class QuadField:
    """이차체 Q(√d); d = 1 은 유리수체"""

    __slots__ = ("_d",)

    def __init__(self, d: int = 1):
        if isinstance(d, bool) or not isinstance(d, int):
            raise ModelError(f"field discriminant must be an integer, got {d!r}")
        if d < 1:
            raise ModelError(f"field discriminant must be positive, got {d}")
        if d > 1 and not _is_square_free(d):
            raise ModelError(f"field discriminant {d} is not square-free")
        self._d = d

    @classmethod
    def rational(cls) -> QuadField:
        return cls(1)

    @property
    def d(self) -> int:
        return self._d

    @property
    def is_rational(self) -> bool:
        return self._d == 1

    def __eq__(self, other: object) -> bool:
        return isinstance(other, QuadField) and other._d == self._d

    def __hash__(self) -> int:
        return hash(("QuadField", self._d))

    def __repr__(self) -> str:
        return f"QuadField({self._d})"

    def __str__(self) -> str:
        return "rational" if self.is_rational else f"Q(sqrt({self._d}))"

    def __call__(self, a: RationalLike = 0, b: RationalLike = 0) -> QuadScalar:
        return QuadScalar(a, b, self._d)

    def sqrt_d(self) -> QuadScalar:
        return QuadScalar(0, 1, self._d)

    def admits(self, x: QuadScalar) -> bool:
        """x 가 이 체의 원소인지"""
        return x.d == 1 or x.d == self._d

    def parse(self, text: str) -> QuadScalar:
        """모델 파일 스칼라 문법 파싱: "p/q" 또는 "p/q + r/s*sqrt(d)" """
        if not isinstance(text, str):
            raise ModelError(f"scalar must be given as a string, got {text!r}")
        compact = re.sub(r"\s+", "", text)
        match = _SCALAR_PATTERN.match(compact)
        if match is None:
            raise ModelError(f"malformed scalar {text!r} (expected 'p/q' or 'p/q + r/s*sqrt(d)')")

        if match.group("a") is not None:
            a = Fraction(match.group("a"))
            if match.group("d") is None:
                return QuadScalar(a, 0, self._d)
            b = Fraction(match.group("b") or 1)
            if match.group("op") == "-":
                b = -b
            radicand = int(match.group("d"))
        else:
            a = Fraction(0)
            b = Fraction(match.group("b_only") or 1)
            if match.group("sign") == "-":
                b = -b
            radicand = int(match.group("d_only"))

        if b != 0 and radicand != self._d:
            raise FieldMismatchError(
                f"scalar {text!r} uses sqrt({radicand}) but the model field is {self}"
            )
        return QuadScalar(a, b, self._d)

# =============================================================================
# 2. 스칼라 값 타입
# =============================================================================

RationalLike = Union[int, Fraction]


def _sgn(x: Fraction) -> int:
    return (x > 0) - (x < 0)


@total_ordering
class QuadScalar:
    """정확한 원소 a + b√d (a, b 는 기약 분수)

    b = 0 이면 d 를 1 로 정규화하므로 유리수는 어느 체에든 승격된다.
    서로 다른 무리 체의 원소를 섞으면 FieldMismatchError.
    """

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, a: RationalLike = 0, b: RationalLike = 0, d: int = 1):
        a = Fraction(a)
        b = Fraction(b)
        if d == 1:
            a, b = a + b, Fraction(0)
        if b == 0:
            d = 1
        self._a = a
        self._b = b
        self._d = d

    # ---- 기본 속성 ---------------------------------------------------------

    @property
    def a(self) -> Fraction:
        return self._a

    @property
    def b(self) -> Fraction:
        return self._b

    @property
    def d(self) -> int:
        return self._d

    @property
    def is_rational(self) -> bool:
        return self._b == 0

    def key(self) -> Tuple[int, int, int, int, int]:
        """정렬 가능한 정규 키 (같은 값 ⇔ 같은 키)"""
        return (
            self._a.numerator, self._a.denominator,
            self._b.numerator, self._b.denominator,
            self._d,
        )

    def conjugate(self) -> QuadScalar:
        return QuadScalar(self._a, -self._b, self._d)

    def norm(self) -> Fraction:
        return self._a * self._a - self._b * self._b * self._d

    def sign(self) -> int:
        """부호의 정확한 판정 (a, b 부호 분기 + a² 대 b²d 비교)"""
        sa, sb = _sgn(self._a), _sgn(self._b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # 부호가 반대: |a| 와 |b|√d 중 큰 쪽이 부호를 정함 (d 가 제곱수가 아니므로 같을 수 없음)
        if self._a * self._a > self._b * self._b * self._d:
            return sa
        return sb

    # ---- 변환 ---------------------------------------------------------------

    def to_float(self) -> float:
        """가장 가까운 double (행렬 평가와 렌더링 전용, 동치 판정에는 사용 금지)"""
        if self._b == 0:
            return float(self._a)
        with mpmath.workprec(_FLOAT_PRECISION_BITS):
            value = (
                mpmath.mpf(self._a.numerator) / self._a.denominator
                + mpmath.mpf(self._b.numerator) / self._b.denominator * mpmath.sqrt(self._d)
            )
            return float(value)

    def __float__(self) -> float:
        return self.to_float()

    def __repr__(self) -> str:
        return f"QuadScalar({self._a}, {self._b}, {self._d})"

    def __str__(self) -> str:
        if self._b == 0:
            return str(self._a)
        radical = f"sqrt({self._d})"
        coefficient = abs(self._b)
        term = radical if coefficient == 1 else f"{coefficient}*{radical}"
        if self._a == 0:
            return term if self._b > 0 else f"-{term}"
        op = "+" if self._b > 0 else "-"
        return f"{self._a} {op} {term}"

    # ---- 체 연산 ------------------------------------------------------------

    def _coerce(self, other: object) -> QuadScalar:
        if isinstance(other, QuadScalar):
            if self._d != 1 and other._d != 1 and self._d != other._d:
                raise FieldMismatchError(
                    f"cannot combine elements of Q(sqrt({self._d})) and Q(sqrt({other._d}))"
                )
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuadScalar(other)
        return NotImplemented

    def _field_d(self, other: QuadScalar) -> int:
        return self._d if self._d != 1 else other._d

    def __add__(self, other: object) -> QuadScalar:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadScalar(self._a + other._a, self._b + other._b, self._field_d(other))

    __radd__ = __add__

    def __neg__(self) -> QuadScalar:
        return QuadScalar(-self._a, -self._b, self._d)

    def __pos__(self) -> QuadScalar:
        return self

    def __abs__(self) -> QuadScalar:
        return -self if self.sign() < 0 else self

    def __sub__(self, other: object) -> QuadScalar:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadScalar(self._a - other._a, self._b - other._b, self._field_d(other))

    def __rsub__(self, other: object) -> QuadScalar:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other: object) -> QuadScalar:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = self._field_d(other)
        return QuadScalar(
            self._a * other._a + self._b * other._b * d,
            self._a * other._b + self._b * other._a,
            d,
        )

    __rmul__ = __mul__

    def inverse(self) -> QuadScalar:
        norm = self.norm()
        if norm == 0:
            raise ZeroDivisionError("division by zero in quadratic field arithmetic")
        return QuadScalar(self._a / norm, -self._b / norm, self._d)

    def __truediv__(self, other: object) -> QuadScalar:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: object) -> QuadScalar:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, exponent: int) -> QuadScalar:
        if isinstance(exponent, bool) or not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** -exponent
        result = QuadScalar(1)
        base = self
        n = exponent
        while n > 0:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # ---- 비교 ---------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, QuadScalar):
            return self._a == other._a and self._b == other._b and self._d == other._d
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self._b == 0 and self._a == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._b == 0:
            return hash(self._a)
        return hash((self._a, self._b, self._d))

    def __lt__(self, other: object) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).sign() < 0

    def __bool__(self) -> bool:
        return self._a != 0 or self._b != 0

# =============================================================================
# 3. 편의 함수
# =============================================================================

ScalarLike = Union[QuadScalar, int, Fraction]

ZERO = QuadScalar(0)
ONE = QuadScalar(1)


def as_scalar(value: ScalarLike) -> QuadScalar:
    """int/Fraction 을 QuadScalar 로 승격"""
    if isinstance(value, QuadScalar):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return QuadScalar(value)
    raise TypeError(f"cannot interpret {value!r} as an exact scalar")


def compare(x: ScalarLike, y: ScalarLike) -> int:
    """정확한 대소 비교: -1, 0, 1"""
    return (as_scalar(x) - as_scalar(y)).sign()


def golden_ratio_conjugate() -> QuadScalar:
    """ρ = (√5 - 1)/2"""
    return QuadScalar(Fraction(-1, 2), Fraction(1, 2), 5)
