# geometry.py - ftc-dim 정확한 닮음변환과 볼록 다각형 판정
# 사상 합성/동치, 그리고 이웃 판정 S_ω(Ω) ∩ S_ω'(Ω) ≠ ∅ 을 정확 산술로 제공

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from scalar import ONE, ZERO, QuadScalar, ScalarLike, as_scalar

Vector = Tuple[QuadScalar, ...]
Matrix = Tuple[Tuple[QuadScalar, ...], ...]
MapKey = Tuple[Tuple[int, ...], ...]

# =============================================================================
# 1. 선형대수 보조 함수
# =============================================================================

def _identity_matrix(n: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def _mat_mul(p: Matrix, q: Matrix) -> Matrix:
    n = len(p)
    return tuple(
        tuple(sum((p[i][k] * q[k][j] for k in range(n)), ZERO) for j in range(n))
        for i in range(n)
    )


def _mat_vec(p: Matrix, v: Vector) -> Vector:
    return tuple(sum((p[i][k] * v[k] for k in range(len(v))), ZERO) for i in range(len(p)))


def _transpose(p: Matrix) -> Matrix:
    n = len(p)
    return tuple(tuple(p[j][i] for j in range(n)) for i in range(n))


def _cross(o: Vector, a: Vector, b: Vector) -> QuadScalar:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _dot(u: Vector, v: Vector) -> QuadScalar:
    return sum((x * y for x, y in zip(u, v)), ZERO)

# =============================================================================
# 2. 닮음변환
# =============================================================================

@dataclass(frozen=True)
class Similitude:
    """x ↦ ratio·O·x + translation (정확한 계수)"""

    ratio: QuadScalar
    orthogonal: Matrix
    translation: Vector

    def __post_init__(self):
        object.__setattr__(self, "ratio", as_scalar(self.ratio))
        object.__setattr__(
            self, "orthogonal", tuple(tuple(as_scalar(x) for x in row) for row in self.orthogonal)
        )
        object.__setattr__(self, "translation", tuple(as_scalar(x) for x in self.translation))

        n = len(self.translation)
        if n not in (1, 2):
            raise ValueError(f"only 1- and 2-dimensional similitudes are supported, got n={n}")
        if len(self.orthogonal) != n or any(len(row) != n for row in self.orthogonal):
            raise ValueError(f"orthogonal part must be {n}x{n}")
        if self.ratio.sign() <= 0:
            raise ValueError(f"similitude ratio must be positive, got {self.ratio}")
        if _mat_mul(_transpose(self.orthogonal), self.orthogonal) != _identity_matrix(n):
            raise ValueError("orthogonal part does not satisfy O^T O = I exactly")

    @classmethod
    def identity(cls, n: int) -> Similitude:
        return cls(ONE, _identity_matrix(n), tuple(ZERO for _ in range(n)))

    @classmethod
    def homothety(cls, ratio: ScalarLike, translation: Sequence[ScalarLike]) -> Similitude:
        n = len(translation)
        return cls(as_scalar(ratio), _identity_matrix(n), tuple(as_scalar(t) for t in translation))

    @property
    def dim(self) -> int:
        return len(self.translation)

    @property
    def is_contraction(self) -> bool:
        return self.ratio < ONE

    def orientation(self) -> int:
        """det O 의 부호"""
        if self.dim == 1:
            return self.orthogonal[0][0].sign()
        o = self.orthogonal
        return (o[0][0] * o[1][1] - o[0][1] * o[1][0]).sign()

    def apply(self, point: Sequence[ScalarLike]) -> Vector:
        rotated = _mat_vec(self.orthogonal, tuple(as_scalar(x) for x in point))
        return tuple(self.ratio * x + t for x, t in zip(rotated, self.translation))

    def __str__(self) -> str:
        translation = ", ".join(str(t) for t in self.translation)
        if self.orthogonal == _identity_matrix(self.dim):
            return f"x -> ({self.ratio})x + ({translation})"
        rows = "; ".join(", ".join(str(x) for x in row) for row in self.orthogonal)
        return f"x -> ({self.ratio})[{rows}]x + ({translation})"


def compose(f: Similitude, g: Similitude) -> Similitude:
    """f∘g"""
    if f.dim != g.dim:
        raise ValueError(f"cannot compose maps of dimensions {f.dim} and {g.dim}")
    shifted = _mat_vec(f.orthogonal, g.translation)
    return Similitude(
        f.ratio * g.ratio,
        _mat_mul(f.orthogonal, g.orthogonal),
        tuple(f.ratio * s + t for s, t in zip(shifted, f.translation)),
    )


def compose_all(maps: Sequence[Similitude], n: int) -> Similitude:
    """S_u = S_{u1}∘⋯∘S_{uk}"""
    result = Similitude.identity(n)
    for f in maps:
        result = compose(result, f)
    return result


def invert(f: Similitude) -> Similitude:
    transposed = _transpose(f.orthogonal)
    inverse_ratio = ONE / f.ratio
    back = _mat_vec(transposed, f.translation)
    return Similitude(inverse_ratio, transposed, tuple(-inverse_ratio * x for x in back))


def canonical_key(f: Similitude) -> MapKey:
    """같은 키 ⇔ 함수로서 같은 사상 (정렬 가능한 정수 튜플)"""
    return (
        f.ratio.key(),
        tuple(x for row in f.orthogonal for entry in row for x in entry.key()),
        tuple(x for t in f.translation for x in t.key()),
    )

# =============================================================================
# 3. 볼록 다각형 (열린 영역)
# =============================================================================

@dataclass(frozen=True)
class ConvexPolygon:
    """꼭짓점이 반시계 방향인 열린 볼록 다각형 (n=1 이면 열린 구간)"""

    vertices: Tuple[Vector, ...]

    def __post_init__(self):
        vertices = tuple(tuple(as_scalar(x) for x in v) for v in self.vertices)
        object.__setattr__(self, "vertices", vertices)
        if not vertices:
            raise ValueError("polygon needs at least one vertex")
        n = len(vertices[0])
        if any(len(v) != n for v in vertices):
            raise ValueError("polygon vertices have inconsistent dimensions")

        if n == 1:
            if len(vertices) != 2 or not vertices[0][0] < vertices[1][0]:
                raise ValueError("an interval needs exactly two endpoints with lo < hi")
        elif n == 2:
            if len(vertices) < 3:
                raise ValueError("a polygon needs at least three vertices")
            count = len(vertices)
            # 모든 변에 대해 나머지 꼭짓점이 엄격히 왼쪽: 반시계, 엄격 볼록, 단순
            for i in range(count):
                a, b = vertices[i], vertices[(i + 1) % count]
                for j in range(count):
                    if j in (i, (i + 1) % count):
                        continue
                    if _cross(a, b, vertices[j]).sign() <= 0:
                        raise ValueError(
                            f"vertices are not counter-clockwise and strictly convex at vertex {j}"
                        )
        else:
            raise ValueError(f"only 1- and 2-dimensional regions are supported, got n={n}")

    @classmethod
    def interval(cls, lo: ScalarLike, hi: ScalarLike) -> ConvexPolygon:
        return cls(((as_scalar(lo),), (as_scalar(hi),)))

    @classmethod
    def rectangle(cls, x0: ScalarLike, y0: ScalarLike, x1: ScalarLike, y1: ScalarLike) -> ConvexPolygon:
        return cls(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    def bounds(self) -> Tuple[Vector, Vector]:
        """축별 정확한 최소/최대"""
        lo = tuple(min(v[i] for v in self.vertices) for i in range(self.dim))
        hi = tuple(max(v[i] for v in self.vertices) for i in range(self.dim))
        return lo, hi

    def edge_normals(self) -> Tuple[Vector, ...]:
        count = len(self.vertices)
        normals = []
        for i in range(count):
            a, b = self.vertices[i], self.vertices[(i + 1) % count]
            normals.append((b[1] - a[1], a[0] - b[0]))
        return tuple(normals)

    def contains_point(self, point: Sequence[ScalarLike]) -> bool:
        """닫힌 다각형에 점이 포함되는지 (경계 포함)"""
        p = tuple(as_scalar(x) for x in point)
        if self.dim == 1:
            return self.vertices[0][0] <= p[0] <= self.vertices[1][0]
        count = len(self.vertices)
        return all(
            _cross(self.vertices[i], self.vertices[(i + 1) % count], p).sign() >= 0
            for i in range(count)
        )


def map_polygon(f: Similitude, polygon: ConvexPolygon) -> ConvexPolygon:
    """f(P); 방향을 뒤집는 직교 부분이면 꼭짓점 순서를 되돌려 반시계 유지"""
    image = [f.apply(v) for v in polygon.vertices]
    if f.orientation() < 0:
        image.reverse()
    return ConvexPolygon(tuple(image))


def _projection(polygon: ConvexPolygon, axis: Vector) -> Tuple[QuadScalar, QuadScalar]:
    values = [_dot(v, axis) for v in polygon.vertices]
    return min(values), max(values)


def open_overlap(p: ConvexPolygon, q: ConvexPolygon) -> bool:
    """열린 영역의 교집합이 비어있지 않은지 (양의 넓이/길이 교차)

    볼록 다각형의 열린 내부가 서로소이면 두 다각형의 변 법선 중 하나가
    (약하게) 분리하는 축이 된다. 접촉만 하는 경우 교차가 아니다.
    """
    if p.dim != q.dim:
        raise ValueError(f"cannot intersect regions of dimensions {p.dim} and {q.dim}")
    if p.dim == 1:
        lo = max(p.vertices[0][0], q.vertices[0][0])
        hi = min(p.vertices[1][0], q.vertices[1][0])
        return lo < hi

    for axis in p.edge_normals() + q.edge_normals():
        p_min, p_max = _projection(p, axis)
        q_min, q_max = _projection(q, axis)
        if p_max <= q_min or q_max <= p_min:
            return False
    return True


def find_outside_vertex(outer: ConvexPolygon, inner: ConvexPolygon) -> Optional[Vector]:
    """inner ⊆ outer (닫힘 기준) 이면 None, 아니면 밖에 있는 첫 꼭짓점"""
    for vertex in inner.vertices:
        if not outer.contains_point(vertex):
            return vertex
    return None
