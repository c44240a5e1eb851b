# dimension.py - ftc-dim 가중 인접 행렬과 하우스도르프 차원
# A_α 조립, 스펙트럼 반경 λ_α, λ_α = 1 이분법, 페론 측도 표

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy.optimize import bisect, brentq

from errors import DegenerateModelError, ExportError, MalformedAutomatonError, ModelError, NumericalError
from ftc_core import LevelBuilder, TypeAutomaton, classify_level
from scalar import ONE, QuadScalar

Entry = Tuple[Tuple[QuadScalar, int], ...]

# 수치 상수 (설정의 solver 섹션이 기본값을 덮어쓴다)
DEFAULT_TOL = 1e-12
DEFAULT_POWER_RTOL = 1e-14
DEFAULT_MAX_POWER_ITERATIONS = 20000
DEFAULT_ALPHA_CAP = 64.0
PERRON_ZERO = 1e-300
DEGENERATE_SLACK = 1e-9

# =============================================================================
# 1. 가중 인접 행렬
# =============================================================================

@dataclass(frozen=True)
class WeightedIncidenceMatrix:
    """A_α(i,j) = Σ_s m_s·r_s^α; 각 칸은 (정확한 비율, 중복도) 다중집합"""

    entries: Tuple[Tuple[Entry, ...], ...]
    labels: Tuple[str, ...] = ()
    root_ids: Tuple[int, ...] = (0,)

    def __post_init__(self):
        q = len(self.entries)
        if q == 0:
            raise ModelError("incidence matrix has no types")
        if any(len(row) != q for row in self.entries):
            raise ModelError("incidence matrix must be square")
        for row in self.entries:
            for entry in row:
                for ratio, multiplicity in entry:
                    if not (ratio.sign() > 0 and ratio <= ONE):
                        raise ModelError(f"incidence ratio {ratio} lies outside (0,1]")
                    if multiplicity < 1:
                        raise ModelError(f"incidence multiplicity must be positive, got {multiplicity}")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"T{i + 1}" for i in range(q)))

    @property
    def q(self) -> int:
        return len(self.entries)

    @cached_property
    def _terms(self) -> List[Tuple[int, int, float, int]]:
        terms = []
        for i, row in enumerate(self.entries):
            for j, entry in enumerate(row):
                for ratio, multiplicity in entry:
                    terms.append((i, j, math.log(ratio.to_float()), multiplicity))
        return terms

    def evaluate(self, alpha: float) -> np.ndarray:
        """A_α 의 float 값 (r^α = exp(α·log r))"""
        if alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {alpha}")
        matrix = np.zeros((self.q, self.q))
        for i, j, log_ratio, multiplicity in self._terms:
            matrix[i, j] += multiplicity * math.exp(alpha * log_ratio)
        return matrix

    def counts(self) -> np.ndarray:
        """A_0: 간선 개수 행렬"""
        matrix = np.zeros((self.q, self.q), dtype=int)
        for i, j, _, multiplicity in self._terms:
            matrix[i, j] += multiplicity
        return matrix

    def distinct_ratios(self) -> List[QuadScalar]:
        ratios = {ratio for row in self.entries for entry in row for ratio, _ in entry}
        return sorted(ratios, reverse=True)

    def permuted(self, order: Sequence[int]) -> WeightedIncidenceMatrix:
        """new[i][j] = old[order[i]][order[j]] (동시 치환)"""
        order = list(order)
        if sorted(order) != list(range(self.q)):
            raise ValueError("order must be a permutation of the type indices")
        position = {old: new for new, old in enumerate(order)}
        return WeightedIncidenceMatrix(
            entries=tuple(tuple(self.entries[a][b] for b in order) for a in order),
            labels=tuple(self.labels[a] for a in order),
            root_ids=tuple(position[r] for r in self.root_ids),
        )

    def symbolic(self, i: int, j: int) -> str:
        terms = []
        for ratio, multiplicity in self.entries[i][j]:
            if ratio == ONE:
                terms.append(str(multiplicity))
                continue
            power = f"({ratio})^a"
            terms.append(power if multiplicity == 1 else f"{multiplicity}*{power}")
        return " + ".join(terms) or "0"

    def to_frame(self, alpha: Optional[float] = None) -> pd.DataFrame:
        """(row, col, symbolic[, value]) 긴 형식 표, 0 이 아닌 칸만"""
        values = self.evaluate(alpha) if alpha is not None else None
        rows = []
        for i in range(self.q):
            for j in range(self.q):
                if not self.entries[i][j]:
                    continue
                row = {"row": self.labels[i], "col": self.labels[j], "symbolic": self.symbolic(i, j)}
                if values is not None:
                    row["value"] = values[i, j]
                rows.append(row)
        columns = ["row", "col", "symbolic"] + (["value"] if values is not None else [])
        return pd.DataFrame(rows, columns=columns)

    def to_csv(self, path: str, alpha: Optional[float] = None) -> Path:
        target = Path(path)
        try:
            self.to_frame(alpha).to_csv(target, index=False, float_format="%.17g", lineterminator="\n")
        except OSError as e:
            raise ExportError(f"cannot write matrix CSV: {e}", str(target)) from e
        logger.info(f"💾 Matrix written to {target}")
        return target


def assemble_matrix(automaton: TypeAutomaton) -> WeightedIncidenceMatrix:
    """타입 간선을 정확한 비율 기준으로 모아 A_α 구성"""
    q = automaton.q
    cells: List[List[Counter]] = [[Counter() for _ in range(q)] for _ in range(q)]
    for node in automaton.types:
        for edge in node.edges:
            cells[node.id][edge.target][edge.ratio] += 1
    entries = tuple(
        tuple(
            tuple(sorted(cell.items(), key=lambda item: item[0], reverse=True))
            for cell in row
        )
        for row in cells
    )
    return WeightedIncidenceMatrix(entries, tuple(t.label for t in automaton.types), automaton.root_ids)

# =============================================================================
# 2. 스펙트럼 반경
# =============================================================================

def _power_iteration(
    matrix: np.ndarray,
    rtol: float,
    max_iterations: int,
) -> Tuple[Optional[float], np.ndarray, Dict[str, Any]]:
    """I + A 에 대한 거듭제곱법, Collatz–Wielandt 상하한으로 종료 판정

    수렴하지 않으면 (None, 마지막 벡터, 진단) 을 돌려준다.
    """
    q = matrix.shape[0]
    shifted = matrix + np.eye(q)
    x = np.ones(q) / q
    lower = upper = float("nan")
    for iteration in range(1, max_iterations + 1):
        y = shifted @ x
        quotients = y / x
        lower, upper = float(quotients.min()), float(quotients.max())
        x = y / y.max()
        if upper - lower <= rtol * upper:
            return 0.5 * (lower + upper) - 1.0, x, {"iterations": iteration}
        if x.min() < 1e-250:
            break
    return None, x, {"iterations": iteration, "lower": lower - 1.0, "upper": upper - 1.0}


def _gelfand_radius(matrix: np.ndarray, squarings: int = 64) -> Tuple[float, Dict[str, Any]]:
    """ρ(A) = lim ‖A^{2^k}‖^{1/2^k} (정규화된 반복 제곱)"""
    norm = float(np.abs(matrix).sum(axis=1).max())
    if norm == 0.0:
        return 0.0, {"squarings": 0}
    current = matrix / norm
    log_norm = math.log(norm)
    estimates = []
    for k in range(1, squarings + 1):
        current = current @ current
        norm = float(np.abs(current).sum(axis=1).max())
        if norm == 0.0:
            return 0.0, {"squarings": k}
        current = current / norm
        log_norm = 2.0 * log_norm + math.log(norm)
        estimates.append(log_norm / 2.0 ** k)
    return math.exp(estimates[-1]), {"squarings": squarings, "last_change": abs(estimates[-1] - estimates[-2])}


def spectral_radius(
    matrix: np.ndarray,
    rtol: float = DEFAULT_POWER_RTOL,
    max_iterations: int = DEFAULT_MAX_POWER_ITERATIONS,
) -> float:
    """음이 아닌 정방 행렬의 지배 고유값"""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    if np.any(matrix < 0):
        raise ValueError("spectral radius here is defined for non-negative matrices only")
    radius, _, diagnostics = _power_iteration(matrix, rtol, max_iterations)
    if radius is not None:
        return radius

    logger.debug(f"⚠️ Power iteration stagnated after {diagnostics['iterations']} steps, using repeated squaring")
    radius, gelfand = _gelfand_radius(matrix)
    diagnostics.update(gelfand)
    if not math.isfinite(radius) or gelfand.get("last_change", 0.0) > 1e-12:
        raise NumericalError("spectral radius did not converge", diagnostics)
    return radius


def spectral_radius_at(
    matrix: WeightedIncidenceMatrix,
    alpha: float,
    rtol: float = DEFAULT_POWER_RTOL,
    max_iterations: int = DEFAULT_MAX_POWER_ITERATIONS,
) -> float:
    """λ_α"""
    return spectral_radius(matrix.evaluate(alpha), rtol, max_iterations)


def lambda_grid(matrix: WeightedIncidenceMatrix, lo: float, hi: float, points: int = 20) -> np.ndarray:
    """[lo, hi] 의 균등 격자에서 λ_α"""
    alphas = np.linspace(lo, hi, points)
    return np.array([spectral_radius_at(matrix, float(a)) for a in alphas])

# =============================================================================
# 3. λ_α = 1 풀이
# =============================================================================

@dataclass(frozen=True)
class DimensionResult:
    """해 α, 그 점의 λ, a[root] = 1 로 정규화한 페론 벡터"""

    alpha: float
    lambda_at_alpha: float
    perron_vector: np.ndarray = field(compare=False)
    bracket: Tuple[float, float]
    tol: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "lambda_at_alpha": self.lambda_at_alpha,
            "perron_vector": [float(x) for x in self.perron_vector],
            "bracket": list(self.bracket),
            "tol": self.tol,
        }


def solve_dimension(
    matrix: WeightedIncidenceMatrix,
    tol: float = DEFAULT_TOL,
    alpha_cap: float = DEFAULT_ALPHA_CAP,
    space_dim: int = 1,
    rtol: float = DEFAULT_POWER_RTOL,
    max_iterations: int = DEFAULT_MAX_POWER_ITERATIONS,
) -> DimensionResult:
    """[0, α_hi] 에서 이분법 (α_hi 는 공간 차원부터 λ < 1 이 될 때까지 두 배)"""

    def excess(alpha: float) -> float:
        return spectral_radius_at(matrix, alpha, rtol, max_iterations) - 1.0

    lambda_0 = excess(0.0) + 1.0
    if lambda_0 < 1.0 - DEGENERATE_SLACK:
        raise MalformedAutomatonError(f"λ_0 = {lambda_0:.12g} < 1: some type has no offspring")
    if lambda_0 <= 1.0 + DEGENERATE_SLACK:
        raise DegenerateModelError(
            f"λ_0 = {lambda_0:.12g}: the attractor is degenerate and λ_α = 1 has no positive root"
        )

    hi = float(max(1, space_dim))
    while excess(hi) >= 0.0:
        hi *= 2.0
        if hi > alpha_cap:
            raise DegenerateModelError(f"λ_α stays ≥ 1 up to α = {alpha_cap}")
    logger.debug(f"🔍 Bisection bracket [0, {hi}] (λ_0 = {lambda_0:.12g})")

    alpha = bisect(excess, 0.0, hi, xtol=tol, maxiter=200)
    lam = excess(alpha) + 1.0
    vector = perron_vector(matrix, alpha, rtol, max_iterations)
    logger.info(f"✅ Solved λ_α = 1 at α = {alpha:.15g} (λ = {lam:.15g})")
    return DimensionResult(alpha, lam, vector, (0.0, hi), tol)


def perron_vector(
    matrix: WeightedIncidenceMatrix,
    alpha: float,
    rtol: float = DEFAULT_POWER_RTOL,
    max_iterations: int = DEFAULT_MAX_POWER_ITERATIONS,
) -> np.ndarray:
    """A_α a = λ a 인 음이 아닌 a, a[root] = 1"""
    evaluated = matrix.evaluate(alpha)
    radius, vector, _ = _power_iteration(evaluated, rtol, max_iterations)
    if radius is None:
        radius = spectral_radius(evaluated, rtol, max_iterations)
        _, _, vh = np.linalg.svd(evaluated - radius * np.eye(matrix.q))
        vector = np.abs(vh[-1])
    root = matrix.root_ids[0]
    if vector[root] <= PERRON_ZERO:
        raise NumericalError("Perron vector vanishes on the root type", {"alpha": alpha})
    vector = vector / vector[root]
    vector[vector < PERRON_ZERO] = 0.0
    zeros = [matrix.labels[i] for i in np.flatnonzero(vector == 0.0)]
    if zeros:
        logger.warning(f"⚠️ Perron vector is zero on {zeros}; those types are left out of measure tables")
    return vector

# =============================================================================
# 4. 페론 측도 표
# =============================================================================

MEASURE_COLUMNS = ["level", "initial", "word", "type", "ratio", "measure", "parent"]


def perron_measure(
    system: Any,
    automaton: TypeAutomaton,
    result: DimensionResult,
    depth: int,
    vertex_budget: int = 1_000_000,
) -> pd.DataFrame:
    """깊이 depth 까지 축약 그래프의 각 정점에 μ̂(I_ω) = ρ_ω^α·a_type(ω)"""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    builder = LevelBuilder(system, automaton.rule, vertex_budget)
    vector = result.perron_vector
    rows = []

    types = classify_level(builder, automaton, 0)
    live = {}
    for index, vertex in enumerate(builder.build(0).vertices):
        tid = types[index]
        if tid is not None and vector[tid] > 0.0:
            live[index] = ""
    for k in range(depth + 1):
        vertices = builder.build(k).vertices
        for index, parent_word in live.items():
            vertex = vertices[index]
            tid = types[index]
            rows.append({
                "level": k,
                "initial": vertex.initial + 1,
                "word": automaton.format_word(vertex.smallest_word),
                "type": f"T{tid + 1}",
                "ratio": str(vertex.ratio),
                "measure": math.exp(result.alpha * math.log(vertex.ratio.to_float())) * vector[tid],
                "parent": parent_word,
            })
        if k == depth:
            break
        following = classify_level(builder, automaton, k + 1)
        next_live = {}
        for edge in builder.build(k + 1).retained_edges():
            tid = following[edge.child]
            if edge.parent in live and tid is not None and vector[tid] > 0.0:
                next_live[edge.child] = automaton.format_word(vertices[edge.parent].smallest_word)
        live = dict(sorted(next_live.items()))
        types = following

    logger.debug(f"📊 Measure table: {len(rows)} vertices to depth {depth}")
    return pd.DataFrame(rows, columns=MEASURE_COLUMNS)


def measure_defects(table: pd.DataFrame) -> Dict[str, float]:
    """가법성 결함 max |Σ 자식 μ̂ − μ̂(부모)| 와 단계 합 결함"""
    if table.empty:
        return {"additivity": 0.0, "level_sum": 0.0}
    deepest = int(table["level"].max())
    children = table[table["level"] > 0].copy()
    children["parent_level"] = children["level"] - 1
    sums = children.groupby(["parent_level", "initial", "parent"])["measure"].sum()
    parents = table[table["level"] < deepest].set_index(["level", "initial", "word"])["measure"]
    parents.index.names = ["parent_level", "initial", "parent"]
    aligned = sums.reindex(parents.index, fill_value=0.0)
    additivity = float((aligned - parents).abs().max()) if len(parents) else 0.0

    roots = table[table["level"] == 0].set_index("initial")["measure"]
    level_sums = table.groupby(["level", "initial"])["measure"].sum()
    level_sum = max(abs(total - roots[initial]) for (_, initial), total in level_sums.items())
    return {"additivity": additivity, "level_sum": float(level_sum)}

# =============================================================================
# 5. 몫 행렬과 특성 다항식 검산
# =============================================================================

def quotient_matrix(matrix: np.ndarray, partition: Sequence[Sequence[int]]) -> np.ndarray:
    """동등 분할(equitable partition)의 몫 행렬: 블록 P 의 각 행에서 블록 Q 로의 합이 같아야 함"""
    matrix = np.asarray(matrix)
    members = sorted(i for block in partition for i in block)
    if members != list(range(matrix.shape[0])):
        raise ValueError("partition must cover every index exactly once")
    quotient = np.zeros((len(partition), len(partition)), dtype=matrix.dtype)
    for p, block_p in enumerate(partition):
        for r, block_r in enumerate(partition):
            sums = {matrix[i, list(block_r)].sum() for i in block_p}
            if len(sums) != 1:
                raise ValueError(f"partition is not equitable between blocks {p + 1} and {r + 1}")
            quotient[p, r] = sums.pop()
    return quotient


def _exact_determinant(rows: List[List[Fraction]]) -> Fraction:
    matrix = [list(row) for row in rows]
    n = len(matrix)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if matrix[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            matrix[col], matrix[pivot] = matrix[pivot], matrix[col]
            det = -det
        det *= matrix[col][col]
        for r in range(col + 1, n):
            factor = matrix[r][col] / matrix[col][col]
            if factor:
                for c in range(col, n):
                    matrix[r][c] -= factor * matrix[col][c]
    return det


def _solve_exact(rows: List[List[Fraction]], rhs: List[Fraction]) -> List[Fraction]:
    n = len(rows)
    augmented = [list(row) + [value] for row, value in zip(rows, rhs)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if augmented[r][col] != 0)
        augmented[col], augmented[pivot] = augmented[pivot], augmented[col]
        for r in range(n):
            if r != col and augmented[r][col] != 0:
                factor = augmented[r][col] / augmented[col][col]
                for c in range(col, n + 1):
                    augmented[r][c] -= factor * augmented[col][c]
    return [augmented[i][n] / augmented[i][i] for i in range(n)]


def ratio_exponents(matrix: WeightedIncidenceMatrix, base: QuadScalar, max_exponent: int = 64) -> Dict[QuadScalar, int]:
    """각 비율 r 을 r = base^e 로 표현 (정확 비교)"""
    exponents = {}
    for ratio in matrix.distinct_ratios():
        power, e = ONE, 0
        while power > ratio and e < max_exponent:
            power, e = power * base, e + 1
        if power != ratio:
            raise ModelError(f"ratio {ratio} is not an integer power of {base}")
        exponents[ratio] = e
    return exponents


def characteristic_polynomial_in(matrix: WeightedIncidenceMatrix, base: QuadScalar) -> List[int]:
    """det(I − A(x)) 의 정수 계수 (오름차순), x = base^α

    A(x) 의 칸은 Σ m·x^e 이므로 정수점에서 정확히 계산한 뒤 보간한다.
    """
    exponents = ratio_exponents(matrix, base)
    degree = matrix.q * max(exponents.values(), default=0)
    points = list(range(degree + 1))
    values = []
    for x in points:
        rows = []
        for i in range(matrix.q):
            row = []
            for j in range(matrix.q):
                cell = sum(m * Fraction(x) ** exponents[r] for r, m in matrix.entries[i][j])
                row.append((Fraction(1) if i == j else Fraction(0)) - cell)
            rows.append(row)
        values.append(_exact_determinant(rows))
    vandermonde = [[Fraction(x) ** p for p in range(degree + 1)] for x in points]
    coefficients = _solve_exact(vandermonde, values)
    if any(c.denominator != 1 for c in coefficients):
        raise NumericalError("interpolated characteristic polynomial is not integral")
    while len(coefficients) > 1 and coefficients[-1] == 0:
        coefficients.pop()
    return [int(c) for c in coefficients]


def dimension_from_polynomial(coefficients: Sequence[int], base: QuadScalar, grid: int = 4096) -> float:
    """det(I − A(x)) 의 (0,1) 최소 양근 x* 로부터 α = log x* / log base"""
    polynomial = np.polynomial.Polynomial([float(c) for c in coefficients])
    xs = np.linspace(0.0, 1.0, grid + 1)[1:]
    values = polynomial(xs)
    if values[0] == 0.0:
        root = float(xs[0])
    else:
        changes = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)
        if len(changes) == 0:
            raise NumericalError("det(I − A(x)) has no root in (0,1)", {"coefficients": list(coefficients)})
        k = int(changes[0])
        root = brentq(polynomial, xs[k], xs[k + 1], xtol=1e-15)
    return math.log(root) / math.log(base.to_float())
