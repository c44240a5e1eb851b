# manifold_render.py - ftc-dim 끌개 점구름과 차트 사상
# 사상이 같은 합성을 합치며 단계별로 전개해 점 생성, 구면(입체사영)/토러스 차트로 밀어내기, CSV/PLY/SVG 출력

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np
import pandas as pd
from loguru import logger

from errors import ChartDomainError, ExportError, ModelError, ResourceLimitError
from ftc_core import DirectedSystem, as_directed
from geometry import ConvexPolygon

# =============================================================================
# 1. 차트
# =============================================================================

class ChartKind(str, Enum):
    """지원하는 차트 종류"""
    SPHERE = "sphere"        # φ⁻¹(y) = (2y, 1−|y|²)/(|y|²+1), 위쪽 반구
    TORUS = "torus"          # [0,1)^n 에서 마주보는 변을 붙인 몫
    IDENTITY = "identity"


@dataclass(frozen=True)
class ChartMap:
    kind: ChartKind = ChartKind.IDENTITY

    def __post_init__(self):
        object.__setattr__(self, "kind", ChartKind(self.kind))

    def push(self, points: np.ndarray) -> np.ndarray:
        return chart_push(points, self)

    def pull(self, points: np.ndarray) -> np.ndarray:
        """φ: 다양체 좌표에서 평면 좌표로"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == ChartKind.SPHERE:
            return points[:, :-1] / (1.0 + points[:, -1:])
        return points.copy()


def _torus_reduce(points: np.ndarray) -> np.ndarray:
    reduced = np.mod(points, 1.0)
    # 아주 작은 음수는 mod 후 1.0 으로 반올림된다
    reduced[reduced >= 1.0] = 0.0
    return reduced


def chart_push(points: np.ndarray, chart: ChartMap) -> np.ndarray:
    """점마다 φ⁻¹ 적용 (구면은 열린 단위 원판 밖의 점이면 ChartDomainError)"""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        n = points.shape[1] if points.ndim == 2 else 2
        return np.zeros((0, n + 1 if chart.kind == ChartKind.SPHERE else n))
    points = np.atleast_2d(points)

    if chart.kind == ChartKind.IDENTITY:
        return points.copy()
    if chart.kind == ChartKind.TORUS:
        return _torus_reduce(points)

    squared = np.sum(points * points, axis=1)
    outside = np.flatnonzero(~(squared < 1.0))
    if len(outside):
        index = int(outside[0])
        raise ChartDomainError(
            f"point {index} ({', '.join(f'{x:.6g}' for x in points[index])}) lies outside the open unit disk",
            index,
        )
    scale = 1.0 / (squared + 1.0)
    return np.column_stack([2.0 * points * scale[:, None], (1.0 - squared) * scale])

# =============================================================================
# 2. 점 생성
# =============================================================================

@dataclass
class PointCloud:
    """유클리드 점과 성분 태그 (GIFS 성분 i, 1 부터)"""
    points: np.ndarray
    components: np.ndarray
    max_diameter: float = 0.0
    chart: Optional[ChartKind] = None

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def to_frame(self, include_component: bool = False) -> pd.DataFrame:
        names = ["x", "y", "z"][: self.dim]
        frame = pd.DataFrame(self.points, columns=names)
        if include_component:
            frame["component"] = self.components.astype(int)
        return frame


@dataclass
class _FloatMaps:
    ratios: np.ndarray
    orthogonal: np.ndarray
    translations: np.ndarray
    sources: np.ndarray
    targets: np.ndarray
    diameters: np.ndarray     # Ω_j 경계상자 대각선
    centroids: np.ndarray     # Ω_j 꼭짓점 평균


def bbox_diameter(region: ConvexPolygon) -> float:
    lo, hi = region.bounds()
    return float(math.sqrt(sum((h.to_float() - l.to_float()) ** 2 for l, h in zip(lo, hi))))


def _float_maps(system: DirectedSystem) -> _FloatMaps:
    maps = system.maps
    return _FloatMaps(
        ratios=np.array([f.ratio.to_float() for f in maps]),
        orthogonal=np.array([[[x.to_float() for x in row] for row in f.orthogonal] for f in maps]),
        translations=np.array([[x.to_float() for x in f.translation] for f in maps]),
        sources=np.array(system.sources),
        targets=np.array(system.targets),
        diameters=np.array([bbox_diameter(omega) for omega in system.omegas]),
        centroids=np.array([np.mean([[x.to_float() for x in v] for v in omega.vertices], axis=0) for omega in system.omegas]),
    )


# 같은 사상 판정용 반올림 자릿수
_KEY_DECIMALS = 9

# (루트, 비율, 직교부, 평행이동, 종점, 단어) 행 묶음
_Frontier = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def _word_order(roots: np.ndarray, digits: np.ndarray) -> np.ndarray:
    """루트 우선, 그다음 단어 사전식 순서의 행 번호"""
    keys = [digits[:, c] for c in range(digits.shape[1] - 1, -1, -1)]
    return np.lexsort(keys + [roots])


def _distinct_rows(frontier: _Frontier) -> np.ndarray:
    """(루트, 종점, 사상) 이 같은 행 중 단어가 가장 작은 것만, 단어 순서로"""
    roots, scale, orth, trans, term, digits = frontier
    order = _word_order(roots, digits)
    key = np.column_stack([roots, term, scale, orth.reshape(len(scale), -1), trans])[order]
    # -0.0 과 0.0 을 같게
    key = np.round(key, _KEY_DECIMALS) + 0.0
    _, first = np.unique(key, axis=0, return_index=True)
    return order[np.sort(first)]


def _extend(maps: _FloatMaps, symbol: int, frontier: _Frontier) -> Optional[_Frontier]:
    """종점이 symbol 의 시작점인 행마다 S_u∘f_symbol"""
    roots, scale, orth, trans, term, digits = frontier
    mask = term == maps.sources[symbol]
    if not mask.any():
        return None
    count = int(mask.sum())
    shifted = np.einsum("kij,j->ki", orth[mask], maps.translations[symbol])
    return (
        roots[mask],
        scale[mask] * maps.ratios[symbol],
        np.einsum("kij,jl->kil", orth[mask], maps.orthogonal[symbol]),
        trans[mask] + scale[mask, None] * shifted,
        np.full(count, maps.targets[symbol]),
        np.column_stack([digits[mask], np.full(count, symbol, dtype=np.int32)]),
    )


def _expand(
    maps: _FloatMaps,
    max_diameter: float,
    leaf_budget: int,
    executor: ThreadPoolExecutor,
) -> Tuple[np.ndarray, np.ndarray]:
    """모든 가지를 단계별로 함께 전개해 잎 점과 루트를 (루트, 단어) 사전식 순서로 돌려준다"""
    symbols = range(len(maps.ratios))
    frontier: _Frontier = (
        maps.sources.copy(),
        maps.ratios.copy(),
        maps.orthogonal.copy(),
        maps.translations.copy(),
        maps.targets.copy(),
        np.arange(len(maps.ratios), dtype=np.int32)[:, None],
    )

    leaf_roots: List[np.ndarray] = []
    leaf_points: List[np.ndarray] = []
    leaf_digits: List[np.ndarray] = []
    leaves = 0
    while len(frontier[1]):
        keep = _distinct_rows(frontier)
        roots, scale, orth, trans, term, digits = (a[keep] for a in frontier)
        done = scale * maps.diameters[term] <= max_diameter
        if done.any():
            centers = np.einsum("kij,kj->ki", orth[done], maps.centroids[term[done]])
            leaf_points.append(scale[done, None] * centers + trans[done])
            leaf_roots.append(roots[done])
            leaf_digits.append(digits[done])
            leaves += int(done.sum())
        alive = ~done
        if leaves + int(alive.sum()) > leaf_budget:
            raise ResourceLimitError(f"point generation exceeds the leaf budget of {leaf_budget}")
        frontier = (roots[alive], scale[alive], orth[alive], trans[alive], term[alive], digits[alive])
        if not alive.any():
            break
        current = frontier
        parts = [p for p in executor.map(lambda s: _extend(maps, s, current), symbols) if p is not None]
        frontier = tuple(np.concatenate([p[i] for p in parts]) for i in range(6))

    if not leaf_points:
        return np.zeros((0, maps.translations.shape[1])), np.zeros(0, dtype=int)
    depth = max(d.shape[1] for d in leaf_digits)
    padded = np.concatenate([
        np.pad(d, ((0, 0), (0, depth - d.shape[1])), constant_values=-1) for d in leaf_digits
    ])
    roots = np.concatenate(leaf_roots)
    order = _word_order(roots, padded)
    return np.concatenate(leaf_points)[order], roots[order]


def generate_points(
    system: Any,
    max_diameter: float,
    leaf_budget: int = 1_000_000,
    threads: int = 1,
) -> PointCloud:
    """Ω 경계상자 상의 지름이 max_diameter 이하가 될 때까지 전개한 잎마다 Ω 무게중심의 상 한 점

    같은 루트에서 사상이 일치하는 합성(예: f13 = f21)은 사전식으로 가장 작은 단어 하나만 남긴다.
    점 순서는 루트, 그다음 단어의 사전식 순서이며 작업자 수와 무관하다.
    """
    if not max_diameter > 0:
        raise ModelError(f"max_diameter must be positive, got {max_diameter}")
    directed = as_directed(system)
    maps = _float_maps(directed)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        points, roots = _expand(maps, max_diameter, leaf_budget, executor)
    components = roots.astype(int) + 1
    logger.debug(f"📊 Generated {len(points)} distinct leaf point(s) at max_diameter={max_diameter:.6g}")
    return PointCloud(points, components, max_diameter)


def subsample(cloud: PointCloud, samples: int) -> Tuple[np.ndarray, np.ndarray]:
    """균등 간격 인덱스로 samples 개 점 (결정적)"""
    if len(cloud) <= samples:
        return cloud.points, cloud.components
    index = np.unique(np.linspace(0, len(cloud) - 1, samples).round().astype(int))
    return cloud.points[index], cloud.components[index]

# =============================================================================
# 3. 켤레 검산과 상자 세기
# =============================================================================

def conjugation_defect(system: Any, chart: ChartMap, points: np.ndarray, components: Optional[np.ndarray] = None) -> float:
    """S_e = φ⁻¹∘f_e∘φ 를 두 방법으로 계산한 최대 차이

    f_e 는 종점 성분 j 의 점에만 적용한다.
    """
    directed = as_directed(system)
    maps = _float_maps(directed)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    worst = 0.0
    for s in range(len(maps.ratios)):
        selected = points if components is None else points[components == maps.targets[s] + 1]
        if not len(selected):
            continue

        def f(y: np.ndarray) -> np.ndarray:
            return maps.ratios[s] * y @ maps.orthogonal[s].T + maps.translations[s]

        manifold = chart_push(selected, chart)
        through_chart = chart_push(f(chart.pull(manifold)), chart)
        direct = chart_push(f(selected), chart)
        worst = max(worst, float(np.max(np.linalg.norm(through_chart - direct, axis=1))))
    return worst


def box_counts(
    points: np.ndarray,
    exponents: Sequence[int],
    base: float = 2.0,
    origin: Optional[Sequence[float]] = None,
) -> List[int]:
    """격자 크기 base^{-k} 마다 점이 들어있는 상자 수 (격자 원점 기본값은 좌표별 최솟값)"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    corner = points.min(axis=0) if origin is None else np.asarray(origin, dtype=float)
    counts = []
    for k in exponents:
        cells = np.floor((points - corner) * base ** k).astype(np.int64)
        counts.append(len(np.unique(cells, axis=0)))
    return counts


def box_counting_dimension(
    points: np.ndarray,
    exponents: Sequence[int] = tuple(range(4, 10)),
    base: float = 2.0,
    origin: Optional[Sequence[float]] = None,
) -> float:
    """log N(ε) 대 log(1/ε) 의 최소제곱 기울기 (검산 전용 추정치)

    사상 비율이 모두 1/3 인 모델은 base=3, origin=Ω 모서리로 격자를 맞춘다.
    """
    if len(points) < 2:
        raise ModelError("box counting needs at least two points")
    counts = box_counts(points, exponents, base, origin)
    slope, _ = np.polyfit(np.array(exponents) * math.log(base), np.log(counts), 1)
    return float(slope)

# =============================================================================
# 4. 출력
# =============================================================================

class ExportFormat(str, Enum):
    CSV = "csv"
    PLY = "ply"
    SVG = "svg"


def export(
    points: np.ndarray,
    fmt: str,
    path: str,
    components: Optional[np.ndarray] = None,
    dot_radius: float = 0.5,
    margin: float = 0.05,
) -> Path:
    """점구름을 csv/ply/svg 로 저장"""
    fmt = ExportFormat(fmt)
    target = Path(path)
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        points = points.reshape(0, 2) if points.size == 0 else np.atleast_2d(points)
    try:
        if fmt == ExportFormat.CSV:
            _export_csv(points, components, target)
        elif fmt == ExportFormat.PLY:
            _export_ply(points, target)
        else:
            if points.shape[1] != 2:
                raise ExportError(f"svg export needs 2D points, got dimension {points.shape[1]}", str(target))
            _export_svg(points, target, dot_radius, margin)
    except OSError as e:
        raise ExportError(f"cannot write {fmt.value} file: {e}", str(target)) from e
    logger.info(f"💾 {len(points)} point(s) written to {target} ({fmt.value})")
    return target


def _export_csv(points: np.ndarray, components: Optional[np.ndarray], target: Path) -> None:
    frame = pd.DataFrame(points, columns=["x", "y", "z"][: points.shape[1]])
    if components is not None:
        frame["component"] = np.asarray(components, dtype=int)
    frame.to_csv(target, index=False, float_format="%.17g", lineterminator="\n")


def _export_ply(points: np.ndarray, target: Path) -> None:
    padded = np.zeros((len(points), 3))
    padded[:, : points.shape[1]] = points
    header = "\n".join([
        "ply",
        "format ascii 1.0",
        f"element vertex {len(points)}",
        "property double x",
        "property double y",
        "property double z",
        "end_header",
    ])
    with open(target, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(header + "\n")
        pd.DataFrame(padded).to_csv(handle, sep=" ", header=False, index=False, float_format="%.17g", lineterminator="\n")


def _export_svg(points: np.ndarray, target: Path, dot_radius: float, margin: float) -> None:
    with plt.rc_context({"svg.hashsalt": "ftc-dim", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 6))
        try:
            if len(points):
                lo, hi = points.min(axis=0), points.max(axis=0)
                pad = np.maximum(hi - lo, 1e-12) * margin
                ax.set_xlim(lo[0] - pad[0], hi[0] + pad[0])
                ax.set_ylim(lo[1] - pad[1], hi[1] + pad[1])
                ax.scatter(points[:, 0], points[:, 1], s=(2 * dot_radius) ** 2, c="black", marker="o", linewidths=0)
            ax.set_aspect("equal")
            ax.set_axis_off()
            fig.savefig(target, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
