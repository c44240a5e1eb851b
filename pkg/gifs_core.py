# gifs_core.py - ftc-dim 그래프 방향 IFS (GIFS) 확장
# 경로 정점 (S_e, i, j, k), 성분별 불변 집합족, GFTC 탐색

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from loguru import logger

from errors import ModelError
from ftc_core import (
    DirectedSystem,
    ExplorationLimits,
    InvarianceReport,
    IteratedFunctionSystem,
    NeighborhoodSignature,
    TypeAutomaton,
    Vertex,
    explore_types,
)
from geometry import ConvexPolygon, Similitude
from index_sets import IndexSetRule

# 그래프 정점은 Vertex.initial/terminal 에, 서명의 종점 태그는 entries 의 두 번째 성분에 들어간다
GifsVertex = Vertex
GifsSignature = NeighborhoodSignature

# =============================================================================
# 1. 모델
# =============================================================================

@dataclass(frozen=True)
class GraphEdge:
    """간선 e: i → j 와 사상 f_e (정점 번호는 0 부터)"""

    id: str
    source: int
    target: int
    map: Similitude


@dataclass(frozen=True)
class GifsModel:
    """t 개 정점의 방향 그래프, 간선별 닮음변환, 정점별 열린 볼록 집합 Ω_i

    간선 목록의 순서가 사전식 비교의 기호 순서다.
    """

    t: int
    edges: Tuple[GraphEdge, ...]
    omegas: Tuple[ConvexPolygon, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "omegas", tuple(self.omegas))
        if self.t < 1:
            raise ModelError(f"a GIFS needs at least one graph vertex, got t={self.t}")
        if len(self.omegas) != self.t:
            raise ModelError(f"expected {self.t} regions Ω_i, got {len(self.omegas)}")
        if not self.edges:
            raise ModelError("a GIFS needs at least one edge")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ModelError("edge ids must be unique")
        for edge in self.edges:
            if not edge.map.is_contraction:
                raise ModelError(f"edge {edge.id} is not contractive (ratio {edge.map.ratio})")

    @classmethod
    def from_ifs(cls, system: IteratedFunctionSystem) -> GifsModel:
        """t = 1, 모든 간선이 자기 루프인 GIFS"""
        edges = tuple(GraphEdge(f"e{i + 1}", 0, 0, f) for i, f in enumerate(system.maps))
        return cls(1, edges, (system.omega,))

    @property
    def dim(self) -> int:
        return self.omegas[0].dim

    def as_directed(self) -> DirectedSystem:
        return DirectedSystem(
            maps=tuple(e.map for e in self.edges),
            sources=tuple(e.source for e in self.edges),
            targets=tuple(e.target for e in self.edges),
            omegas=self.omegas,
            labels=tuple(e.id for e in self.edges),
            graph=True,
        )

    def edges_between(self, i: int, j: int) -> Sequence[GraphEdge]:
        """E^{i,j}"""
        return [e for e in self.edges if e.source == i and e.target == j]

    def validate_invariance(self) -> InvarianceReport:
        """모든 (i, j) 에 대해 ⋃_{e∈E^{i,j}} S_e(Ω_j) ⊆ Ω_i"""
        report = self.as_directed().validate_invariance()
        logger.debug(f"✅ Ω-invariance holds for {len(report.checked)} edge(s) over {self.t} graph vertices")
        return report

# =============================================================================
# 2. GFTC 탐색
# =============================================================================

def validate_invariance(model: GifsModel) -> InvarianceReport:
    return model.validate_invariance()


def explore_types_gifs(
    model: GifsModel,
    rule: Optional[IndexSetRule] = None,
    limits: Optional[ExplorationLimits] = None,
) -> TypeAutomaton:
    """루트 타입 T_1..T_t 를 먼저 두고 GFTC 타입 오토마톤을 구성

    이웃은 같은 시작 정점 i 를 공유하고 S_e(Ω_j) 와 S_e'(Ω_j') 가 열린 교차하는 정점들이다.
    """
    automaton = explore_types(model, rule, limits)
    logger.info(f"📊 GIFS with t={model.t}: {automaton.q} type(s), roots {[f'T{r + 1}' for r in automaton.root_ids]}")
    return automaton
