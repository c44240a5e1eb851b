#!/usr/bin/env python3
# invariant_validator.py - ftc-dim 모델 불변식 검증기
# 불변성, 중첩 인덱스, 타입 탐색, 대표 독립성, λ_α 단조성, 측도, 결정성, 차트 검산을 단계별로 실행

import sys
from collections import deque
from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from config import FtcSettings, limits_from, settings as default_settings
from dimension import (
    DimensionResult,
    WeightedIncidenceMatrix,
    assemble_matrix,
    lambda_grid,
    measure_defects,
    perron_measure,
    solve_dimension,
)
from errors import FtcError
from ftc_core import (
    DirectedSystem,
    TypeAutomaton,
    check_representative_independence,
    explore_types,
    verify_condition_b,
)
from index_sets import validate_nested_properties
from manifold_render import ChartKind, ChartMap, chart_push, conjugation_defect, generate_points, subsample
from model_io import ModelFile

MEASURE_DEPTH = 5
MEASURE_TOL = 1e-10
GRID_POINTS = 20
CHART_TOL = 1e-12
CHART_SAMPLES = 1000


class InvariantValidator:
    """로드된 모델에 대해 모든 모듈의 불변식을 검사"""

    def __init__(self, model: ModelFile, config: Optional[FtcSettings] = None, verbose: bool = True):
        self.model = model
        self.config = config or default_settings
        self.verbose = verbose
        self.system: DirectedSystem = model.directed()
        self.rule = model.rule
        self.errors: List[str] = []
        self.warnings: List[str] = []
        self.results: List[Dict[str, Any]] = []

        self.automaton: Optional[TypeAutomaton] = None
        self.matrix: Optional[WeightedIncidenceMatrix] = None
        self.dimension: Optional[DimensionResult] = None

    def _say(self, message: str) -> None:
        if self.verbose:
            print(message)

    def _limits(self):
        return limits_from(self.config)

    def _requires_automaton(self) -> bool:
        if self.automaton is None:
            self.errors.append("타입 오토마톤이 없어 검사를 건너뜀 (탐색 실패)")
            return False
        return True

    def _requires_dimension(self) -> bool:
        if self.dimension is None:
            self.errors.append("차원 해가 없어 검사를 건너뜀")
            return False
        return True

    # -------------------------------------------------------------------------
    # 1-3. 모델과 탐색
    # -------------------------------------------------------------------------

    def validate_invariance(self) -> bool:
        """Ω 불변성 (정확한 포함)"""
        try:
            report = self.system.validate_invariance()
        except FtcError as e:
            self.errors.append(f"불변성 위반: {e.message}")
            return False
        self._say(f"✅ {len(report.checked)}개 사상의 Ω 불변성 확인")
        return True

    def validate_nested_index(self) -> bool:
        """중첩 인덱스 집합 조건 (a)-(e)"""
        depth = self.config.exploration.verify_depth + 2
        report = validate_nested_properties(self.rule, self.system.table, depth, range(self.system.t))
        if not report.ok:
            self.errors.extend(f"중첩 인덱스 위반: {v}" for v in report.violations)
            return False
        self._say(f"✅ 깊이 {depth}까지 중첩 조건 성립 (L={report.gap_bound})")
        return True

    def validate_exploration(self) -> bool:
        """고정점까지 타입 탐색"""
        try:
            self.automaton = explore_types(self.system, self.rule, self._limits())
        except FtcError as e:
            self.errors.append(f"타입 탐색 실패: {e}")
            return False
        self._say(f"✅ 단계 {self.automaton.fixpoint_level}에서 고정점: 타입 {self.automaton.q}개")
        return True

    def validate_automaton_structure(self) -> bool:
        """모든 타입에 자손 간선, 루트에서 도달 가능, 서명에 항등 항목 1개"""
        if not self._requires_automaton():
            return False
        automaton = self.automaton
        problems = []
        for node in automaton.types:
            if not node.edges:
                problems.append(f"{node.label}에 자손 간선이 없습니다")
            if node.signature.identity_count() != 1:
                problems.append(f"{node.label} 서명에 항등 항목이 정확히 1개가 아닙니다")

        reached = set(automaton.root_ids)
        queue = deque(automaton.root_ids)
        while queue:
            for edge in automaton.types[queue.popleft()].edges:
                if edge.target not in reached:
                    reached.add(edge.target)
                    queue.append(edge.target)
        problems.extend(f"T{i + 1}은 루트에서 도달할 수 없습니다" for i in range(automaton.q) if i not in reached)

        if problems:
            self.errors.extend(problems)
            return False
        self._say("✅ 오토마톤 구조 검증 통과")
        return True

    # -------------------------------------------------------------------------
    # 5-6. 동치 검산
    # -------------------------------------------------------------------------

    def validate_representatives(self) -> bool:
        """절대 단계 생성으로 대표 독립성 확인"""
        if not self._requires_automaton():
            return False
        depth = max(1, self.config.exploration.verify_depth)
        report = check_representative_independence(
            self.system, self.automaton, depth, self.config.exploration.vertex_budget
        )
        if not report.ok:
            self.errors.extend(report.mismatches)
            return False
        checked = sum(report.vertices_checked.values())
        self._say(f"✅ 깊이 {depth}까지 정점 {checked}개의 자손 다중집합 일치")
        return True

    def validate_condition_b(self) -> bool:
        """verify_depth 재전개로 미래 인덱스 집합 일치"""
        if not self._requires_automaton():
            return False
        try:
            checked = verify_condition_b(self.system, self.automaton, self.config.exploration.verify_depth)
        except FtcError as e:
            self.errors.append(f"조건 (b) 반증: {e.message}")
            return False
        if checked == 0:
            self.warnings.append("대표가 2개 이상인 타입이 없어 조건 (b) 재전개는 비어 있습니다")
        self._say(f"✅ 대표 {checked}개에 대해 조건 (b) 재전개 일치")
        return True

    # -------------------------------------------------------------------------
    # 7-9. 차원과 측도
    # -------------------------------------------------------------------------

    def _solve(self, matrix: WeightedIncidenceMatrix) -> DimensionResult:
        solver = self.config.solver
        return solve_dimension(
            matrix,
            tol=solver.tol,
            alpha_cap=solver.alpha_cap,
            space_dim=self.system.dim,
            rtol=solver.power_rtol,
            max_iterations=solver.max_power_iterations,
        )

    def validate_monotonicity(self) -> bool:
        """해법 구간의 20개 격자점에서 λ_α 가 엄격히 감소"""
        if not self._requires_automaton():
            return False
        try:
            self.matrix = assemble_matrix(self.automaton)
            self.dimension = self._solve(self.matrix)
        except FtcError as e:
            self.errors.append(f"차원 풀이 실패: {e}")
            return False
        lo, hi = self.dimension.bracket
        grid = lambda_grid(self.matrix, lo, hi, GRID_POINTS)
        if not np.all(np.diff(grid) < 0):
            self.errors.append(f"λ_α 가 [{lo}, {hi}] 에서 엄격히 감소하지 않습니다")
            return False
        self._say(f"✅ λ_α 단조 감소, α = {self.dimension.alpha:.15g}")
        return True

    def validate_permutation(self) -> bool:
        """타입 번호 치환에 대한 α 불변성"""
        if not (self._requires_automaton() and self._requires_dimension()):
            return False
        order = list(reversed(range(self.matrix.q)))
        permuted = self._solve(self.matrix.permuted(order))
        difference = abs(permuted.alpha - self.dimension.alpha)
        if difference > max(1e-12, 2 * self.config.solver.tol):
            self.errors.append(f"치환 후 α 차이 {difference:.3g}")
            return False
        self._say(f"✅ 치환 불변 (|Δα| = {difference:.3g})")
        return True

    def validate_measure(self) -> bool:
        """깊이 5 까지 μ̂ 가법성과 단계 합"""
        if not (self._requires_automaton() and self._requires_dimension()):
            return False
        table = perron_measure(
            self.system, self.automaton, self.dimension, MEASURE_DEPTH, self.config.exploration.vertex_budget
        )
        defects = measure_defects(table)
        failed = {k: v for k, v in defects.items() if v >= MEASURE_TOL}
        if failed:
            self.errors.extend(f"측도 {k} 결함 {v:.3g}" for k, v in failed.items())
            return False
        self._say(f"✅ 측도 가법성 (정점 {len(table)}개, 최대 결함 {max(defects.values()):.3g})")
        return True

    # -------------------------------------------------------------------------
    # 10-11. 결정성과 차트
    # -------------------------------------------------------------------------

    def validate_determinism(self) -> bool:
        """두 번 탐색한 결과의 JSON/행렬 출력이 같은지"""
        if not self._requires_automaton():
            return False
        again = explore_types(self.system, self.rule, self._limits())
        if again.to_json() != self.automaton.to_json():
            self.errors.append("재탐색한 오토마톤 JSON 이 다릅니다")
            return False
        if assemble_matrix(again).to_frame().to_csv() != assemble_matrix(self.automaton).to_frame().to_csv():
            self.errors.append("재탐색한 행렬 출력이 다릅니다")
            return False
        self._say("✅ 결정성 확인")
        return True

    def validate_chart(self) -> bool:
        """차트 점 검산: 구면 노름, 토러스 범위, 켤레 차이"""
        kind = self.model.chart
        if kind is None or kind == ChartKind.IDENTITY:
            self._say("⏭️ 차트가 지정되지 않아 건너뜀")
            return True
        chart = ChartMap(kind)
        cloud = generate_points(
            self.system,
            self.config.render.default_max_diameter,
            self.config.render.leaf_budget,
            self.config.worker_threads,
        )
        try:
            pushed = chart_push(cloud.points, chart)
        except FtcError as e:
            self.errors.append(f"차트 정의역 오류: {e.message}")
            return False

        problems = []
        if kind == ChartKind.SPHERE:
            norms = np.linalg.norm(pushed, axis=1)
            if np.any(np.abs(norms - 1.0) >= CHART_TOL):
                problems.append("구면 점의 노름이 1 에서 벗어납니다")
            if np.any(pushed[:, -1] < -CHART_TOL):
                problems.append("구면 점이 위쪽 반구 밖에 있습니다")
        else:
            if np.any(pushed < 0.0) or np.any(pushed >= 1.0):
                problems.append("토러스 점이 [0,1) 밖에 있습니다")
        points, components = subsample(cloud, CHART_SAMPLES)
        defect = conjugation_defect(self.system, chart, points, components)
        if defect >= CHART_TOL:
            problems.append(f"켤레 검산 차이 {defect:.3g}")

        if problems:
            self.errors.extend(problems)
            return False
        self._say(f"✅ {kind.value} 차트 검산 통과 (점 {len(cloud)}개, 켤레 차이 {defect:.3g})")
        return True

    # -------------------------------------------------------------------------
    # 실행
    # -------------------------------------------------------------------------

    def run_full_validation(self) -> bool:
        """전체 검증 실행"""
        self._say(f"🔧 모델 '{self.model.name or '<unnamed>'}' 불변식 검증 시작...")
        self._say("=" * 50)

        validations = [
            ("불변성 검증", self.validate_invariance),
            ("중첩 인덱스 검증", self.validate_nested_index),
            ("타입 탐색", self.validate_exploration),
            ("오토마톤 구조 검증", self.validate_automaton_structure),
            ("대표 독립성 검증", self.validate_representatives),
            ("조건 (b) 재전개", self.validate_condition_b),
            ("λ_α 단조성 검증", self.validate_monotonicity),
            ("치환 불변성 검증", self.validate_permutation),
            ("측도 가법성 검증", self.validate_measure),
            ("결정성 검증", self.validate_determinism),
            ("차트 검산", self.validate_chart),
        ]

        all_passed = True
        for name, validator in validations:
            self._say(f"\n📋 {name} 중...")
            try:
                passed = validator()
            except FtcError as e:
                self.errors.append(f"{name} 중 예외 발생: {e}")
                passed = False
            if passed:
                self._say(f"✅ {name} 성공")
            else:
                all_passed = False
                self._say(f"❌ {name} 실패")
                logger.error(f"❌ Validation step failed: {name}")
            self.results.append({"step": name, "passed": passed})

        self._say("\n" + "=" * 50)
        if all_passed:
            self._say("🎉 모든 검증 통과!")
            if self.warnings:
                self._say(f"\n⚠️  경고사항 ({len(self.warnings)}개):")
                for warning in self.warnings:
                    self._say(f"  - {warning}")
        else:
            self._say(f"❌ 검증 실패 ({len(self.errors)}개 오류)")
            self._say("\n🐛 발견된 오류들:")
            for error in self.errors:
                self._say(f"  - {error}")
        return all_passed

    def suggest_fixes(self) -> None:
        """수정 제안"""
        if not self.errors:
            return
        self._say("\n💡 수정 제안:")
        for error in self.errors:
            if "불변성" in error:
                self._say("  🔧 Ω 를 끌개의 볼록 껍질이나 경계상자로 바꿔 보세요")
            elif "타입 탐색" in error:
                self._say("  🔧 FTC_DIM_EXPLORATION__MAX_TYPES / MAX_LEVEL 을 늘리거나 다른 인덱스 규칙을 지정하세요")
            elif "중첩 인덱스" in error:
                self._say("  🔧 ratio_stopping 의 base 를 최대 비율 이하로 지정하세요")
            elif "차트" in error:
                self._say("  🔧 구면 차트는 열린 단위 원판 안의 모델에만 쓸 수 있습니다")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model.name,
            "passed": not self.errors and all(r["passed"] for r in self.results),
            "steps": self.results,
            "errors": self.errors,
            "warnings": self.warnings,
        }


def main(argv: Optional[List[str]] = None) -> None:
    """메인 실행 함수: 인자는 모델 파일 경로 또는 프리셋 이름"""
    from model_io import PRESETS, load_model, preset

    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("사용법: python invariant_validator.py <model.json | preset>")
        sys.exit(1)
    target = argv[0]
    try:
        model = preset(target) if target in PRESETS else load_model(target)
    except FtcError as e:
        print(f"❌ 모델 로드 실패: {e}")
        sys.exit(e.exit_code)

    validator = InvariantValidator(model)
    if not validator.run_full_validation():
        validator.suggest_fixes()
        sys.exit(1)
    print(f"\n🎯 모델 '{model.name or target}'이 모든 검증을 통과했습니다!")


if __name__ == "__main__":
    main()
