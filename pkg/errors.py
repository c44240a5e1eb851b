# errors.py - ftc-dim 예외 계층
# CLI 종료 코드와 1:1 로 대응하는 예외 클래스 모음

from typing import Any, Dict, List, Optional, Sequence

# =============================================================================
# 기본 예외
# =============================================================================

class FtcError(Exception):
    """ftc-dim 모든 예외의 기반 클래스"""

    exit_code: int = 1

    def __init__(self, message: str, details: Optional[Sequence[str]] = None):
        super().__init__(message)
        self.message = message
        self.details: List[str] = list(details or [])

    def __str__(self) -> str:
        if not self.details:
            return self.message
        lines = [self.message] + [f"  - {detail}" for detail in self.details]
        return "\n".join(lines)

# =============================================================================
# 모델 오류 (exit 1)
# =============================================================================

class ModelError(FtcError):
    """모델 파일/시스템 정의 오류"""
    exit_code = 1

class FieldMismatchError(ModelError):
    """서로 다른 이차체 원소의 혼합"""

class InvarianceError(ModelError):
    """Ω 불변성 위반 (위반 사상과 증거 꼭짓점 포함)"""

    def __init__(self, message: str, edge: str, witness: Any, details: Optional[Sequence[str]] = None):
        super().__init__(message, details)
        self.edge = edge
        self.witness = witness

class NestedIndexViolation(ModelError):
    """중첩 인덱스 집합 조건 (a)-(e) 위반"""

    def __init__(self, message: str, report: Any):
        super().__init__(message, [str(v) for v in getattr(report, "violations", [])])
        self.report = report

class DegenerateModelError(ModelError):
    """λ_α = 1 의 양의 해가 없는 퇴화 모델"""

class MalformedAutomatonError(ModelError):
    """λ_0 < 1 등 구조적으로 잘못된 오토마톤"""

class EquivalenceCheckFailed(ModelError):
    """verify_depth 재전개로 동치 관계가 반증됨"""

class ChartDomainError(ModelError):
    """차트 정의역 밖의 점"""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index

class ExportError(ModelError):
    """파일 출력 실패 (경로 포함)"""

    def __init__(self, message: str, path: str):
        super().__init__(message)
        self.path = path

# =============================================================================
# 자원 한도 오류 (exit 2)
# =============================================================================

class ResourceLimitError(FtcError):
    """정점/잎/열거 예산 초과"""
    exit_code = 2

class FiniteTypeNotDetected(ResourceLimitError):
    """한도 내에서 유한 타입을 확인하지 못함 (FTC 실패 주장이 아님)"""

    def __init__(self, message: str, types_found: int, level_reached: int, rule: str):
        super().__init__(message, [
            f"types found: {types_found}",
            f"level reached: {level_reached}",
            f"index rule: {rule}",
        ])
        self.types_found = types_found
        self.level_reached = level_reached
        self.rule = rule

# =============================================================================
# 수치 오류 (exit 3)
# =============================================================================

class NumericalError(FtcError):
    """반복 해법 수렴 실패"""
    exit_code = 3

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        diagnostics = dict(diagnostics or {})
        super().__init__(message, [f"{key}: {value}" for key, value in sorted(diagnostics.items())])
        self.diagnostics = diagnostics
