# config.py - ftc-dim 통합 Pydantic 설정
# 탐색 한도, 해법 허용오차, 렌더링, WSC 탐침, 로깅 설정을 환경 변수(FTC_DIM_*)와 .env 에서 읽음

import sys
from enum import Enum
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ftc_core import ExplorationLimits

# 환경 변수 로드
load_dotenv()

# =============================================================================
# 열거형 정의 (허용된 값들)
# =============================================================================

class LogLevel(str, Enum):
    """로그 레벨"""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"

# =============================================================================
# 세부 설정 Pydantic 모델들
# =============================================================================

class ExplorationLimitsSettings(BaseModel):
    """타입 탐색 한도"""

    max_types: int = Field(default=256, ge=1, le=100_000, description="최대 이웃 타입 수")
    max_level: int = Field(default=32, ge=1, le=10_000, description="최대 탐색 단계")
    vertex_budget: int = Field(default=1_000_000, ge=1, description="단계별 정점/확장 예산")
    verify_depth: int = Field(default=2, ge=0, le=16, description="동치 재검증 깊이")


class SolverSettings(BaseModel):
    """λ_α = 1 해법 설정"""

    tol: float = Field(default=1e-12, gt=0, le=1e-3, description="이분법 허용오차")
    power_rtol: float = Field(default=1e-14, gt=0, le=1e-3, description="거듭제곱 반복 상대 허용오차")
    max_power_iterations: int = Field(default=20_000, ge=10, le=10_000_000, description="거듭제곱 반복 최대 횟수")
    alpha_cap: float = Field(default=64.0, gt=0, le=1024, description="α 탐색 상한")

    @model_validator(mode="after")
    def validate_tolerances(self):
        if self.power_rtol > self.tol:
            raise ValueError("power_rtol은 tol보다 클 수 없습니다")
        return self


class RenderSettings(BaseModel):
    """점구름 생성과 출력 설정"""

    leaf_budget: int = Field(default=1_000_000, ge=1, description="최대 잎(점) 수")
    default_max_diameter: float = Field(default=0.01, gt=0, le=1, description="기본 잎 지름")
    svg_dot_radius: float = Field(default=0.5, gt=0, le=20, description="SVG 점 반지름(pt)")
    svg_margin: float = Field(default=0.05, ge=0, le=0.5, description="SVG 여백 비율")


class WscSettings(BaseModel):
    """WSC 다중도 탐침 설정"""

    enumeration_budget: int = Field(default=1_000_000, ge=1, description="정지족 열거 예산")
    default_samples: int = Field(default=256, ge=1, le=1_000_000, description="표본 점 수")


class LoggingSettings(BaseModel):
    """로깅 설정"""

    level: LogLevel = Field(default=LogLevel.WARNING)
    log_to_file: bool = Field(default=False)
    log_file_path: Path = Field(default=Path("./logs/"))
    max_file_size_mb: int = Field(default=100, ge=1, le=1000)
    backup_count: int = Field(default=5, ge=1, le=20)
    log_format: str = Field(default="{time:YYYY-MM-DD HH:mm:ss} | {level} | {name}:{function}:{line} - {message}")

# =============================================================================
# 메인 설정 클래스
# =============================================================================

class FtcSettings(BaseSettings):
    """ftc-dim 통합 설정 (우선순위: CLI 플래그 > 환경 변수 > .env > 기본값)"""

    model_config = SettingsConfigDict(
        env_prefix="FTC_DIM_",
        env_nested_delimiter="__",   # FTC_DIM_SOLVER__TOL 같은 중첩 환경 변수
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    project_name: str = Field(default="ftc-dim")
    version: str = Field(default="1.0.0")

    threads: Optional[int] = Field(default=None, ge=1, le=1024, description="병렬 처리 상한 (FTC_DIM_THREADS)")

    exploration: ExplorationLimitsSettings = ExplorationLimitsSettings()
    solver: SolverSettings = SolverSettings()
    render: RenderSettings = RenderSettings()
    wsc: WscSettings = WscSettings()
    logging: LoggingSettings = LoggingSettings()

    @field_validator("threads", mode="before")
    @classmethod
    def validate_threads(cls, v):
        if v == "":
            return None
        return v

    @property
    def worker_threads(self) -> int:
        return self.threads or 1

    def get_summary(self) -> dict:
        """설정 요약 반환"""
        return {
            "project": f"{self.project_name} v{self.version}",
            "limits": (
                f"max_types={self.exploration.max_types}, max_level={self.exploration.max_level}, "
                f"vertex_budget={self.exploration.vertex_budget:,}"
            ),
            "verify_depth": self.exploration.verify_depth,
            "solver": f"tol={self.solver.tol:g}, power_rtol={self.solver.power_rtol:g}",
            "render": f"leaf_budget={self.render.leaf_budget:,}, max_diameter={self.render.default_max_diameter:g}",
            "wsc": f"budget={self.wsc.enumeration_budget:,}, samples={self.wsc.default_samples}",
            "threads": self.worker_threads,
            "log_level": self.logging.level.value,
        }

# =============================================================================
# 설정 로드 및 로깅 구성
# =============================================================================

def load_settings(verbose: bool = False, **overrides: Any) -> FtcSettings:
    """설정을 로드하고 검증 (표준 출력은 보고서 전용이므로 메시지는 stderr 로)"""
    try:
        loaded = FtcSettings(**overrides)
        if verbose:
            summary = loaded.get_summary()
            print("✅ 설정 로드 및 검증 완료!", file=sys.stderr)
            print(f"🚀 {summary['project']}", file=sys.stderr)
            print(f"🔧 한도: {summary['limits']}", file=sys.stderr)
            print(f"📐 해법: {summary['solver']}", file=sys.stderr)
        return loaded

    except Exception as e:
        print(f"❌ 설정 로드 실패: {e}", file=sys.stderr)
        print("\n💡 해결 방법:", file=sys.stderr)
        print("1. FTC_DIM_ 로 시작하는 환경 변수 값을 확인하세요", file=sys.stderr)
        print("2. 중첩 설정은 FTC_DIM_SOLVER__TOL 처럼 '__' 로 구분합니다", file=sys.stderr)
        print("3. .env 파일의 형식이 올바른지 확인하세요", file=sys.stderr)
        raise

# 전역 설정 인스턴스 생성
settings = load_settings()


def setup_logging(config: Optional[FtcSettings] = None, level: Optional[str] = None) -> None:
    """loguru 싱크 구성: stderr + 선택적 회전 파일"""
    config = config or settings
    log = config.logging
    logger.remove()
    logger.add(sys.stderr, level=level or log.level.value, format=log.log_format)
    if log.log_to_file:
        log.log_file_path.mkdir(parents=True, exist_ok=True)
        logger.add(
            log.log_file_path / "ftc_dim.log",
            level=log.level.value,
            format=log.log_format,
            rotation=f"{log.max_file_size_mb} MB",
            retention=log.backup_count,
        )


def limits_from(config: Optional[FtcSettings] = None, **overrides: Optional[int]) -> ExplorationLimits:
    """설정 + CLI 재정의로 불변 ExplorationLimits 생성 (None 인 재정의는 무시)"""
    config = config or settings
    values = {
        "max_types": config.exploration.max_types,
        "max_level": config.exploration.max_level,
        "vertex_budget": config.exploration.vertex_budget,
    }
    values.update({k: v for k, v in overrides.items() if v is not None and k in values})
    return ExplorationLimits(**values)

# =============================================================================
# 메인 실행부
# =============================================================================

if __name__ == "__main__":
    print("🔧 ftc-dim 설정 검증")
    print("=" * 50)
    print("📊 설정 요약:")
    for key, value in settings.get_summary().items():
        print(f"  {key}: {value}")
