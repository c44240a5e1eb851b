# model_io.py - ftc-dim 모델 파일 파싱/검증과 내장 예제
# JSON 모델 파일 → pydantic 스키마 검증 → 정확 스칼라 모델 (IFS 또는 GIFS)

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from errors import FtcError, ModelError
from ftc_core import DirectedSystem, IteratedFunctionSystem, default_rule
from geometry import ConvexPolygon, Similitude
from gifs_core import GifsModel, GraphEdge
from index_sets import IndexSetRule, RuleKind
from manifold_render import ChartKind
from scalar import ONE, ZERO, QuadField, QuadScalar, ScalarLike, as_scalar, golden_ratio_conjugate

# =============================================================================
# 1. 파일 스키마 (pydantic)
# =============================================================================

class FieldSpec(BaseModel):
    """스칼라 체: 정수 d (Q(√d)) 또는 "rational" """
    model_config = ConfigDict(extra="forbid")

    d: Union[int, Literal["rational"]] = Field(default="rational", description="제곱 인수가 없는 양의 정수")

    @field_validator("d")
    @classmethod
    def validate_d(cls, v):
        if isinstance(v, int) and v < 1:
            raise ValueError("d must be a positive square-free integer")
        return v


class MapSpec(BaseModel):
    """x ↦ ratio·O·x + translation"""
    model_config = ConfigDict(extra="forbid")

    ratio: str
    translation: List[str] = Field(min_length=1, max_length=2)
    orthogonal: Optional[List[List[str]]] = Field(default=None, description="생략하면 단위 행렬")


class EdgeSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    id: str = Field(min_length=1)
    source: int = Field(alias="from", ge=1)
    target: int = Field(alias="to", ge=1)
    map: MapSpec


class IndexRuleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: RuleKind
    base: Optional[str] = None


class ModelSpec(BaseModel):
    """모델 파일 최상위 구조"""
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    field: FieldSpec = FieldSpec()
    space_dim: Literal[1, 2]
    kind: Literal["ifs", "gifs"]
    maps: Optional[List[MapSpec]] = None
    omega: Optional[List[Any]] = None
    t: Optional[int] = Field(default=None, ge=1)
    edges: Optional[List[EdgeSpec]] = None
    omegas: Optional[List[List[Any]]] = None
    index_rule: Optional[IndexRuleSpec] = None
    chart: Optional[ChartKind] = None

    @model_validator(mode="after")
    def validate_kind_shape(self):
        if self.kind == "ifs":
            if not self.maps:
                raise ValueError("an ifs model needs a non-empty 'maps' list")
            if self.omega is None:
                raise ValueError("an ifs model needs 'omega'")
            if self.edges is not None or self.omegas is not None or self.t is not None:
                raise ValueError("'t', 'edges' and 'omegas' belong to gifs models")
        else:
            if self.t is None or not self.edges or self.omegas is None:
                raise ValueError("a gifs model needs 't', a non-empty 'edges' list and 'omegas'")
            if self.maps is not None or self.omega is not None:
                raise ValueError("'maps' and 'omega' belong to ifs models")
            if len(self.omegas) != self.t:
                raise ValueError(f"'omegas' must list {self.t} regions")
            for edge in self.edges:
                if edge.source > self.t or edge.target > self.t:
                    raise ValueError(f"edge {edge.id} refers to a vertex outside 1..{self.t}")
        return self

# =============================================================================
# 2. 검증된 모델
# =============================================================================

@dataclass(frozen=True)
class ModelFile:
    """검증된 모델: 체, 공간 차원, IFS/GIFS 시스템, 인덱스 규칙, 차트"""

    field: QuadField
    space_dim: int
    kind: str
    system: Union[IteratedFunctionSystem, GifsModel]
    index_rule: Optional[IndexSetRule] = None
    chart: Optional[ChartKind] = None
    name: Optional[str] = None

    @property
    def is_graph(self) -> bool:
        return self.kind == "gifs"

    def directed(self) -> DirectedSystem:
        return self.system.as_directed()

    @property
    def rule(self) -> IndexSetRule:
        """지정된 규칙, 없으면 기본 규칙"""
        return self.index_rule or default_rule(self.directed().table)


class _Collector:
    """위치가 붙은 오류 목록"""

    def __init__(self, field: QuadField):
        self.field = field
        self.errors: List[str] = []

    def scalar(self, text: Any, where: str) -> Optional[QuadScalar]:
        try:
            return self.field.parse(text)
        except ModelError as e:
            self.errors.append(f"{where}: {e.message}")
            return None

    def guard(self, where: str, build: Callable[[], Any]) -> Any:
        try:
            return build()
        except (ValueError, FtcError) as e:
            self.errors.append(f"{where}: {e}")
            return None


def _build_map(collector: _Collector, spec: MapSpec, n: int, where: str) -> Optional[Similitude]:
    ratio = collector.scalar(spec.ratio, f"{where}.ratio")
    if len(spec.translation) != n:
        collector.errors.append(f"{where}.translation: expected {n} coordinate(s), got {len(spec.translation)}")
        return None
    translation = [collector.scalar(x, f"{where}.translation[{i}]") for i, x in enumerate(spec.translation)]
    orthogonal = None
    if spec.orthogonal is not None:
        orthogonal = [
            [collector.scalar(x, f"{where}.orthogonal[{i}][{j}]") for j, x in enumerate(row)]
            for i, row in enumerate(spec.orthogonal)
        ]
    if ratio is None or None in translation or (orthogonal and any(None in row for row in orthogonal)):
        return None
    if not (ratio.sign() > 0 and ratio < ONE):
        collector.errors.append(f"{where}.ratio: non-contractive generator (ratio {ratio} must lie in (0,1))")
        return None
    if orthogonal is None:
        return Similitude.homothety(ratio, translation)
    return collector.guard(where, lambda: Similitude(ratio, tuple(tuple(r) for r in orthogonal), tuple(translation)))


def _build_region(collector: _Collector, raw: Any, n: int, where: str) -> Optional[ConvexPolygon]:
    if not isinstance(raw, list):
        collector.errors.append(f"{where}: expected a list")
        return None
    if n == 1:
        if len(raw) != 2:
            collector.errors.append(f"{where}: an interval needs two endpoints")
            return None
        lo, hi = (collector.scalar(x, f"{where}[{i}]") for i, x in enumerate(raw))
        if lo is None or hi is None:
            return None
        return collector.guard(where, lambda: ConvexPolygon.interval(lo, hi))

    vertices = []
    for i, vertex in enumerate(raw):
        if not isinstance(vertex, list) or len(vertex) != 2:
            collector.errors.append(f"{where}[{i}]: expected a coordinate pair")
            return None
        coords = [collector.scalar(x, f"{where}[{i}][{j}]") for j, x in enumerate(vertex)]
        if None in coords:
            return None
        vertices.append(tuple(coords))
    return collector.guard(where, lambda: ConvexPolygon(tuple(vertices)))


def _location(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<model>"


def parse_model(text: str) -> ModelFile:
    """모델 텍스트 파싱과 전체 검증 (Ω 불변성 포함); 실패하면 위치별 오류 목록을 담은 ModelError"""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"model file is not valid JSON: {e.msg}", [f"line {e.lineno}, column {e.colno}"]) from e
    try:
        spec = ModelSpec.model_validate(raw)
    except ValidationError as e:
        raise ModelError(
            "model file does not match the schema",
            [f"{_location(err)}: {err['msg']}" for err in e.errors()],
        ) from e

    field = QuadField(1 if spec.field.d == "rational" else spec.field.d)
    collector = _Collector(field)
    n = spec.space_dim

    index_rule = None
    if spec.index_rule is not None:
        base = collector.scalar(spec.index_rule.base, "index_rule.base") if spec.index_rule.base is not None else None
        index_rule = collector.guard("index_rule", lambda: IndexSetRule(spec.index_rule.kind, base))

    if spec.kind == "ifs":
        maps = [_build_map(collector, m, n, f"maps[{i}]") for i, m in enumerate(spec.maps)]
        omega = _build_region(collector, spec.omega, n, "omega")
        if collector.errors:
            raise ModelError("invalid model", collector.errors)
        system = IteratedFunctionSystem(tuple(maps), omega)
    else:
        edges = []
        for i, e in enumerate(spec.edges):
            f = _build_map(collector, e.map, n, f"edges[{i}].map")
            if f is not None:
                edges.append(GraphEdge(e.id, e.source - 1, e.target - 1, f))
        omegas = [_build_region(collector, r, n, f"omegas[{i}]") for i, r in enumerate(spec.omegas)]
        if collector.errors:
            raise ModelError("invalid model", collector.errors)
        system = GifsModel(spec.t, tuple(edges), tuple(omegas))

    system.validate_invariance()
    model = ModelFile(field, n, spec.kind, system, index_rule, spec.chart, spec.name)
    logger.debug(f"✅ Model {spec.name or '<unnamed>'} parsed: {spec.kind}, field {field}, n={n}")
    return model


def load_model(path: str) -> ModelFile:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise ModelError(f"cannot read model file {path}: {e.strerror}") from e
    return parse_model(text)

# =============================================================================
# 3. 직렬화
# =============================================================================

def _render_map(f: Similitude) -> Dict[str, Any]:
    data: Dict[str, Any] = {"ratio": str(f.ratio), "translation": [str(t) for t in f.translation]}
    if f != Similitude.homothety(f.ratio, f.translation):
        data["orthogonal"] = [[str(x) for x in row] for row in f.orthogonal]
    return data


def _render_region(region: ConvexPolygon) -> List[Any]:
    if region.dim == 1:
        return [str(v[0]) for v in region.vertices]
    return [[str(x) for x in v] for v in region.vertices]


def to_dict(model: ModelFile) -> Dict[str, Any]:
    data: Dict[str, Any] = {}
    if model.name:
        data["name"] = model.name
    data["field"] = {"d": "rational" if model.field.is_rational else model.field.d}
    data["space_dim"] = model.space_dim
    data["kind"] = model.kind
    if model.is_graph:
        data["t"] = model.system.t
        data["edges"] = [
            {"id": e.id, "from": e.source + 1, "to": e.target + 1, "map": _render_map(e.map)}
            for e in model.system.edges
        ]
        data["omegas"] = [_render_region(r) for r in model.system.omegas]
    else:
        data["maps"] = [_render_map(f) for f in model.system.maps]
        data["omega"] = _render_region(model.system.omega)
    if model.index_rule is not None:
        data["index_rule"] = model.index_rule.to_dict()
    if model.chart is not None:
        data["chart"] = model.chart.value
    return data


def render(model: ModelFile) -> str:
    """parse_model 로 되읽을 수 있는 JSON 텍스트"""
    return json.dumps(to_dict(model), indent=2, ensure_ascii=False) + "\n"

# =============================================================================
# 4. 내장 예제
# =============================================================================

def _homothety(ratio: ScalarLike, *translation: ScalarLike) -> Dict[str, Any]:
    return {"ratio": str(as_scalar(ratio)), "translation": [str(as_scalar(t)) for t in translation]}


def _sierpinski() -> Dict[str, Any]:
    h = QuadScalar(1, 0)
    half, quarter = h / 2, h / 4
    return {
        "name": "sierpinski",
        "space_dim": 2,
        "kind": "ifs",
        "maps": [_homothety(half, 0, half), _homothety(half, -quarter, 0), _homothety(half, quarter, 0)],
        # f_i 고정점의 볼록 껍질
        "omega": [["-1/2", "0"], ["1/2", "0"], ["0", "1"]],
        "chart": "sphere",
    }


def _lau_ngai_generators(rho: QuadScalar, r: QuadScalar) -> List[Tuple[QuadScalar, QuadScalar, QuadScalar]]:
    """(비율, t_x, t_y) 네 개"""
    return [
        (rho, rho / 2, ZERO),
        (r, rho - rho * r + r / 2, ZERO),
        (r, 1 - r / 2, ZERO),
        (r, r / 2, 1 - r),
    ]


def _preset_scalar(value: Union[ScalarLike, str]) -> QuadScalar:
    """프리셋 매개변수: 정확 스칼라 또는 모델 파일 문법 문자열"""
    if isinstance(value, str):
        radicand = re.search(r"sqrt\((\d+)\)", value)
        return QuadField(int(radicand.group(1)) if radicand else 1).parse(value)
    return as_scalar(value)


def _lau_ngai(rho: Union[ScalarLike, str] = "1/3", r: Union[ScalarLike, str] = "1/3") -> Dict[str, Any]:
    rho, r = _preset_scalar(rho), _preset_scalar(r)
    if not (0 < rho < 1 and 0 < r < 1):
        raise ModelError(f"lau_ngai needs 0 < rho, r < 1 (got rho={rho}, r={r})")
    if rho + 2 * r - rho * r > 1:
        raise ModelError(f"lau_ngai needs rho + 2r - rho*r <= 1, got {rho + 2 * r - rho * r}")
    generators = _lau_ngai_generators(rho, r)
    # 고정점들의 경계상자 = 끌개의 경계상자 (각 축에서 불변)
    fixed = [(tx / (1 - ratio), ty / (1 - ratio)) for ratio, tx, ty in generators]
    x0, x1 = min(p[0] for p in fixed), max(p[0] for p in fixed)
    y0, y1 = min(p[1] for p in fixed), max(p[1] for p in fixed)
    d = rho.d if rho.d != 1 else r.d
    return {
        "name": "lau_ngai",
        "field": {"d": d if d != 1 else "rational"},
        "space_dim": 2,
        "kind": "ifs",
        "maps": [_homothety(ratio, tx, ty) for ratio, tx, ty in generators],
        "omega": [[str(x0), str(y0)], [str(x1), str(y0)], [str(x1), str(y1)], [str(x0), str(y1)]],
    }


def _golden_gasket() -> Dict[str, Any]:
    rho = golden_ratio_conjugate()
    return {
        "name": "golden_gasket",
        "field": {"d": 5},
        "space_dim": 2,
        "kind": "ifs",
        "maps": [_homothety(rho, 0, 0), _homothety(rho, rho * rho, 0), _homothety(rho * rho, rho, rho)],
        "omega": [["0", "0"], ["1", "0"], ["1", "1"]],
        "index_rule": {"kind": "ratio_stopping", "base": str(rho)},
    }


def _torus_gifs() -> Dict[str, Any]:
    # 토러스 전역 좌표의 간선 사상: e1..e3, e5..e7 는 h1..h3, e4/e8 은 g4 의 두 조각
    lower = [["0", "0"], ["1", "0"], ["1", "1/2"], ["0", "1/2"]]
    upper = [["0", "1/2"], ["1", "1/2"], ["1", "1"], ["0", "1"]]
    h = [("0", "1/4"), ("1/4", "1/4"), ("1/2", "1/4")]

    def edge(i: int, source: int, target: int, tx: str, ty: str) -> Dict[str, Any]:
        return {"id": f"e{i}", "from": source, "to": target, "map": {"ratio": "1/2", "translation": [tx, ty]}}

    edges = [edge(1, 1, 1, *h[0]), edge(2, 1, 1, *h[1]), edge(3, 1, 1, *h[2]), edge(4, 1, 2, "1/4", "-1/4"),
             edge(5, 2, 2, *h[0]), edge(6, 2, 2, *h[1]), edge(7, 2, 2, *h[2]), edge(8, 2, 1, "1/4", "3/4")]
    return {
        "name": "torus_gifs",
        "space_dim": 2,
        "kind": "gifs",
        "t": 2,
        "edges": edges,
        "omegas": [lower, upper],
        "chart": "torus",
    }


def _cantor_interval() -> Dict[str, Any]:
    return {
        "name": "cantor_interval",
        "space_dim": 1,
        "kind": "ifs",
        "maps": [{"ratio": "1/2", "translation": ["0"]}, {"ratio": "1/2", "translation": ["1/2"]}],
        "omega": ["0", "1"],
    }


def _torus_ifs() -> Dict[str, Any]:
    return {
        "name": "torus_ifs",
        "space_dim": 2,
        "kind": "ifs",
        "maps": [
            {"ratio": "1/2", "translation": ["0", "1/4"]},
            {"ratio": "1/2", "translation": ["1/4", "1/4"]},
            {"ratio": "1/2", "translation": ["1/2", "1/4"]},
        ],
        "omega": [["0", "0"], ["1", "0"], ["1", "1/2"], ["0", "1/2"]],
    }


def _twin_cantor() -> Dict[str, Any]:
    def edge(i: int, v: int, tx: str) -> Dict[str, Any]:
        return {"id": f"e{i}", "from": v, "to": v, "map": {"ratio": "1/3", "translation": [tx]}}

    return {
        "name": "twin_cantor",
        "space_dim": 1,
        "kind": "gifs",
        "t": 2,
        "edges": [edge(1, 1, "0"), edge(2, 1, "2/3"), edge(3, 2, "0"), edge(4, 2, "2/3")],
        "omegas": [["0", "1"], ["0", "1"]],
    }


PRESETS: Dict[str, Callable[..., Dict[str, Any]]] = {
    "sierpinski": _sierpinski,
    "lau_ngai": _lau_ngai,
    "golden_gasket": _golden_gasket,
    "torus_gifs": _torus_gifs,
    "cantor_interval": _cantor_interval,
    "torus_ifs": _torus_ifs,
    "twin_cantor": _twin_cantor,
}


def preset_text(name: str, **params: Any) -> str:
    if name not in PRESETS:
        raise ModelError(f"unknown preset {name!r}", [f"available: {', '.join(sorted(PRESETS))}"])
    return json.dumps(PRESETS[name](**params), indent=2, ensure_ascii=False) + "\n"


def preset(name: str, **params: Any) -> ModelFile:
    """내장 예제 모델 (lau_ngai 는 rho, r 매개변수)"""
    return parse_model(preset_text(name, **params))
