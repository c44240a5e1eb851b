# ftc_core.py - ftc-dim 유한 타입 조건 핵심 엔진
# 단계별 정점 생성, 이웃 계산, 타입 식별, 축약 그래프 구성, WSC 다중도 탐침

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from errors import (
    EquivalenceCheckFailed,
    FiniteTypeNotDetected,
    InvarianceError,
    MalformedAutomatonError,
    ModelError,
    ResourceLimitError,
)
from geometry import (
    ConvexPolygon,
    MapKey,
    Similitude,
    canonical_key,
    compose,
    compose_all,
    find_outside_vertex,
    invert,
    map_polygon,
    open_overlap,
)
from index_sets import (
    IndexSetRule,
    SymbolTable,
    Word,
    child_scale,
    extension_words,
    format_word,
    normalized_scale,
)
from scalar import ONE, QuadScalar, ScalarLike, as_scalar

# =============================================================================
# 1. 한도와 시스템 표현
# =============================================================================

@dataclass(frozen=True)
class ExplorationLimits:
    """탐색 한도 (설정 파일/CLI 에서 주입)"""
    max_types: int = 256
    max_level: int = 32
    vertex_budget: int = 1_000_000

    def __post_init__(self):
        if self.max_types < 1 or self.max_level < 1 or self.vertex_budget < 1:
            raise ValueError("exploration limits must be positive")


@dataclass(frozen=True)
class InvarianceReport:
    """Ω 불변성을 통과한 간선 목록 (위반은 InvarianceError 로 즉시 보고)"""
    checked: Tuple[str, ...]


@dataclass(frozen=True)
class DirectedSystem:
    """IFS 와 GIFS 의 공통 내부 표현 (IFS 는 그래프 정점 1개, 모든 간선이 자기 루프)"""

    maps: Tuple[Similitude, ...]
    sources: Tuple[int, ...]
    targets: Tuple[int, ...]
    omegas: Tuple[ConvexPolygon, ...]
    labels: Tuple[str, ...]
    graph: bool = False

    def __post_init__(self):
        if not self.maps:
            raise ModelError("the system has no maps")
        t = len(self.omegas)
        if t < 1:
            raise ModelError("the system needs at least one invariant region")
        dims = {f.dim for f in self.maps} | {omega.dim for omega in self.omegas}
        if len(dims) != 1:
            raise ModelError(f"maps and regions disagree on the space dimension: {sorted(dims)}")
        for label, source, target in zip(self.labels, self.sources, self.targets):
            if not (0 <= source < t and 0 <= target < t):
                raise ModelError(f"edge {label} refers to a graph vertex outside 1..{t}")

    @property
    def t(self) -> int:
        return len(self.omegas)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @cached_property
    def table(self) -> SymbolTable:
        ratios = tuple(f.ratio for f in self.maps)
        if self.graph:
            return SymbolTable.for_graph(ratios, self.sources, self.targets)
        return SymbolTable.for_ifs(ratios)

    def word_map(self, word: Word) -> Similitude:
        return compose_all([self.maps[s] for s in word], self.dim)

    def format_word(self, word: Word) -> str:
        if not self.graph:
            return format_word(word)
        return "".join(self.labels[s] for s in word) or "()"

    def validate_invariance(self) -> InvarianceReport:
        """각 간선 e: i→j 에 대해 S_e(Ω_j) ⊆ Ω_i 를 정확히 검사"""
        self.table  # 비수축 비율은 여기서 ModelError
        checked = []
        for index, f in enumerate(self.maps):
            source, target = self.sources[index], self.targets[index]
            image = map_polygon(f, self.omegas[target])
            witness = find_outside_vertex(self.omegas[source], image)
            if witness is not None:
                point = "(" + ", ".join(str(x) for x in witness) + ")"
                raise InvarianceError(
                    f"invariance fails for {self.labels[index]}: image vertex {point} lies outside Ω_{source + 1}",
                    edge=self.labels[index],
                    witness=witness,
                )
            checked.append(self.labels[index])
        for vertex in range(self.t):
            if not self.table.outgoing(vertex):
                raise ModelError(f"graph vertex {vertex + 1} has no outgoing edge")
        return InvarianceReport(tuple(checked))


@dataclass(frozen=True)
class IteratedFunctionSystem:
    """축소 닮음변환 IFS 와 불변 열린 집합 Ω"""

    maps: Tuple[Similitude, ...]
    omega: ConvexPolygon

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if not self.maps:
            raise ModelError("empty IFS: at least one map is required")
        for index, f in enumerate(self.maps):
            if not f.is_contraction:
                raise ModelError(f"map f{index + 1} is not contractive (ratio {f.ratio})")

    @property
    def dim(self) -> int:
        return self.omega.dim

    def as_directed(self) -> DirectedSystem:
        count = len(self.maps)
        return DirectedSystem(
            maps=self.maps,
            sources=(0,) * count,
            targets=(0,) * count,
            omegas=(self.omega,),
            labels=tuple(f"f{i + 1}" for i in range(count)),
            graph=False,
        )

    def validate_invariance(self) -> InvarianceReport:
        return self.as_directed().validate_invariance()


def as_directed(system: Any) -> DirectedSystem:
    if isinstance(system, DirectedSystem):
        return system
    return system.as_directed()


def default_rule(table: SymbolTable) -> IndexSetRule:
    """비율이 모두 같으면 고정 길이, 아니면 최대 비율 기준 비율 정지"""
    if all(r == table.ratios[0] for r in table.ratios):
        return IndexSetRule.fixed_length()
    return IndexSetRule.ratio_stopping(max(table.ratios))

# =============================================================================
# 2. 정점, 간선, 이웃 서명
# =============================================================================

@dataclass(frozen=True)
class Vertex:
    """단계 k 의 정점 (S_u, k); 그래프 시스템이면 (S_e, i, j, k)"""

    map: Similitude
    level: int
    smallest_word: Word
    initial: int = 0
    terminal: int = 0
    scale: Optional[QuadScalar] = None

    @property
    def key(self) -> Tuple[MapKey, int, int]:
        return canonical_key(self.map), self.initial, self.terminal

    @property
    def ratio(self) -> QuadScalar:
        return self.map.ratio


@dataclass(frozen=True)
class ParentEdge:
    """ω →^w σ (retained 가 False 이면 사전식 중복 제거로 삭제된 간선)"""

    parent: int
    child: int
    word: Word
    ratio: QuadScalar
    retained: bool


@dataclass(frozen=True)
class LevelResult:
    level: int
    vertices: Tuple[Vertex, ...]
    edges: Tuple[ParentEdge, ...]

    def retained_edges(self) -> List[ParentEdge]:
        return [e for e in self.edges if e.retained]


@dataclass(frozen=True)
class NeighborhoodSignature:
    """정규화된 이웃 사상 τ_σ = S_ω⁻¹S_σ 의 정렬된 목록 (+ 종점 태그, + 비율 정지 스케일)"""

    entries: Tuple[Tuple[MapKey, int], ...]
    terminal: int = 0
    scale: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if list(self.entries) != sorted(self.entries):
            raise ValueError("signature entries must be sorted")
        if self.identity_count() != 1:
            raise ValueError("signature must contain its own identity entry exactly once")

    def identity_count(self) -> int:
        own = (_IDENTITY_KEYS[len(self.entries[0][0][2]) // 5], self.terminal) if self.entries else None
        return sum(1 for entry in self.entries if entry == own)

    @property
    def size(self) -> int:
        return len(self.entries)


_IDENTITY_KEYS = {n: canonical_key(Similitude.identity(n)) for n in (1, 2)}


def make_signature(
    neighbors: Iterable[Tuple[Similitude, int]],
    terminal: int,
    scale: Optional[QuadScalar],
) -> NeighborhoodSignature:
    entries = tuple(sorted((canonical_key(tau), j) for tau, j in neighbors))
    return NeighborhoodSignature(entries, terminal, None if scale is None else scale.key())


@dataclass(frozen=True)
class Representative:
    """타입의 대표 정점: 유지된 간선을 따라 도달한 (S_u, k)"""

    map: Similitude
    word: Word
    level: int
    initial: int
    terminal: int


@dataclass(frozen=True)
class TypeEdge:
    target: int
    ratio: QuadScalar
    word: Word


@dataclass(frozen=True)
class NeighborhoodType:
    """이웃 타입 하나: 서명, 정규화 이웃, 자손 간선, 대표 정점들"""

    id: int
    signature: NeighborhoodSignature
    neighbors: Tuple[Tuple[Similitude, int], ...]
    scale: Optional[QuadScalar]
    edges: Tuple[TypeEdge, ...]
    representatives: Tuple[Representative, ...]
    level: int

    @property
    def label(self) -> str:
        return f"T{self.id + 1}"

    @property
    def representative(self) -> Representative:
        return self.representatives[0]

# =============================================================================
# 3. 타입 오토마톤
# =============================================================================

@dataclass(frozen=True)
class TypeAutomaton:
    """유한 이웃 타입 집합과 축약 그래프 자손 간선"""

    types: Tuple[NeighborhoodType, ...]
    root_ids: Tuple[int, ...]
    rule: IndexSetRule
    fixpoint_level: int
    space_dim: int
    graph: bool
    symbol_labels: Tuple[str, ...]
    pruned: Tuple[NeighborhoodSignature, ...] = ()

    @property
    def q(self) -> int:
        return len(self.types)

    @property
    def root_id(self) -> int:
        return self.root_ids[0]

    @cached_property
    def _signature_index(self) -> Dict[NeighborhoodSignature, int]:
        return {t.signature: t.id for t in self.types}

    def type_of(self, signature: NeighborhoodSignature) -> Optional[int]:
        return self._signature_index.get(signature)

    @cached_property
    def _pruned_set(self) -> frozenset:
        return frozenset(self.pruned)

    def is_pruned(self, signature: NeighborhoodSignature) -> bool:
        return signature in self._pruned_set

    def offspring_multiset(self, type_id: int) -> Counter:
        return Counter((e.target, e.ratio) for e in self.types[type_id].edges)

    def format_word(self, word: Word) -> str:
        if not self.graph:
            return format_word(word)
        return "".join(self.symbol_labels[s] for s in word) or "()"

    def productions(self) -> List[str]:
        """"T1 -> T2 + T3 + T4 + T5" 형식의 자손 규칙"""
        uniform = len({e.ratio for t in self.types for e in t.edges}) <= 1
        lines = []
        for node in self.types:
            counts = Counter((e.target, e.ratio) for e in node.edges)
            terms = []
            for (target, ratio), mult in sorted(counts.items(), key=lambda item: (item[0][0], item[0][1].key())):
                term = f"T{target + 1}"
                if not uniform:
                    term = f"{term}<{ratio}>"
                if mult > 1:
                    term = f"{mult}*{term}"
                terms.append(term)
            lines.append(f"{node.label} -> {' + '.join(terms)}")
        return lines

    def to_dict(self) -> Dict[str, Any]:
        types = []
        for node in self.types:
            rep = node.representative
            types.append({
                "id": node.label,
                "root": node.id in self.root_ids,
                "level": node.level,
                "representative": {
                    "word": self.format_word(rep.word),
                    "level": rep.level,
                    "initial": rep.initial + 1,
                    "terminal": rep.terminal + 1,
                },
                "scale": None if node.scale is None else str(node.scale),
                "neighbors": [
                    {"map": str(tau), "terminal": j + 1} for tau, j in node.neighbors
                ],
                "edges": [
                    {"target": f"T{e.target + 1}", "ratio": str(e.ratio), "word": self.format_word(e.word)}
                    for e in node.edges
                ],
            })
        return {
            "index_rule": self.rule.to_dict(),
            "fixpoint_level": self.fixpoint_level,
            "type_count": self.q,
            "roots": [f"T{r + 1}" for r in self.root_ids],
            "productions": self.productions(),
            "types": types,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)

# =============================================================================
# 4. 절대 단계 생성기 (V_k 의 명시적 구성)
# =============================================================================

class LevelBuilder:
    """V_0, V_1, ... 를 순서대로 만들고 이웃/서명을 계산"""

    def __init__(self, system: Any, rule: Optional[IndexSetRule] = None, vertex_budget: int = 1_000_000):
        self.system = as_directed(system)
        self.rule = rule or default_rule(self.system.table)
        self.vertex_budget = vertex_budget
        roots = tuple(
            Vertex(Similitude.identity(self.system.dim), 0, (), i, i, normalized_scale(self.rule, ONE, 0))
            for i in range(self.system.t)
        )
        self._levels: List[LevelResult] = [LevelResult(0, roots, ())]
        self._word_maps: Dict[Word, Similitude] = {}
        self._neighborhoods: Dict[int, List[List[int]]] = {}

    def _word_map(self, word: Word) -> Similitude:
        if word not in self._word_maps:
            self._word_maps[word] = self.system.word_map(word)
        return self._word_maps[word]

    def build(self, k: int) -> LevelResult:
        while len(self._levels) <= k:
            self._grow()
        return self._levels[k]

    def _grow(self) -> None:
        previous = self._levels[-1]
        level = previous.level + 1
        table = self.system.table
        candidates: Dict[Tuple[MapKey, int, int], Dict[str, Any]] = {}

        for p_index, parent in enumerate(previous.vertices):
            for w, ratio in extension_words(self.rule, table, parent.scale, parent.terminal):
                child_map = compose(parent.map, self._word_map(w))
                terminal = table.terminal(w, parent.terminal)
                key = (canonical_key(child_map), parent.initial, terminal)
                entry = candidates.get(key)
                if entry is None:
                    if len(candidates) >= self.vertex_budget:
                        raise ResourceLimitError(
                            f"level {level} exceeds the vertex budget of {self.vertex_budget}"
                        )
                    entry = candidates[key] = {
                        "map": child_map,
                        "initial": parent.initial,
                        "terminal": terminal,
                        "scale": child_scale(self.rule, parent.scale, ratio),
                        "origins": [],
                    }
                entry["origins"].append((w, parent.smallest_word, p_index, ratio))

        ordered = sorted(
            candidates.values(),
            key=lambda e: (e["initial"], min(pw + w for w, pw, _, _ in e["origins"])),
        )
        vertices, edges = [], []
        for c_index, entry in enumerate(ordered):
            origins = entry["origins"]
            smallest = min(pw + w for w, pw, _, _ in origins)
            vertices.append(Vertex(entry["map"], level, smallest, entry["initial"], entry["terminal"], entry["scale"]))
            winner = min(origins, key=lambda o: (o[0], o[1]))
            for w, pw, p_index, ratio in origins:
                edges.append(ParentEdge(p_index, c_index, w, ratio, (w, pw) == (winner[0], winner[1])))

        logger.debug(f"📊 Level {level}: {len(vertices)} vertices, {len(edges)} candidate edges")
        self._levels.append(LevelResult(level, tuple(vertices), tuple(edges)))

    # ---- 이웃 --------------------------------------------------------------

    def region(self, vertex: Vertex) -> ConvexPolygon:
        return map_polygon(vertex.map, self.system.omegas[vertex.terminal])

    def neighborhoods(self, k: int) -> List[List[int]]:
        """단계 k 각 정점의 이웃 인덱스 (자기 자신 포함, 정렬됨)"""
        if k in self._neighborhoods:
            return self._neighborhoods[k]
        vertices = self.build(k).vertices
        regions = [self.region(v) for v in vertices]
        result = [[i] for i in range(len(vertices))]
        for i, j in _candidate_pairs(vertices, regions):
            if open_overlap(regions[i], regions[j]):
                result[i].append(j)
                result[j].append(i)
        for members in result:
            members.sort()
        self._neighborhoods[k] = result
        return result

    def signature(self, k: int, index: int) -> NeighborhoodSignature:
        vertices = self.build(k).vertices
        omega = vertices[index]
        inverse = invert(omega.map)
        neighbors = [
            (compose(inverse, vertices[j].map), vertices[j].terminal) for j in self.neighborhoods(k)[index]
        ]
        return make_signature(neighbors, omega.terminal, omega.scale)


def _float_bounds(region: ConvexPolygon) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = region.bounds()
    return np.array([x.to_float() for x in lo]), np.array([x.to_float() for x in hi])


def _candidate_pairs(vertices: Sequence[Vertex], regions: Sequence[ConvexPolygon]) -> List[Tuple[int, int]]:
    """부동소수점 경계상자로 걸러낸 (i, j) 후보 쌍, 최종 판정은 정확 산술"""
    if len(vertices) < 2:
        return []
    bounds = [_float_bounds(r) for r in regions]
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    slack = 1e-9 * max(1.0, float(np.max(np.abs(np.concatenate([lo, hi])))))
    order = np.argsort(lo[:, 0], kind="stable")
    pairs = []
    for position, i in enumerate(order):
        for j in order[position + 1:]:
            if lo[j, 0] > hi[i, 0] + slack:
                break
            if vertices[i].initial != vertices[j].initial:
                continue
            if np.all(lo[i] < hi[j] + slack) and np.all(lo[j] < hi[i] + slack):
                pairs.append((int(min(i, j)), int(max(i, j))))
    return pairs


def build_level(
    system: Any,
    rule: Optional[IndexSetRule] = None,
    k: int = 1,
    vertex_budget: int = 1_000_000,
) -> LevelResult:
    """V_k 와 그 단계로 들어오는 간선 (유지/삭제 표시 포함)"""
    return LevelBuilder(system, rule, vertex_budget).build(k)


def neighborhood(
    omega: Vertex,
    level_vertices: Sequence[Vertex],
    regions: Sequence[ConvexPolygon],
) -> List[Vertex]:
    """N(ω): 같은 단계에서 Ω 상이 ω 의 상과 열린 교차하는 정점들 (ω 포함)

    regions 는 그래프 정점별 Ω_j (IFS 는 하나).
    """
    own = map_polygon(omega.map, regions[omega.terminal])
    result = []
    for other in level_vertices:
        if other.initial != omega.initial:
            continue
        if other.key == omega.key or open_overlap(own, map_polygon(other.map, regions[other.terminal])):
            result.append(other)
    return result

# =============================================================================
# 5. 정규화 좌표에서의 타입 탐색
# =============================================================================

@dataclass(frozen=True)
class _Frame:
    """ω 를 항등 사상으로 두는 정규화 좌표의 이웃 (0 번이 ω 자신)"""
    members: Tuple[Tuple[Similitude, int], ...]
    terminal: int
    scale: Optional[QuadScalar]

    def signature(self) -> NeighborhoodSignature:
        return make_signature(self.members, self.terminal, self.scale)


@dataclass(frozen=True)
class _Child:
    word: Word
    ratio: QuadScalar
    map: Similitude
    frame: _Frame


class _FrameExpander:
    """정규화 좌표에서 ω 의 유지된 자식과 그 이웃을 계산"""

    def __init__(self, system: DirectedSystem, rule: IndexSetRule, vertex_budget: int):
        self.system = system
        self.rule = rule
        self.vertex_budget = vertex_budget
        self._word_maps: Dict[Word, Similitude] = {}

    def _word_map(self, word: Word) -> Similitude:
        if word not in self._word_maps:
            self._word_maps[word] = self.system.word_map(word)
        return self._word_maps[word]

    def expand(self, frame: _Frame) -> List[_Child]:
        table = self.system.table
        candidates: Dict[Tuple[MapKey, int], Dict[str, Any]] = {}

        # ω 자식의 모든 부모와 모든 이웃의 부모는 N(ω) 에 속한다
        for m_index, (tau, terminal) in enumerate(frame.members):
            member_scale = None if frame.scale is None else frame.scale * tau.ratio
            for w, ratio in extension_words(self.rule, table, member_scale, terminal):
                child_map = compose(tau, self._word_map(w))
                child_terminal = table.terminal(w, terminal)
                key = (canonical_key(child_map), child_terminal)
                entry = candidates.get(key)
                if entry is None:
                    if len(candidates) >= self.vertex_budget:
                        raise ResourceLimitError(
                            f"neighborhood expansion exceeds the vertex budget of {self.vertex_budget}"
                        )
                    entry = candidates[key] = {
                        "map": child_map,
                        "terminal": child_terminal,
                        "scale": child_scale(self.rule, member_scale, ratio),
                        "region": map_polygon(child_map, self.system.omegas[child_terminal]),
                        "origins": [],
                    }
                entry["origins"].append((w, m_index, ratio))

        entries = list(candidates.values())
        children = []
        for entry in entries:
            w, m_index, ratio = min(entry["origins"], key=lambda o: (o[0], o[1]))
            if m_index != 0:
                continue
            inverse = invert(entry["map"])
            others = [
                (compose(inverse, other["map"]), other["terminal"])
                for other in entries
                if other is not entry and open_overlap(entry["region"], other["region"])
            ]
            others.sort(key=lambda item: (canonical_key(item[0]), item[1]))
            identity = Similitude.identity(self.system.dim)
            frame_out = _Frame(((identity, entry["terminal"]),) + tuple(others), entry["terminal"], entry["scale"])
            children.append(_Child(w, ratio, entry["map"], frame_out))

        children.sort(key=lambda c: c.word)
        return children


@dataclass
class _TypeRecord:
    frame: _Frame
    signature: NeighborhoodSignature
    level: int
    representatives: List[Representative]
    edges: List[TypeEdge] = field(default_factory=list)


def explore_types(
    system: Any,
    rule: Optional[IndexSetRule] = None,
    limits: Optional[ExplorationLimits] = None,
) -> TypeAutomaton:
    """이웃 타입 오토마톤을 너비 우선으로 구성 (고정점까지)

    한도 초과는 FiniteTypeNotDetected: FTC 가 거짓이라는 주장이 아니다.
    """
    directed = as_directed(system)
    directed.validate_invariance()
    rule = rule or default_rule(directed.table)
    limits = limits or ExplorationLimits()
    expander = _FrameExpander(directed, rule, limits.vertex_budget)
    logger.info(f"🔍 Exploring neighborhood types ({directed.t} root(s), {len(directed.maps)} maps, {rule.describe()})")

    records: List[_TypeRecord] = []
    index: Dict[NeighborhoodSignature, int] = {}
    identity = Similitude.identity(directed.dim)
    root_scale = normalized_scale(rule, ONE, 0)

    for i in range(directed.t):
        frame = _Frame(((identity, i),), i, root_scale)
        signature = frame.signature()
        index[signature] = len(records)
        records.append(_TypeRecord(frame, signature, 0, [Representative(identity, (), 0, i, i)]))

    queue = deque(range(len(records)))
    while queue:
        tid = queue.popleft()
        record = records[tid]
        if record.level >= limits.max_level:
            raise FiniteTypeNotDetected(
                f"finite type not detected within max_level={limits.max_level}",
                types_found=len(records), level_reached=record.level, rule=rule.describe(),
            )
        parent_rep = record.representatives[0]
        for child in expander.expand(record.frame):
            signature = child.frame.signature()
            rep = Representative(
                compose(parent_rep.map, child.map),
                parent_rep.word + child.word,
                parent_rep.level + 1,
                parent_rep.initial,
                child.frame.terminal,
            )
            target = index.get(signature)
            if target is None:
                if len(records) >= limits.max_types:
                    raise FiniteTypeNotDetected(
                        f"finite type not detected within max_types={limits.max_types}",
                        types_found=len(records), level_reached=rep.level, rule=rule.describe(),
                    )
                target = len(records)
                index[signature] = target
                records.append(_TypeRecord(child.frame, signature, rep.level, [rep]))
                queue.append(target)
                logger.debug(f"🆕 T{target + 1} discovered at level {rep.level} via {directed.format_word(rep.word)}")
            elif len(records[target].representatives) < 3 and all(
                canonical_key(r.map) != canonical_key(rep.map) or r.level != rep.level
                for r in records[target].representatives
            ):
                records[target].representatives.append(rep)
            record.edges.append(TypeEdge(target, child.ratio, child.word))

    fixpoint_level = max(r.level for r in records) + 1
    automaton = _prune(records, directed, rule, fixpoint_level)
    logger.info(f"✅ Fixpoint reached at level {fixpoint_level}: {automaton.q} neighborhood type(s)")
    return automaton


def _prune(
    records: List[_TypeRecord],
    directed: DirectedSystem,
    rule: IndexSetRule,
    fixpoint_level: int,
) -> TypeAutomaton:
    """자손 없는 타입 제거를 고정점까지 반복하고 번호를 발견 순서대로 압축"""
    alive = set(range(len(records)))
    changed = True
    while changed:
        changed = False
        for tid in sorted(alive):
            if not any(e.target in alive for e in records[tid].edges):
                alive.discard(tid)
                changed = True

    roots = list(range(directed.t))
    if any(r not in alive for r in roots):
        raise MalformedAutomatonError("a root type was pruned: the reduced graph is empty")

    renumber = {old: new for new, old in enumerate(sorted(alive))}
    types = []
    for old in sorted(alive):
        record = records[old]
        types.append(NeighborhoodType(
            id=renumber[old],
            signature=record.signature,
            neighbors=record.frame.members,
            scale=record.frame.scale,
            edges=tuple(
                TypeEdge(renumber[e.target], e.ratio, e.word) for e in record.edges if e.target in alive
            ),
            representatives=tuple(record.representatives),
            level=record.level,
        ))
    pruned = tuple(records[tid].signature for tid in range(len(records)) if tid not in alive)
    if pruned:
        logger.debug(f"✂️ Pruned {len(pruned)} childless type(s)")
    return TypeAutomaton(
        types=tuple(types),
        root_ids=tuple(renumber[r] for r in roots),
        rule=rule,
        fixpoint_level=fixpoint_level,
        space_dim=directed.dim,
        graph=directed.graph,
        symbol_labels=directed.labels,
        pruned=pruned,
    )

# =============================================================================
# 6. 대표 독립성 / 조건 (b) 검증
# =============================================================================

@dataclass
class RepresentativeReport:
    """절대 단계에서 각 정점의 자손을 타입 간선과 대조한 결과"""
    depth: int
    vertices_checked: Dict[int, int] = field(default_factory=dict)
    mismatches: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def classify_level(builder: LevelBuilder, automaton: TypeAutomaton, k: int) -> List[Optional[int]]:
    """단계 k 각 정점의 타입 id (가지치기된 서명이면 None)"""
    types: List[Optional[int]] = []
    for index in range(len(builder.build(k).vertices)):
        signature = builder.signature(k, index)
        tid = automaton.type_of(signature)
        if tid is None and not automaton.is_pruned(signature):
            raise EquivalenceCheckFailed(
                f"level {k} vertex {index} has a neighborhood unknown to the automaton"
            )
        types.append(tid)
    return types


def check_representative_independence(
    system: Any,
    automaton: TypeAutomaton,
    depth: int,
    vertex_budget: int = 1_000_000,
) -> RepresentativeReport:
    """같은 타입의 모든 정점이 같은 (타입, 비율) 자손 다중집합을 갖는지 절대 단계에서 확인"""
    builder = LevelBuilder(system, automaton.rule, vertex_budget)
    report = RepresentativeReport(depth=depth)
    current = classify_level(builder, automaton, 0)
    for k in range(depth):
        following = classify_level(builder, automaton, k + 1)
        offspring: Dict[int, Counter] = {}
        for edge in builder.build(k + 1).retained_edges():
            target = following[edge.child]
            if target is not None:
                offspring.setdefault(edge.parent, Counter())[(target, edge.ratio)] += 1
        for index, tid in enumerate(current):
            if tid is None:
                continue
            report.vertices_checked[tid] = report.vertices_checked.get(tid, 0) + 1
            observed = offspring.get(index, Counter())
            if observed != automaton.offspring_multiset(tid):
                vertex = builder.build(k).vertices[index]
                report.mismatches.append(
                    f"T{tid + 1} at level {k} word {automaton.format_word(vertex.smallest_word)}: "
                    f"offspring differ from the type's edges"
                )
        current = following
    if report.ok:
        logger.debug(f"✅ Representative independence holds to depth {depth}")
    else:
        logger.error(f"❌ Representative independence fails for {len(report.mismatches)} vertex/vertices")
    return report


def _future_words(
    rule: IndexSetRule,
    table: SymbolTable,
    scale: Optional[QuadScalar],
    terminal: int,
    depth: int,
) -> Tuple[Tuple[Word, ...], ...]:
    """다음 depth 단계의 미래 인덱스 집합 (단계별 확장어 목록)"""
    levels = []
    frontier = [((), scale, terminal)]
    for _ in range(depth):
        next_frontier = []
        for word, s, j in frontier:
            for w, ratio in extension_words(rule, table, s, j):
                next_frontier.append((word + w, child_scale(rule, s, ratio), table.terminal(w, j)))
        frontier = next_frontier
        levels.append(tuple(sorted(word for word, _, _ in frontier)))
    return tuple(levels)


def verify_condition_b(system: Any, automaton: TypeAutomaton, depth: int) -> int:
    """대표 정점들을 절대 비율로 depth 단계 재전개해 미래 인덱스 집합 일치를 확인

    반증에만 건전한 검사다. 검사한 (타입, 대표) 쌍의 수를 돌려준다.
    """
    directed = as_directed(system)
    rule = automaton.rule
    checked = 0
    for node in automaton.types:
        if len(node.representatives) < 2:
            continue
        reference = None
        for rep in node.representatives:
            futures = []
            for tau, j in node.neighbors:
                absolute = compose(rep.map, tau)
                scale = normalized_scale(rule, absolute.ratio, rep.level)
                futures.append(_future_words(rule, directed.table, scale, j, depth))
            if reference is None:
                reference = futures
            elif futures != reference:
                raise EquivalenceCheckFailed(
                    f"{node.label}: representatives {automaton.format_word(node.representatives[0].word)} and "
                    f"{automaton.format_word(rep.word)} have different future index sets within {depth} levels"
                )
            checked += 1
    logger.debug(f"✅ Condition (b) re-expansion agrees for {checked} representative(s) at depth {depth}")
    return checked

# =============================================================================
# 7. 정지 족 𝒜_b 와 WSC 다중도 탐침
# =============================================================================

@dataclass(frozen=True)
class StoppingMember:
    map: Similitude
    word: Word
    initial: int
    terminal: int


def stopping_family(system: Any, b: ScalarLike, budget: int = 1_000_000) -> List[StoppingMember]:
    """𝒜_b = {S_u : ρ_u ≤ b < ρ_{u⁻}} (사상 기준 중복 제거, 사전식 순서)"""
    directed = as_directed(system)
    b = as_scalar(b)
    if not (b.sign() > 0 and b <= ONE):
        raise ModelError(f"stopping threshold b must lie in (0,1], got {b}")
    table = directed.table
    members: Dict[Tuple[MapKey, int, int], StoppingMember] = {}

    for start in range(directed.t):
        stack = [((), Similitude.identity(directed.dim), start)]
        while stack:
            word, current, vertex = stack.pop()
            if current.ratio <= b:
                key = (canonical_key(current), start, vertex)
                if key not in members:
                    if len(members) >= budget:
                        raise ResourceLimitError(f"|A_b| exceeds the enumeration budget of {budget}")
                    members[key] = StoppingMember(current, word, start, vertex)
                continue
            for symbol in reversed(table.outgoing(vertex)):
                stack.append((word + (symbol,), compose(current, directed.maps[symbol]), table.targets[symbol] if table.is_graph else vertex))

    return sorted(members.values(), key=lambda m: (m.initial, m.word))


def _polygon_array(member: StoppingMember, omegas: Sequence[ConvexPolygon]) -> np.ndarray:
    image = map_polygon(member.map, omegas[member.terminal])
    return np.array([[x.to_float() for x in v] for v in image.vertices])


def closure_counts(
    points: np.ndarray,
    components: Optional[np.ndarray],
    family: Sequence[StoppingMember],
    omegas: Sequence[ConvexPolygon],
    tol: float = 1e-12,
) -> np.ndarray:
    """각 점을 닫힌 S(Ω) 로 덮는 𝒜_b 원소의 수"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    counts = np.zeros(len(points), dtype=int)
    if len(points) == 0:
        return counts
    groups: Dict[Tuple[int, int], List[StoppingMember]] = {}
    for member in family:
        groups.setdefault((member.initial, member.terminal), []).append(member)

    for (initial, _), members in sorted(groups.items()):
        mask = np.ones(len(points), dtype=bool) if components is None else (components == initial + 1)
        if not mask.any():
            continue
        polygons = np.stack([_polygon_array(m, omegas) for m in members])
        x = points[mask]
        if polygons.shape[2] == 1:
            lo = np.minimum(polygons[:, 0, 0], polygons[:, 1, 0])
            hi = np.maximum(polygons[:, 0, 0], polygons[:, 1, 0])
            inside = (x[:, None, 0] >= lo[None, :] - tol) & (x[:, None, 0] <= hi[None, :] + tol)
        else:
            inside = np.ones((len(x), len(members)), dtype=bool)
            for k in range(polygons.shape[1]):
                a = polygons[:, k, :]
                edge = polygons[:, (k + 1) % polygons.shape[1], :] - a
                cross = edge[None, :, 0] * (x[:, None, 1] - a[None, :, 1]) - edge[None, :, 1] * (x[:, None, 0] - a[None, :, 0])
                inside &= cross >= -tol
        counts[mask] += inside.sum(axis=1)
    return counts


def wsc_multiplicity_probe(
    system: Any,
    b: ScalarLike,
    samples: int = 256,
    budget: int = 1_000_000,
    points: Optional[np.ndarray] = None,
    components: Optional[np.ndarray] = None,
) -> int:
    """샘플 끌개 점에서 #{S ∈ 𝒜_b : x ∈ closure(S(Ω))} 의 최대값 (γ 의 하한)"""
    directed = as_directed(system)
    family = stopping_family(directed, b, budget)
    if points is None:
        from manifold_render import generate_points, subsample

        diameter = max(_float_diameter(omega) for omega in directed.omegas)
        cloud = generate_points(directed, max_diameter=diameter * as_scalar(b).to_float() / 2)
        points, components = subsample(cloud, samples)
    counts = closure_counts(points, components, family, directed.omegas)
    result = int(counts.max()) if len(counts) else 0
    logger.info(f"📊 WSC probe at b={b}: |A_b|={len(family)}, max multiplicity {result}")
    return result


def _float_diameter(region: ConvexPolygon) -> float:
    lo, hi = _float_bounds(region)
    return float(np.linalg.norm(hi - lo))
