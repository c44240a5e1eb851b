# index_sets.py - ftc-dim 중첩 인덱스 집합 규칙
# 고정 길이 / 비율 정지 규칙으로 단계별 전개를 구동 (M_k 는 M_{k+1} 과 겹칠 수 있음)

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger

from errors import ModelError, NestedIndexViolation
from scalar import ONE, QuadScalar, ScalarLike, as_scalar

Word = Tuple[int, ...]

# =============================================================================
# 1. 규칙과 기호표
# =============================================================================

class RuleKind(str, Enum):
    """인덱스 집합 규칙 종류"""
    FIXED_LENGTH = "fixed_length"
    RATIO_STOPPING = "ratio_stopping"


@dataclass(frozen=True)
class IndexSetRule:
    """M_k 를 정하는 정지 규칙"""

    kind: RuleKind
    base: Optional[QuadScalar] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", RuleKind(self.kind))
        if self.kind == RuleKind.FIXED_LENGTH:
            if self.base is not None:
                raise ModelError("fixed_length index rule takes no base")
            return
        if self.base is None:
            raise ModelError("ratio_stopping index rule needs a base")
        base = as_scalar(self.base)
        if not (base.sign() > 0 and base < ONE):
            raise ModelError(f"ratio_stopping base must lie in (0,1), got {base}")
        object.__setattr__(self, "base", base)

    @classmethod
    def fixed_length(cls) -> IndexSetRule:
        return cls(RuleKind.FIXED_LENGTH)

    @classmethod
    def ratio_stopping(cls, base: ScalarLike) -> IndexSetRule:
        return cls(RuleKind.RATIO_STOPPING, as_scalar(base))

    @property
    def uses_scale(self) -> bool:
        return self.kind == RuleKind.RATIO_STOPPING

    def describe(self) -> str:
        if self.kind == RuleKind.FIXED_LENGTH:
            return "fixed_length"
        return f"ratio_stopping(base={self.base})"

    def to_dict(self) -> Dict[str, str]:
        if self.kind == RuleKind.FIXED_LENGTH:
            return {"kind": self.kind.value}
        return {"kind": self.kind.value, "base": str(self.base)}


@dataclass(frozen=True)
class SymbolTable:
    """기호(생성 사상 또는 그래프 간선)별 비율과 그래프 연결 정보

    기호는 내부적으로 0 부터 센다. sources/targets 가 None 이면 일반 IFS.
    """

    ratios: Tuple[QuadScalar, ...]
    sources: Optional[Tuple[int, ...]] = None
    targets: Optional[Tuple[int, ...]] = None
    _outgoing: Dict[int, Tuple[int, ...]] = field(default_factory=dict, init=False, compare=False, repr=False)

    def __post_init__(self):
        ratios = tuple(as_scalar(r) for r in self.ratios)
        object.__setattr__(self, "ratios", ratios)
        if not ratios:
            raise ModelError("the system has no generators")
        for index, ratio in enumerate(ratios):
            if not (ratio.sign() > 0 and ratio < ONE):
                raise ModelError(f"non-contractive ratio {ratio} for symbol e{index + 1}")
        if (self.sources is None) != (self.targets is None):
            raise ModelError("graph symbol tables need both sources and targets")
        if self.sources is not None:
            if len(self.sources) != len(ratios) or len(self.targets) != len(ratios):
                raise ModelError("sources/targets must list one vertex per edge")
            outgoing: Dict[int, List[int]] = {}
            for symbol, source in enumerate(self.sources):
                outgoing.setdefault(source, []).append(symbol)
            self._outgoing.update({v: tuple(s) for v, s in outgoing.items()})
        else:
            self._outgoing[0] = tuple(range(len(ratios)))

    @classmethod
    def for_ifs(cls, ratios: Sequence[ScalarLike]) -> SymbolTable:
        return cls(tuple(as_scalar(r) for r in ratios))

    @classmethod
    def for_graph(
        cls, ratios: Sequence[ScalarLike], sources: Sequence[int], targets: Sequence[int]
    ) -> SymbolTable:
        return cls(tuple(as_scalar(r) for r in ratios), tuple(sources), tuple(targets))

    @property
    def size(self) -> int:
        return len(self.ratios)

    @property
    def is_graph(self) -> bool:
        return self.sources is not None

    def outgoing(self, vertex: int) -> Tuple[int, ...]:
        return self._outgoing.get(vertex, ())

    def terminal(self, word: Word, start: int = 0) -> int:
        if not word or self.targets is None:
            return start
        return self.targets[word[-1]]

    def word_ratio(self, word: Word) -> QuadScalar:
        result = ONE
        for symbol in word:
            result = result * self.ratios[symbol]
        return result

# =============================================================================
# 2. 확장어 계산
# =============================================================================

def normalized_scale(rule: IndexSetRule, ratio: QuadScalar, level: int) -> Optional[QuadScalar]:
    """s = ρ_u / base^k (고정 길이 규칙은 None)"""
    if not rule.uses_scale:
        return None
    return ratio / rule.base ** level


def child_scale(rule: IndexSetRule, scale: Optional[QuadScalar], extension_ratio: QuadScalar) -> Optional[QuadScalar]:
    if not rule.uses_scale:
        return None
    return scale * extension_ratio / rule.base


def extension_words(
    rule: IndexSetRule,
    table: SymbolTable,
    scale: Optional[QuadScalar],
    terminal: int = 0,
) -> List[Tuple[Word, QuadScalar]]:
    """정규화 스케일 s 인 단어 u ∈ M_k 에서 M_{k+1} 로 가는 확장어 w 와 ρ_w

    비율 정지 규칙: u·w ∈ M_{k+1} ⇔ s·ρ_w ≤ base < s·ρ_{w⁻}.
    s ≤ base 이면 u 자신이 M_{k+1} 에 속하므로 확장어는 빈 단어 하나.
    결과는 사전식 순서.
    """
    if not rule.uses_scale:
        return [((symbol,), table.ratios[symbol]) for symbol in table.outgoing(terminal)]

    if scale <= rule.base:
        return [((), ONE)]

    found: List[Tuple[Word, QuadScalar]] = []

    def descend(prefix: Word, ratio: QuadScalar, vertex: int) -> None:
        for symbol in table.outgoing(vertex):
            extended = ratio * table.ratios[symbol]
            word = prefix + (symbol,)
            if scale * extended <= rule.base:
                found.append((word, extended))
            else:
                descend(word, extended, table.terminal(word, vertex))

    descend((), ONE, terminal)
    return found


def in_level(word: Word, rule: IndexSetRule, table: SymbolTable, level: int) -> bool:
    """u ∈ M_k 판정: 고정 길이는 |u| = k, 비율 정지는 ρ_u ≤ b^k < ρ_{u⁻}"""
    if not rule.uses_scale:
        return len(word) == level
    threshold = rule.base ** level
    if not table.word_ratio(word) <= threshold:
        return False
    if not word:
        return True
    return threshold < table.word_ratio(word[:-1])


def children_in_next(
    u: Word,
    rule: IndexSetRule,
    table: SymbolTable,
    level: Optional[int] = None,
    start: int = 0,
) -> List[Word]:
    """{v ∈ M_{k+1} : u ⪯ v}

    u 가 여러 단계에 동시에 속할 수 있으므로 비율 정지 규칙에서는 level 로
    단계를 지정한다. 생략하면 u 가 속하는 유일한 단계를 사용한다.
    """
    u = tuple(u)
    if level is None:
        if not rule.uses_scale:
            level = len(u)
        else:
            levels = _levels_containing(u, rule, table)
            if len(levels) != 1:
                raise ValueError(f"word {format_word(u)} lies in levels {levels}; pass level explicitly")
            level = levels[0]
    if not in_level(u, rule, table, level):
        raise ValueError(f"word {format_word(u)} is not in M_{level} under {rule.describe()}")

    scale = normalized_scale(rule, table.word_ratio(u), level)
    terminal = table.terminal(u, start)
    return [u + w for w, _ in extension_words(rule, table, scale, terminal)]


def _levels_containing(u: Word, rule: IndexSetRule, table: SymbolTable) -> List[int]:
    levels = []
    ratio = table.word_ratio(u)
    level = 0
    while rule.base ** level >= ratio:
        if in_level(u, rule, table, level):
            levels.append(level)
        level += 1
    return levels


def enumerate_level(rule: IndexSetRule, table: SymbolTable, level: int, start: int = 0) -> List[Word]:
    """M_k (그래프이면 start 에서 시작하는 경로) 를 사전식 순서로"""
    frontier: List[Tuple[Word, Optional[QuadScalar]]] = [((), normalized_scale(rule, ONE, 0))]
    for _ in range(level):
        next_frontier = []
        for word, scale in frontier:
            terminal = table.terminal(word, start)
            for w, ratio in extension_words(rule, table, scale, terminal):
                next_frontier.append((word + w, child_scale(rule, scale, ratio)))
        frontier = next_frontier
    return sorted(word for word, _ in frontier)


def format_word(word: Word) -> str:
    """0 기반 내부 기호를 1 기반 표기로: (0, 2) -> "(1,3)" """
    return "(" + ",".join(str(s + 1) for s in word) + ")"

# =============================================================================
# 3. 중첩 성질 검증
# =============================================================================

@dataclass(frozen=True)
class NestedViolation:
    """조건 위반 하나 (조건 이름, 단계, 증거 단어)"""

    condition: str
    level: int
    witnesses: Tuple[Word, ...]
    message: str

    def __str__(self) -> str:
        words = ", ".join(format_word(w) for w in self.witnesses)
        return f"condition ({self.condition}) at level {self.level}: {self.message} [{words}]"


@dataclass
class NestedIndexReport:
    """validate_nested_properties 결과"""

    rule: str
    depth: int
    gap_bound: int = 0
    level_sizes: List[int] = field(default_factory=list)
    min_lengths: List[int] = field(default_factory=list)
    max_lengths: List[int] = field(default_factory=list)
    violations: List[NestedViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_for_violations(self) -> None:
        if self.violations:
            raise NestedIndexViolation(
                f"nested index properties fail under {self.rule}", self
            )

    def to_dict(self) -> Dict[str, object]:
        return {
            "rule": self.rule,
            "depth": self.depth,
            "gap_bound": self.gap_bound,
            "level_sizes": list(self.level_sizes),
            "min_lengths": list(self.min_lengths),
            "max_lengths": list(self.max_lengths),
            "violations": [str(v) for v in self.violations],
            "ok": self.ok,
        }


def _first_prefix_pair(words: List[Word]) -> Optional[Tuple[Word, Word]]:
    # 사전식 정렬에서 접두어는 확장어 바로 앞쪽에 모인다
    for left, right in zip(words, words[1:]):
        if right[: len(left)] == left:
            return left, right
    return None


def _uncovered_word(members: set, table: SymbolTable, longest: int, start: int) -> Optional[Word]:
    """(c): 길이 > max 인 단어 중 M_k 의 접두어가 없는 것"""

    def visit(word: Word) -> Optional[Word]:
        if word in members:
            return None
        if len(word) > longest:
            return word
        for symbol in table.outgoing(table.terminal(word, start)):
            missing = visit(word + (symbol,))
            if missing is not None:
                return missing
        return None

    return visit(())


def _unextended_word(members: set, table: SymbolTable, shortest: int, start: int) -> Optional[Word]:
    """(d): 길이 < min 인 단어 중 M_k 로 확장되지 않는 것"""
    prefixes = {w[:i] for w in members for i in range(len(w) + 1)}

    def visit(word: Word) -> Optional[Word]:
        if len(word) >= shortest:
            return None
        if word not in prefixes:
            return word
        for symbol in table.outgoing(table.terminal(word, start)):
            missing = visit(word + (symbol,))
            if missing is not None:
                return missing
        return None

    return visit(())


def validate_nested_properties(
    rule: IndexSetRule,
    table: SymbolTable,
    depth: int,
    starts: Optional[Sequence[int]] = None,
) -> NestedIndexReport:
    """단계 k ≤ depth 에 대해 조건 (a)-(e) 를 전수 검사하고 관측된 L 을 보고"""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    starts = list(starts) if starts is not None else [0]
    report = NestedIndexReport(rule=rule.describe(), depth=depth)

    levels_by_start = {
        start: [enumerate_level(rule, table, k, start) for k in range(depth + 1)] for start in starts
    }

    for k in range(depth + 1):
        words_k = [w for start in starts for w in levels_by_start[start][k]]
        report.level_sizes.append(len(words_k))
        report.min_lengths.append(min((len(w) for w in words_k), default=0))
        report.max_lengths.append(max((len(w) for w in words_k), default=0))

        for start in starts:
            members = levels_by_start[start][k]
            member_set = set(members)

            pair = _first_prefix_pair(members)
            if pair is not None:
                report.violations.append(
                    NestedViolation("b", k, pair, "M_k is not an antichain")
                )

            longest = max((len(w) for w in members), default=0)
            shortest = min((len(w) for w in members), default=0)
            uncovered = _uncovered_word(member_set, table, longest, start)
            if uncovered is not None:
                report.violations.append(
                    NestedViolation("c", k, (uncovered,), "long word without a prefix in M_k")
                )
            unextended = _unextended_word(member_set, table, shortest, start)
            if unextended is not None:
                report.violations.append(
                    NestedViolation("d", k, (unextended,), "short word without an extension in M_k")
                )

            if k < depth:
                for v in levels_by_start[start][k + 1]:
                    parents = [v[:i] for i in range(len(v) + 1) if v[:i] in member_set]
                    if not parents:
                        report.violations.append(
                            NestedViolation("e", k + 1, (v,), "word of M_{k+1} has no prefix in M_k")
                        )
                        continue
                    report.gap_bound = max(report.gap_bound, max(len(v) - len(u) for u in parents))

    for k in range(depth):
        if report.min_lengths[k + 1] < report.min_lengths[k] or report.max_lengths[k + 1] < report.max_lengths[k]:
            report.violations.append(
                NestedViolation("a", k + 1, (), "minimal or maximal word length decreased")
            )

    if report.ok:
        logger.debug(f"✅ Nested index properties hold to depth {depth} under {report.rule} (L={report.gap_bound})")
    else:
        logger.warning(f"⚠️ Nested index check found {len(report.violations)} violation(s) under {report.rule}")
    return report
