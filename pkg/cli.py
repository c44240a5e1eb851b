# cli.py - ftc-dim 명령행 인터페이스
# analyze / types / dimension / measure / render / wsc / verify 하위 명령, 종료 코드 0/1/2/3

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from loguru import logger

from config import FtcSettings, limits_from, settings, setup_logging
from dimension import DimensionResult, WeightedIncidenceMatrix, assemble_matrix, measure_defects, perron_measure, solve_dimension
from errors import FtcError, ModelError
from ftc_core import TypeAutomaton, explore_types
from manifold_render import ChartKind, ChartMap, ExportFormat, chart_push, export, generate_points
from model_io import PRESETS, ModelFile, load_model, preset

# =============================================================================
# 1. 인자 파서
# =============================================================================

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_argument_group("model")
    source.add_argument("model", nargs="?", help="JSON model file")
    source.add_argument("--preset", choices=sorted(PRESETS), help="built-in example model")
    source.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="preset parameter, e.g. --param rho=1/4 (exact scalar syntax)")

    limits = common.add_argument_group("limits")
    limits.add_argument("--max-types", type=_positive_int)
    limits.add_argument("--max-level", type=_positive_int)
    limits.add_argument("--vertex-budget", type=_positive_int)
    limits.add_argument("--tol", type=_positive_float)
    limits.add_argument("--verify-depth", type=_non_negative_int)
    limits.add_argument("--threads", type=_positive_int, help="overrides FTC_DIM_THREADS")

    output = common.add_argument_group("output")
    output.add_argument("--json", action="store_true", help="structured JSON output")
    output.add_argument("--log-level", default=None, help="stderr log level (default from settings)")
    output.add_argument("--seed", type=int, help="reserved; the pipeline is deterministic")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="ftc-dim",
        description="Finite type neighborhood automata and Hausdorff dimension of self-similar sets",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", parents=[common], help="types + matrix + dimension report")
    analyze.add_argument("--matrix-out", help="write the weighted incidence matrix as CSV")

    types = commands.add_parser("types", parents=[common], help="neighborhood type automaton")
    types.add_argument("--out", help="write the automaton JSON to a file")

    commands.add_parser("dimension", parents=[common], help="solve λ_α = 1")

    measure = commands.add_parser("measure", parents=[common], help="Perron measure table")
    measure.add_argument("--depth", type=_non_negative_int, default=3)
    measure.add_argument("--out", help="write the table as CSV")

    render = commands.add_parser("render", parents=[common], help="attractor point cloud through a chart")
    render.add_argument("--chart", choices=[k.value for k in ChartKind], help="default: the model's chart")
    render.add_argument("--max-diameter", type=_positive_float)
    render.add_argument("--out", required=True)
    render.add_argument("--format", choices=[f.value for f in ExportFormat], help="default: from the file suffix")

    wsc = commands.add_parser("wsc", parents=[common], help="weak separation multiplicity probe")
    wsc.add_argument("--b", action="append", required=True, help="stopping threshold in (0,1], repeatable")
    wsc.add_argument("--samples", type=_positive_int)

    commands.add_parser("verify", parents=[common], help="run the invariant suite on the model")
    return parser

# =============================================================================
# 2. 공통 준비
# =============================================================================

def _effective_settings(args: argparse.Namespace) -> FtcSettings:
    """CLI 플래그 > 환경 변수 > 기본값"""
    exploration = {
        "max_types": args.max_types,
        "max_level": args.max_level,
        "vertex_budget": args.vertex_budget,
        "verify_depth": args.verify_depth,
    }
    update: Dict[str, Any] = {
        "exploration": settings.exploration.model_copy(update={k: v for k, v in exploration.items() if v is not None}),
    }
    if args.tol is not None:
        update["solver"] = settings.solver.model_copy(update={"tol": args.tol, "power_rtol": min(settings.solver.power_rtol, args.tol)})
    if args.threads is not None:
        update["threads"] = args.threads
    return settings.model_copy(update=update)


def _load(args: argparse.Namespace) -> ModelFile:
    if args.preset and args.model:
        raise ModelError("give either a model file or --preset, not both")
    if args.preset:
        params = {}
        for item in args.param:
            key, sep, value = item.partition("=")
            if not sep or not key:
                raise ModelError(f"malformed --param {item!r} (expected KEY=VALUE)")
            params[key.strip()] = value.strip()
        try:
            return preset(args.preset, **params)
        except TypeError as e:
            raise ModelError(f"preset {args.preset} does not accept parameters {sorted(params)}") from e
    if args.model:
        return load_model(args.model)
    raise ModelError("a model file or --preset is required")


def _explore(model: ModelFile, config: FtcSettings) -> TypeAutomaton:
    return explore_types(model.directed(), model.rule, limits_from(config))


def _solve(model: ModelFile, matrix: WeightedIncidenceMatrix, config: FtcSettings) -> DimensionResult:
    solver = config.solver
    return solve_dimension(
        matrix,
        tol=solver.tol,
        alpha_cap=solver.alpha_cap,
        space_dim=model.space_dim,
        rtol=solver.power_rtol,
        max_iterations=solver.max_power_iterations,
    )


def _emit(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))


def _model_header(model: ModelFile) -> List[str]:
    kind = f"gifs (t={model.system.t})" if model.is_graph else "ifs"
    return [
        f"model: {model.name or '<unnamed>'}",
        f"kind: {kind}",
        f"field: {model.field}",
        f"index rule: {model.rule.describe()}",
    ]

# =============================================================================
# 3. 하위 명령
# =============================================================================

def cmd_analyze(args: argparse.Namespace, model: ModelFile, config: FtcSettings) -> int:
    automaton = _explore(model, config)
    matrix = assemble_matrix(automaton)
    result = _solve(model, matrix, config)
    if args.matrix_out:
        matrix.to_csv(args.matrix_out, result.alpha)

    if args.json:
        _emit({
            "model": model.name,
            "kind": model.kind,
            "field": str(model.field),
            "automaton": automaton.to_dict(),
            "matrix": {
                "labels": list(matrix.labels),
                "symbolic": [[matrix.symbolic(i, j) for j in range(matrix.q)] for i in range(matrix.q)],
                "counts": matrix.counts().tolist(),
            },
            "dimension": result.to_dict(),
        })
        return 0

    lines = _model_header(model) + [
        f"types: {automaton.q}",
        f"fixpoint level: {automaton.fixpoint_level}",
        "productions:",
    ]
    lines += [f"  {p}" for p in automaton.productions()]
    lines += [
        "matrix:",
        *(f"  {matrix.labels[i]}: " + ", ".join(
            f"{matrix.labels[j]}={matrix.symbolic(i, j)}" for j in range(matrix.q) if matrix.entries[i][j]
        ) for i in range(matrix.q)),
        f"alpha: {result.alpha:.16g}",
        f"lambda at alpha: {result.lambda_at_alpha:.16g}",
    ]
    print("\n".join(lines))
    return 0


def cmd_types(args: argparse.Namespace, model: ModelFile, config: FtcSettings) -> int:
    automaton = _explore(model, config)
    payload = {"model": model.name, "kind": model.kind, **automaton.to_dict()}
    if args.out:
        target = Path(args.out)
        try:
            target.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
        except OSError as e:
            raise ModelError(f"cannot write {target}: {e.strerror}") from e
        logger.info(f"💾 Automaton written to {target}")
    if args.json:
        _emit(payload)
        return 0
    lines = _model_header(model) + [f"types: {automaton.q}", f"fixpoint level: {automaton.fixpoint_level}"]
    for node in automaton.types:
        rep = node.representative
        lines.append(
            f"{node.label}: level {node.level}, {len(node.neighbors)} neighbor(s), "
            f"representative {automaton.format_word(rep.word)}"
        )
    lines.append("productions:")
    lines += [f"  {p}" for p in automaton.productions()]
    print("\n".join(lines))
    return 0


def cmd_dimension(args: argparse.Namespace, model: ModelFile, config: FtcSettings) -> int:
    automaton = _explore(model, config)
    result = _solve(model, assemble_matrix(automaton), config)
    if args.json:
        _emit({"model": model.name, "type_count": automaton.q, **result.to_dict()})
        return 0
    print("\n".join([
        f"model: {model.name or '<unnamed>'}",
        f"types: {automaton.q}",
        f"alpha: {result.alpha:.16g}",
    ]))
    return 0


def cmd_measure(args: argparse.Namespace, model: ModelFile, config: FtcSettings) -> int:
    automaton = _explore(model, config)
    result = _solve(model, assemble_matrix(automaton), config)
    table = perron_measure(model.directed(), automaton, result, args.depth, config.exploration.vertex_budget)
    defects = measure_defects(table)
    if args.out:
        try:
            table.to_csv(args.out, index=False, float_format="%.17g", lineterminator="\n")
        except OSError as e:
            raise ModelError(f"cannot write {args.out}: {e.strerror}") from e
        logger.info(f"💾 Measure table written to {args.out}")
    if args.json:
        _emit({
            "model": model.name,
            "alpha": result.alpha,
            "depth": args.depth,
            "defects": defects,
            "rows": table.to_dict(orient="records"),
        })
        return 0
    print(table.to_string(index=False, float_format=lambda x: f"{x:.12g}"))
    print(f"additivity defect: {defects['additivity']:.3g}")
    print(f"level sum defect: {defects['level_sum']:.3g}")
    return 0


def _export_format(args: argparse.Namespace) -> str:
    if args.format:
        return args.format
    suffix = Path(args.out).suffix.lstrip(".").lower()
    if suffix not in {f.value for f in ExportFormat}:
        raise ModelError(f"cannot infer the export format from {args.out!r}; use --format csv|ply|svg")
    return suffix


def cmd_render(args: argparse.Namespace, model: ModelFile, config: FtcSettings) -> int:
    fmt = _export_format(args)
    kind = ChartKind(args.chart) if args.chart else (model.chart or ChartKind.IDENTITY)
    max_diameter = args.max_diameter or config.render.default_max_diameter
    cloud = generate_points(model.directed(), max_diameter, config.render.leaf_budget, config.worker_threads)
    pushed = chart_push(cloud.points, ChartMap(kind))
    export(
        pushed,
        fmt,
        args.out,
        components=cloud.components if model.is_graph else None,
        dot_radius=config.render.svg_dot_radius,
        margin=config.render.svg_margin,
    )
    if args.json:
        _emit({"model": model.name, "chart": kind.value, "points": len(cloud), "format": fmt, "out": args.out})
        return 0
    print(f"points: {len(cloud)}")
    print(f"chart: {kind.value}")
    print(f"out: {args.out}")
    return 0


def cmd_wsc(args: argparse.Namespace, model: ModelFile, config: FtcSettings) -> int:
    from ftc_core import wsc_multiplicity_probe

    samples = args.samples or config.wsc.default_samples
    results = []
    for text in args.b:
        b = model.field.parse(text)
        multiplicity = wsc_multiplicity_probe(
            model.directed(), b, samples=samples, budget=config.wsc.enumeration_budget
        )
        results.append({"b": str(b), "multiplicity": multiplicity})
    if args.json:
        _emit({"model": model.name, "samples": samples, "probes": results})
        return 0
    for row in results:
        print(f"b={row['b']}: multiplicity {row['multiplicity']}")
    return 0


def cmd_verify(args: argparse.Namespace, model: ModelFile, config: FtcSettings) -> int:
    from invariant_validator import InvariantValidator

    validator = InvariantValidator(model, config, verbose=not args.json)
    passed = validator.run_full_validation()
    if not passed:
        validator.suggest_fixes()
    if args.json:
        _emit(validator.to_dict())
    return 0 if passed else 1


COMMANDS = {
    "analyze": cmd_analyze,
    "types": cmd_types,
    "dimension": cmd_dimension,
    "measure": cmd_measure,
    "render": cmd_render,
    "wsc": cmd_wsc,
    "verify": cmd_verify,
}

# =============================================================================
# 4. 진입점
# =============================================================================

def run(argv: Optional[Sequence[str]] = None) -> int:
    """명령 실행 후 종료 코드 반환: 0 성공, 1 모델 오류, 2 자원 한도, 3 수치 오류"""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1

    config = _effective_settings(args)
    setup_logging(config, args.log_level)
    if args.seed is not None:
        logger.debug(f"--seed {args.seed} ignored (deterministic pipeline)")

    try:
        model = _load(args)
        return COMMANDS[args.command](args, model, config)
    except FtcError as e:
        logger.error(f"❌ {type(e).__name__}: {e.message}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(run())
