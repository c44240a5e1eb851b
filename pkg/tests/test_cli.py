import json
import re
import subprocess
import sys
from pathlib import Path

import pandas as pd
import pytest

from cli import build_parser, run
from conftest import GOLDEN_DIR, LOG3_LOG2, TORUS_ALPHA

ROOT = Path(__file__).resolve().parent.parent


def test_dimension_text_output(capsys):
    assert run(["dimension", "--preset", "sierpinski"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "model: sierpinski"
    assert lines[1] == "types: 1"
    assert float(lines[2].split(": ")[1]) == pytest.approx(LOG3_LOG2, abs=1e-10)


def test_types_json_matches_golden_file(capsys):
    assert run(["types", "--preset", "sierpinski", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    expected = json.loads((GOLDEN_DIR / "sierpinski_types.json").read_text(encoding="utf-8"))
    assert payload == expected


def test_types_out_file_is_stable(tmp_path, capsys):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["types", "--preset", "torus_gifs", "--out", str(first)]) == 0
    assert run(["types", "--preset", "torus_gifs", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert json.loads(first.read_text(encoding="utf-8"))["type_count"] == 8
    assert "T1 -> T2 + T3 + T4 + T5" in capsys.readouterr().out


def test_analyze_json_and_matrix_csv(tmp_path, capsys):
    matrix_path = tmp_path / "matrix.csv"
    assert run(["analyze", "--preset", "torus_gifs", "--json", "--matrix-out", str(matrix_path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["kind"] == "gifs"
    assert payload["automaton"]["type_count"] == 8
    assert payload["dimension"]["alpha"] == pytest.approx(TORUS_ALPHA, abs=1e-10)
    assert payload["matrix"]["symbolic"][0][1] == "(1/2)^a"
    frame = pd.read_csv(matrix_path)
    assert list(frame.columns) == ["row", "col", "symbolic", "value"]


def test_analyze_text_lists_productions(capsys):
    assert run(["analyze", "--preset", "twin_cantor"]) == 0
    out = capsys.readouterr().out
    assert "  T1 -> 2*T1" in out
    assert "kind: gifs (t=2)" in out


def test_measure_json(capsys):
    assert run(["measure", "--preset", "sierpinski", "--depth", "2", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["rows"]) == 13
    assert payload["defects"]["additivity"] < 1e-9


def test_render_csv(tmp_path, capsys):
    out = tmp_path / "cantor.csv"
    assert run(["render", "--preset", "cantor_interval", "--max-diameter", "0.125", "--out", str(out)]) == 0
    frame = pd.read_csv(out)
    assert frame["x"].tolist() == pytest.approx([(2 * k + 1) / 16 for k in range(8)])
    assert "points: 8" in capsys.readouterr().out


def test_render_needs_a_known_format(tmp_path, capsys):
    assert run(["render", "--preset", "sierpinski", "--out", str(tmp_path / "cloud.xyz")]) == 1
    assert "error:" in capsys.readouterr().err


def test_wsc_probe_output(capsys):
    assert run(["wsc", "--preset", "sierpinski", "--b", "1/8", "--samples", "32"]) == 0
    out = capsys.readouterr().out.strip()
    assert re.fullmatch(r"b=1/8: multiplicity [123]", out)


def test_verify_json(capsys):
    assert run(["verify", "--preset", "sierpinski", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["passed"] is True
    assert len(payload["steps"]) == 11


@pytest.mark.parametrize("argv, code", [
    (["dimension", "--preset", "torus_gifs", "--max-types", "2"], 2),
    (["dimension"], 1),
    (["dimension", "--preset", "sierpinski", "--param", "rho=1/4"], 1),
    (["dimension", "--preset", "lau_ngai", "--param", "rho"], 1),
    (["dimension", "--preset", "sierpinski", "--max-types", "0"], 1),
    (["no-such-command"], 1),
    (["--help"], 0),
])
def test_exit_codes(argv, code, capsys):
    assert run(argv) == code


def test_resource_limit_message(capsys):
    run(["types", "--preset", "torus_gifs", "--max-level", "1"])
    assert "error: finite type not detected within max_level=1" in capsys.readouterr().err


def test_model_file_and_preset_are_exclusive(tmp_path, capsys):
    path = tmp_path / "model.json"
    path.write_text("{}", encoding="utf-8")
    assert run(["dimension", str(path), "--preset", "sierpinski"]) == 1
    assert run(["dimension", str(path)]) == 1


def test_parser_lists_every_command():
    parser = build_parser()
    args = parser.parse_args(["wsc", "--preset", "sierpinski", "--b", "1/8", "--b", "1/16"])
    assert args.b == ["1/8", "1/16"]
    assert args.command == "wsc"


def test_module_entry_point_keeps_stderr_quiet():
    completed = subprocess.run(
        [sys.executable, "-m", "cli", "dimension", "--preset", "sierpinski"],
        cwd=ROOT, capture_output=True, text=True, timeout=300,
    )
    assert completed.returncode == 0
    assert completed.stderr == ""
    assert completed.stdout.splitlines()[1] == "types: 1"
