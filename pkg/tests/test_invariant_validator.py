from fractions import Fraction

import pytest

from config import FtcSettings, ExplorationLimitsSettings
from ftc_core import IteratedFunctionSystem
from geometry import ConvexPolygon, Similitude
from invariant_validator import InvariantValidator, main
from model_io import ModelFile
from scalar import QuadField


@pytest.mark.parametrize("fixture_name", ["sierpinski", "torus"])
def test_builtin_models_pass(fixture_name, request):
    model = request.getfixturevalue(fixture_name)
    validator = InvariantValidator(model, verbose=False)
    assert validator.run_full_validation(), validator.errors
    report = validator.to_dict()
    assert report["passed"] is True
    assert [step["passed"] for step in report["steps"]] == [True] * 11


def test_broken_model_fails_with_hints(capsys):
    system = IteratedFunctionSystem(
        (Similitude.homothety(Fraction(1, 2), (Fraction(3, 4),)),),
        ConvexPolygon.interval(0, 1),
    )
    model = ModelFile(QuadField(), 1, "ifs", system, name="broken")
    validator = InvariantValidator(model)
    assert not validator.run_full_validation()
    assert validator.errors[0].startswith("불변성 위반")
    validator.suggest_fixes()
    out = capsys.readouterr().out
    assert "💡 수정 제안" in out
    assert validator.to_dict()["passed"] is False


def test_tight_limits_fail_exploration(torus):
    config = FtcSettings().model_copy(update={"exploration": ExplorationLimitsSettings(max_types=3)})
    validator = InvariantValidator(torus, config, verbose=False)
    assert not validator.run_full_validation()
    assert any(error.startswith("타입 탐색 실패") for error in validator.errors)


def test_main_exits_on_unknown_model(tmp_path):
    with pytest.raises(SystemExit) as info:
        main([str(tmp_path / "missing.json")])
    assert info.value.code == 1
    with pytest.raises(SystemExit):
        main([])
