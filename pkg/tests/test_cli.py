from pathlib import Path

from click.testing import CliRunner

from cartassist.cli import main
from cartassist.config import default_store_path
from importlib import resources


def scenario_path(name):
    return str(resources.files("cartassist").joinpath(f"data/scenarios/{name}.scenario"))


def test_validate_valid_store_exits_zero():
    runner = CliRunner()
    result = runner.invoke(main, ["validate", str(default_store_path())])
    assert result.exit_code == 0
    assert "OK" in result.output


def test_validate_dangling_reference_exits_one(tmp_path):
    bad = tmp_path / "bad.store"
    bad.write_text("[map]\n.A.\n...\n\n[shelves]\nS1 A N Dairy\n\n[products]\nP1 S9 1 1 100 Milk | |\n")
    runner = CliRunner()
    result = runner.invoke(main, ["validate", str(bad)])
    assert result.exit_code == 1
    assert "S9" in result.output


def test_validate_unreadable_path_exits_two(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["validate", str(tmp_path / "missing.store")])
    assert result.exit_code == 2


def test_scenario_fixture_success():
    runner = CliRunner()
    result = runner.invoke(main, ["scenario", scenario_path("navigation")])
    assert result.exit_code == 0, result.output
    assert result.output.startswith("success: true")


def test_scenario_zero_budget_fails(tmp_path):
    script = tmp_path / "tight.scenario"
    script.write_text("step_budget: 0\nstart: 2,3,E\ntarget: section Snacks\n")
    runner = CliRunner()
    result = runner.invoke(main, ["scenario", str(script)])
    assert result.exit_code == 1
    assert "success: false" in result.output


def test_scenario_missing_script_is_usage_error():
    runner = CliRunner()
    result = runner.invoke(main, ["scenario", "nope.scenario"])
    assert result.exit_code == 2


def test_repl_smoke():
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["repl", "--store", str(default_store_path())],
        input="w\nx\nv where is the soap\nstate\nquit\n",
    )
    assert result.exit_code == 0
    assert "assistant:" in result.output
