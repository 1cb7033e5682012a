"""Test scenario configuration."""

import copy
from pathlib import Path

import pytest

from quartic.config import (
    DEFAULT_OUTPUT,
    DecayCheck,
    ScenarioConfig,
    TimeGrid,
    load_config,
    output_directory,
    shipped_scenario,
    thread_count,
    validate,
)
from quartic.exceptions import ConfigError
from quartic.oscillatory import DecayFit


def _fit(exponent):
    return DecayFit(exponent, 0.0, 0.01, (1.0, 100.0), 10)


@pytest.mark.asyncio
async def test_load_config(scenario_file, tmp_path):
    """Test loading the small scenario."""
    config = await load_config(scenario_file)
    assert config.name == "tiny"
    assert config.potential.family == "gaussian_bump"
    assert config.potential.resolved()["amplitude"] == 0.5
    assert config.grid.points_per_axis == 3
    assert config.cutoff.lambda0 == 0.25
    assert config.sigma_list == (0.0, 1.0)
    assert len(config.t_grid.values()) == 8
    assert config.radii == (0.5, 1.0, 1.5)
    assert config.scan.values().tolist() == [0.5, 1.0, 1.5, 2.0]
    assert not config.tunes
    assert config.source == tmp_path


@pytest.mark.asyncio
@pytest.mark.parametrize("name", ["free", "regular", "resonant"])
async def test_shipped_scenarios(name):
    """Test that every shipped scenario validates."""
    config = await load_config(shipped_scenario(name))
    assert config.name == name
    assert config.checks
    assert config.tunes == (name == "resonant")


@pytest.mark.asyncio
async def test_missing_file(tmp_path):
    """Test that a missing file raises ConfigError."""
    with pytest.raises(ConfigError):
        await load_config(tmp_path / "absent.json")


@pytest.mark.asyncio
async def test_malformed_json(tmp_path):
    """Test that malformed JSON raises ConfigError."""
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    with pytest.raises(ConfigError):
        await load_config(path)


def _mutate(document, path, value):
    document = copy.deepcopy(document)
    target = document
    for key in path[:-1]:
        target = target[key]
    if value is KeyError:
        del target[path[-1]]
    else:
        target[path[-1]] = value
    return document


@pytest.mark.parametrize(
    "path,value",
    [
        (("unknown",), 1),
        (("name",), "has space"),
        (("grid", "points_per_axis"), 1),
        (("t_grid", "points"), 4),
        (("t_grid", "t_max"), 2e4),
        (("sigma_list",), [-1]),
        (("potential",), {"family": "square_well"}),
        (("coupling",), "strong"),
        (("cutoff",), KeyError),
    ],
)
def test_schema_violations(scenario_document, path, value):
    """Test that schema violations raise ConfigError."""
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(_mutate(scenario_document, path, value))


@pytest.mark.parametrize(
    "path,value",
    [
        (("schema_version",), 2),
        (("coupling",), "tune"),
        (("lambda_max",), 0.5),
        (("checks",), [{"sigma": 3}]),
        (("grid", "points_per_axis"), 17),
        (("t_grid", "t_min"), 20.0),
        (("potential", "parameters"), {"amplitude": "big"}),
        (("potential", "parameters"), {"width": 0}),
    ],
)
def test_semantic_violations(scenario_document, path, value):
    """Test that valid JSON with invalid physics raises ConfigError."""
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(_mutate(scenario_document, path, value))


def test_tuned_coupling(scenario_document):
    """Test a tuned coupling with its bracket."""
    document = _mutate(scenario_document, ("coupling",), "tune")
    document["tune_bracket"] = [0.5, 6.0]
    config = ScenarioConfig.from_dict(document)
    assert config.tunes
    assert config.tune_bracket == (0.5, 6.0)


def test_table_path_is_relative_to_config(scenario_document, tmp_path):
    """Test that relative table paths resolve against the config directory."""
    document = _mutate(scenario_document, ("potential",), {"table": "v.csv"})
    config = ScenarioConfig.from_dict(document, base_dir=tmp_path)
    assert config.potential.family == "custom"
    assert Path(config.potential.parameters["path"]) == tmp_path / "v.csv"


def test_validate_summary_rejects_incomplete():
    """Test that summaries are validated too."""
    with pytest.raises(ConfigError):
        validate({"schema_version": 1}, "summary")


def test_thread_count(monkeypatch):
    """Test the thread count from the environment."""
    monkeypatch.setenv("QUARTIC_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.delenv("QUARTIC_THREADS")
    assert thread_count() >= 1


@pytest.mark.parametrize("raw", ["0", "-2", "many"])
def test_thread_count_rejects(monkeypatch, raw):
    """Test that invalid thread counts raise ConfigError."""
    monkeypatch.setenv("QUARTIC_THREADS", raw)
    with pytest.raises(ConfigError):
        thread_count()


def test_output_directory(monkeypatch, tmp_path):
    """Test the precedence of the output directory sources."""
    monkeypatch.delenv("QUARTIC_OUTPUT", raising=False)
    assert output_directory() == Path(DEFAULT_OUTPUT)
    monkeypatch.setenv("QUARTIC_OUTPUT", str(tmp_path))
    assert output_directory() == tmp_path
    assert output_directory("elsewhere") == Path("elsewhere")


def test_time_grid():
    """Test the time grid bounds."""
    assert TimeGrid(1.0, 100.0, 3).values().tolist() == pytest.approx([1.0, 10.0, 100.0])
    with pytest.raises(ConfigError):
        TimeGrid(10.0, 1.0, 8)
    with pytest.raises(ConfigError):
        TimeGrid(1.0, 1e5, 8)


def test_decay_check():
    """Test the acceptance gate."""
    check = DecayCheck(0.0, min_exponent=0.7, max_exponent=0.8)
    assert check.passes(_fit(0.75))
    assert not check.passes(_fit(0.65))
    assert not check.passes(_fit(0.85))
    assert check.describe() == "[0.7, 0.8]"
    assert DecayCheck(2.0, True, 1.15).describe() == "[1.15, inf]"
