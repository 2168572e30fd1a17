import json
import logging

import pytest

from latent_geometry_search.utils.config import (
    WORKERS_ENV, BenchSettings, GhSettings, RunConfig, SearchSettings, SpaceSettings,
    load_logging_config, load_run_config, override, worker_count,
)
from latent_geometry_search.utils.errors import ValidationError
from latent_geometry_search.utils.logging_setup import clear_log_context, context_filter, set_log_context, setup_logging


def write_config(tmp_path, data):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_defaults_are_valid():
    config = RunConfig()
    config.validate()
    assert config.search.budget == 60
    assert config.search.seeds == list(range(10))
    assert config.search.methods == ["gh-bo", "naive-bo", "unweighted-bo", "random"]
    assert config.gh.res_r == 200 and config.gh.sphere_res_r == 100
    assert config.bench.factors == 13


def test_load_sections(config_file):
    config = load_run_config(str(config_file))
    assert config.search.budget == 12
    assert config.search.seeds == [0, 1]
    assert config.bench.factors == 3
    assert config.gh == GhSettings()
    assert load_logging_config(str(config_file))["level"] == "WARNING"


def test_missing_file_uses_defaults(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        config = load_run_config(str(tmp_path / "absent.json"))
    assert config == RunConfig()
    assert "Using defaults" in caplog.text
    assert load_logging_config(str(tmp_path / "absent.json"))["level"] == "INFO"


def test_unknown_key_is_rejected(tmp_path):
    with pytest.raises(ValidationError, match="budgett"):
        load_run_config(write_config(tmp_path, {"search": {"budgett": 5}}))


@pytest.mark.parametrize("data", [
    {"schema_version": 2},
    {"search": [1, 2]},
])
def test_malformed_config(tmp_path, data):
    with pytest.raises(ValidationError):
        load_run_config(write_config(tmp_path, data))


def test_override_skips_none():
    settings = override(SearchSettings(), budget=20, seeds=None)
    assert settings.budget == 20
    assert settings.seeds == list(range(10))


@pytest.mark.parametrize("settings", [
    GhSettings(quadrature_res=10),
    GhSettings(grid_step=1e-3),
    GhSettings(res_t=1),
    GhSettings(offset_steps=0),
    SpaceSettings(max_factors=0),
    SpaceSettings(variant="dense"),
    SpaceSettings(weights="approximate"),
    BenchSettings(factors=0),
    SearchSettings(methods=["gh-bo", "grid"]),
    SearchSettings(methods=[]),
    SearchSettings(seeds=[]),
    SearchSettings(budget=2, n_init=3),
    SearchSettings(beta_min=1.0, beta_max=0.5),
    SearchSettings(noise_variance=-1.0),
])
def test_validate_rejects(settings):
    with pytest.raises(ValidationError):
        settings.validate()


@pytest.mark.parametrize("raw, expected", [("3", 3), ("0", None), ("many", None), ("", None)])
def test_worker_count(monkeypatch, raw, expected):
    monkeypatch.setenv(WORKERS_ENV, raw)
    count = worker_count()
    if expected is None:
        assert count >= 1
    else:
        assert count == expected


def test_setup_logging_writes_file(tmp_path):
    log_dir = tmp_path / "logs"
    setup_logging({"level": "DEBUG", "dir": str(log_dir), "file": True})
    set_log_context("search", "run")
    assert (context_filter.command, context_filter.run) == ("search", "run")
    logging.getLogger("latent_geometry_search").debug("written")
    clear_log_context()
    assert context_filter.command == "general"
    files = list(log_dir.iterdir())
    assert len(files) == 1
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "[search - run] - written" in files[0].read_text()
    setup_logging({"level": "WARNING", "file": False})
