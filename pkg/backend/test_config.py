"""
Tests for the config file parser, presets and overrides
"""
import pytest

from core.config_loader import (
    apply_overrides, list_presets, load_config, load_preset, parse_config_text,
    parse_scalar, parse_value, resolve_config
)
from core.errors import ConfigError
from models.config import PredictedSplit


@pytest.mark.parametrize("text, expected", [
    ("3Gbps", 3e9),
    ("50Mbps", 50e6),
    ("2km", 2000.0),
    ("20dB", 20.0),
    ("100MHz", 100e6),
    ("5", 5),
    ("1.5", 1.5),
    ("1e-3", 1e-3),
    ("true", True),
    ("off", False),
    ("none", None),
    ("10:20", (10.0, 20.0)),
    ("random", "random"),
    ('"a, b"', "a, b"),
])
def test_parse_scalar(text, expected):
    assert parse_scalar(text) == expected


def test_parse_scalar_keeps_int_type():
    assert isinstance(parse_scalar("7"), int)
    assert isinstance(parse_scalar("7Mbps"), float)


def test_parse_scalar_unknown_unit():
    with pytest.raises(ValueError):
        parse_scalar("5furlongs")


def test_parse_value_lists():
    assert parse_value("1, 2, 3") == [1, 2, 3]
    assert parse_value("10:10, 90:10") == [(10.0, 10.0), (90.0, 10.0)]


def test_parse_config_text_defaults_and_comments():
    config = parse_config_text("""
        # comment line
        backhaul.wired.c_max = 2Gbps   # trailing comment
        demand.predicted_split = even
    """)
    assert config.backhaul.wired.c_max == 2e9
    assert config.demand.predicted_split is PredictedSplit.EVEN
    # untouched sections keep their defaults
    assert config.topology.sbs_count == 5
    assert config.learning.kappa == 0.001
    # game tables default to bits/s
    assert config.game.utility_unit == 1.0


@pytest.mark.parametrize("text, field", [
    ("topology.bogus = 1", "topology.bogus"),
    ("topology.sbs_count = 2\ntopology.sbs_count = 3", "topology.sbs_count"),
    ("just some words", "line 1"),
    ("1bad.key = 2", "1bad.key"),
    ("blocks.mmw_bandwidth = 5parsecs", "blocks.mmw_bandwidth"),
    ("topology.sbs_count = 0", "topology.sbs_count"),
])
def test_parse_config_text_errors(text, field):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert info.value.field == field


def test_section_used_as_value():
    with pytest.raises(ConfigError):
        parse_config_text("backhaul = 5\nbackhaul.wired.c_max = 1Gbps")


def test_list_presets():
    assert list_presets() == ["case1", "case2", "case3", "default", "toy"]


def test_toy_preset_values(toy_config):
    assert toy_config.scenario.name == "toy"
    assert toy_config.topology.mbs_positions == [(50.0, 50.0)]
    assert len(toy_config.topology.sbs_positions) == 3
    assert toy_config.backhaul.wired.c_max == 6e6
    assert toy_config.demand.size_min == toy_config.demand.size_max == 1e6
    assert toy_config.cga_overhead == pytest.approx(0.005 * 6e6)
    assert toy_config.game.utility_unit == 1e6


@pytest.mark.parametrize("name, capacity", [("case1", 1e9), ("case2", 50e6), ("case3", 3e9)])
def test_case_presets(name, capacity):
    config = load_preset(name)
    assert config.backhaul.wired.c_max == capacity
    assert config.demand.predicted_total == 150
    assert config.game.utility_unit == 1.0
    assert config.learning.window == (5 if name == "case2" else 50)


def test_unknown_preset():
    with pytest.raises(ConfigError) as info:
        load_preset("nope")
    assert "toy" in str(info.value)


def test_load_config_from_file(tmp_path):
    path = tmp_path / "small.conf"
    path.write_text("topology.sbs_count = 2\nexperiment.runs = 4\n")
    config = load_config(path)
    assert config.topology.sbs_count == 2
    assert resolve_config(str(path)).experiment.runs == 4
    assert resolve_config("toy").scenario.name == "toy"

    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.conf")


def test_apply_overrides(toy_config):
    config = apply_overrides(toy_config, {"backhaul.wired.c_max": "3Gbps",
                                          "learning.kappa": 0.5})
    assert config.backhaul.wired.c_max == 3e9
    assert config.learning.kappa == 0.5
    # the original is left alone
    assert toy_config.backhaul.wired.c_max == 6e6


@pytest.mark.parametrize("overrides", [
    {"nope.x": 1},
    {"topology.sbs_count.deeper": 1},
    {"learning.kappa": "-1"},
    {"backhaul.wired.c_max": "3lightyears"},
    # one MBS in the toy, two capacities
    {"backhaul.wired.per_mbs": "1Mbps, 2Mbps"},
])
def test_apply_overrides_errors(toy_config, overrides):
    with pytest.raises(ConfigError):
        apply_overrides(toy_config, overrides)


def test_positions_must_match_counts(toy_config):
    with pytest.raises(ConfigError):
        apply_overrides(toy_config, {"topology.sbs_count": 4})
    with pytest.raises(ConfigError):
        apply_overrides(toy_config, {"topology.mbs_positions": "500:500"})
