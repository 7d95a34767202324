"""
Config Loader
Reads flat `dotted.key = value` config files into a validated ScenarioConfig
"""

import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union

from pydantic import ValidationError

from core.errors import ConfigError
from models.config import ScenarioConfig

logger = logging.getLogger(__name__)

PRESET_DIR = Path(__file__).resolve().parent.parent / "presets"

UNIT_SCALES = {
    "bps": 1.0, "kbps": 1e3, "Mbps": 1e6, "Gbps": 1e9,
    "bit": 1.0, "kbit": 1e3, "Mbit": 1e6, "Gbit": 1e9,
    "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9,
    "m": 1.0, "km": 1e3,
    "s": 1.0, "ms": 1e-3,
    "W": 1.0, "mW": 1e-3,
    "dB": 1.0, "dBm": 1.0,
}

_NUMBER = re.compile(r"^([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)$")
_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")


def parse_scalar(text: str) -> Any:
    """Number (with optional SI unit), boolean, none, x:y pair or bare string"""
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if lowered in ("none", "null"):
        return None
    if ":" in text:
        parts = text.split(":")
        if len(parts) == 2:
            x, y = parse_scalar(parts[0]), parse_scalar(parts[1])
            if isinstance(x, (int, float)) and isinstance(y, (int, float)):
                return (float(x), float(y))
        return text

    match = _NUMBER.match(text)
    if not match:
        return text
    number, unit = match.groups()
    if unit:
        if unit not in UNIT_SCALES:
            raise ValueError(f"unknown unit '{unit}'")
        return float(number) * UNIT_SCALES[unit]
    if re.fullmatch(r"[-+]?\d+", number):
        return int(number)
    return float(number)


def parse_value(text: str) -> Any:
    text = text.strip()
    quoted = len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'"
    if "," in text and not quoted:
        return [parse_scalar(part) for part in text.split(",") if part.strip()]
    return parse_scalar(text)


def _nest(flat: Mapping[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        node = nested
        parts = key.split(".")
        for i, part in enumerate(parts[:-1]):
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(".".join(parts[:i + 1]), "is a value, not a section")
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigError(key, "is a section, not a value")
        node[parts[-1]] = value
    return nested


def _validate(data: Dict[str, Any]) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(part) for part in error["loc"]) or "config"
        raise ConfigError(field, error["msg"]) from e


def parse_config_text(text: str) -> ScenarioConfig:
    flat: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError(key or f"line {lineno}", "malformed key")
        if key in flat:
            raise ConfigError(key, f"duplicate key (line {lineno})")
        try:
            flat[key] = parse_value(value)
        except ValueError as e:
            raise ConfigError(key, str(e)) from e
    return _validate(_nest(flat))


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(str(path), "config file not found")
    config = parse_config_text(path.read_text())
    logger.info("Loaded config %s (%s)", path, config.scenario.name)
    return config


def list_presets() -> List[str]:
    return sorted(p.stem for p in PRESET_DIR.glob("*.conf"))


def load_preset(name: str) -> ScenarioConfig:
    path = PRESET_DIR / f"{name}.conf"
    if not path.is_file():
        raise ConfigError("preset", f"unknown preset '{name}' (available: {', '.join(list_presets())})")
    return load_config(path)


def resolve_config(source: str) -> ScenarioConfig:
    """A config file path, or the name of a shipped preset"""
    if Path(source).is_file():
        return load_config(source)
    return load_preset(source)


def apply_overrides(config: ScenarioConfig, overrides: Mapping[str, Any]) -> ScenarioConfig:
    """
    Copy of `config` with dotted keys replaced. String values go through the
    config-file value parser, so `{"backhaul.wired.c_max": "3Gbps"}` works.
    """
    data = config.model_dump()
    for key, value in overrides.items():
        parts = key.split(".")
        node = data
        for part in parts[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ConfigError(key, "unknown key")
            node = node[part]
        if not isinstance(node, dict) or parts[-1] not in node:
            raise ConfigError(key, "unknown key")
        if isinstance(value, str):
            try:
                value = parse_value(value)
            except ValueError as e:
                raise ConfigError(key, str(e)) from e
        node[parts[-1]] = value
    return _validate(data)
