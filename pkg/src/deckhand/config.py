"""Run configuration: per-stage models, pricing, endpoints.

The file format is JSON::

    {
      "stages": {"planner": {"model": "...", "max_tokens": 2048}, ...},
      "max_attempts": 3,
      "pricing": {"<model>": {"input": 0.15, "output": 0.60,
                              "output_thinking": 3.50, "thinking": false}},
      "endpoints": {"<model>": {"api": "openai", "url": "...",
                                "env_credential": "OPENAI_API_KEY"}},
      "render_command": null
    }

Anything omitted falls back to the defaults below. Prices are USD per
million tokens and are read as exact decimals.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Optional, Union

from .errors import ConfigError

STAGES = ("planner", "editor", "codegen", "judge")
APIS = ("openai", "anthropic", "gemini", "mock")
DEFAULT_CONFIG_PATH = "deckhand.json"


@dataclass
class StageConfig:
    model: str
    max_tokens: int
    temperature: Decimal = Decimal("0.05")
    top_p: Decimal = Decimal("1.0")


@dataclass
class PricingEntry:
    input: Decimal
    output: Decimal
    output_thinking: Optional[Decimal] = None
    # bill output at the thinking rate
    thinking: bool = False


@dataclass
class EndpointConfig:
    api: str
    url: Optional[str] = None
    env_credential: Optional[str] = None
    # model name sent on the wire, when it differs from the config key
    api_model: Optional[str] = None
    # mock only: path to a JSON list of scripted replies
    script: Optional[str] = None


def _d(text: str) -> Decimal:
    return Decimal(text)


DEFAULT_STAGES = {
    "planner": StageConfig("gemini-1.5-flash", 2048),
    "editor": StageConfig("gemini-2.5-flash", 65536),
    "codegen": StageConfig("gemini-2.5-flash", 65536),
    "judge": StageConfig("gpt-4o", 512, temperature=_d("0.2")),
}

# USD per million tokens. Gemini-1.5-flash uses its under-128K-context tier.
DEFAULT_PRICING = {
    "gemini-2.5-flash": PricingEntry(_d("0.15"), _d("0.60"), _d("3.50")),
    "gemini-1.5-flash": PricingEntry(_d("0.075"), _d("0.30")),
    "gpt-4.1-mini": PricingEntry(_d("0.40"), _d("1.60")),
    "gpt-4o": PricingEntry(_d("2.50"), _d("10.00")),
    "claude-3-haiku": PricingEntry(_d("0.25"), _d("1.25")),
    "deepseek-v3": PricingEntry(_d("0.27"), _d("1.10")),
}

DEFAULT_ENDPOINTS = {
    "gemini-2.5-flash": EndpointConfig(
        "gemini", "https://generativelanguage.googleapis.com/v1beta", "GEMINI_API_KEY"),
    "gemini-1.5-flash": EndpointConfig(
        "gemini", "https://generativelanguage.googleapis.com/v1beta", "GEMINI_API_KEY"),
    "gpt-4.1-mini": EndpointConfig("openai", "https://api.openai.com/v1", "OPENAI_API_KEY"),
    "gpt-4o": EndpointConfig("openai", "https://api.openai.com/v1", "OPENAI_API_KEY"),
    "claude-3-haiku": EndpointConfig(
        "anthropic", "https://api.anthropic.com/v1", "ANTHROPIC_API_KEY",
        api_model="claude-3-haiku-20240307"),
    "deepseek-v3": EndpointConfig(
        "openai", "https://api.deepseek.com/v1", "DEEPSEEK_API_KEY", api_model="deepseek-chat"),
}


@dataclass
class Config:
    stages: dict[str, StageConfig] = field(default_factory=lambda: dict(DEFAULT_STAGES))
    max_attempts: int = 3
    pricing: dict[str, PricingEntry] = field(default_factory=lambda: dict(DEFAULT_PRICING))
    endpoints: dict[str, EndpointConfig] = field(default_factory=lambda: dict(DEFAULT_ENDPOINTS))
    render_command: Optional[Union[str, list[str]]] = None
    # directory that relative paths in the file (mock scripts) resolve against
    base_dir: Path = field(default_factory=Path.cwd)

    def stage(self, name: str) -> StageConfig:
        try:
            return self.stages[name]
        except KeyError:
            raise ConfigError(f"no configuration for stage {name!r}") from None

    def endpoint(self, model: str) -> EndpointConfig:
        try:
            return self.endpoints[model]
        except KeyError:
            raise ConfigError(f"no endpoint configured for model {model!r}") from None

    def price(self, model: str) -> PricingEntry:
        try:
            return self.pricing[model]
        except KeyError:
            raise ConfigError(f"no pricing configured for model {model!r}") from None


def _decimal(value: Any, where: str) -> Decimal:
    if isinstance(value, bool) or not isinstance(value, (int, float, str, Decimal)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    try:
        # str() keeps 0.15 as 0.15 instead of its binary expansion
        out = Decimal(str(value))
    except InvalidOperation:
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if out < 0:
        raise ConfigError(f"{where}: must be non-negative")
    return out


def _int(value: Any, where: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{where}: expected an integer >= {minimum}, got {value!r}")
    return value


def _str(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{where}: expected a non-empty string, got {value!r}")
    return value


def _object(value: Any, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected an object")
    return value


def config_from_dict(obj: Any, base_dir: Optional[Path] = None) -> Config:
    obj = _object(obj, "config")
    unknown = set(obj) - {"stages", "max_attempts", "pricing", "endpoints", "render_command"}
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    cfg = Config(base_dir=base_dir or Path.cwd())

    for name, raw in _object(obj.get("stages", {}), "stages").items():
        where = f"stages.{name}"
        if name not in STAGES:
            raise ConfigError(f"{where}: unknown stage (expected one of {STAGES})")
        raw = _object(raw, where)
        base = DEFAULT_STAGES[name]
        temperature = _decimal(raw.get("temperature", base.temperature), f"{where}.temperature")
        top_p = _decimal(raw.get("top_p", base.top_p), f"{where}.top_p")
        if not 0 < top_p <= 1:
            raise ConfigError(f"{where}.top_p: must be in (0, 1]")
        cfg.stages[name] = StageConfig(
            model=_str(raw.get("model", base.model), f"{where}.model"),
            max_tokens=_int(raw.get("max_tokens", base.max_tokens), f"{where}.max_tokens"),
            temperature=temperature,
            top_p=top_p,
        )

    if "max_attempts" in obj:
        cfg.max_attempts = _int(obj["max_attempts"], "max_attempts")

    for model, raw in _object(obj.get("pricing", {}), "pricing").items():
        where = f"pricing.{model}"
        raw = _object(raw, where)
        for key in ("input", "output"):
            if key not in raw:
                raise ConfigError(f"{where}: missing {key!r}")
        thinking = raw.get("thinking", False)
        if not isinstance(thinking, bool):
            raise ConfigError(f"{where}.thinking: expected true/false")
        entry = PricingEntry(
            _decimal(raw["input"], f"{where}.input"),
            _decimal(raw["output"], f"{where}.output"),
            _decimal(raw["output_thinking"], f"{where}.output_thinking")
            if raw.get("output_thinking") is not None else None,
            thinking,
        )
        if entry.thinking and entry.output_thinking is None:
            raise ConfigError(f"{where}: thinking is on but output_thinking is not set")
        cfg.pricing[model] = entry

    for model, raw in _object(obj.get("endpoints", {}), "endpoints").items():
        where = f"endpoints.{model}"
        raw = _object(raw, where)
        api = raw.get("api", "openai")
        if api not in APIS:
            raise ConfigError(f"{where}.api: expected one of {APIS}")
        if api != "mock":
            _str(raw.get("url"), f"{where}.url")
            _str(raw.get("env_credential"), f"{where}.env_credential")
        cfg.endpoints[model] = EndpointConfig(
            api=api,
            url=raw.get("url"),
            env_credential=raw.get("env_credential"),
            api_model=raw.get("api_model"),
            script=raw.get("script"),
        )

    render = obj.get("render_command")
    if render is not None and not (
            isinstance(render, str) or (isinstance(render, list) and all(isinstance(x, str) for x in render))):
        raise ConfigError("render_command: expected a string or a list of strings")
    cfg.render_command = render
    return cfg


def load_config(path: Union[str, os.PathLike, None] = None) -> Config:
    """Read a config file; a missing default file yields the built-in defaults."""
    explicit = path is not None
    path = Path(path if explicit else DEFAULT_CONFIG_PATH)
    if not path.exists():
        if explicit:
            raise ConfigError(f"config file not found: {path}")
        return Config()
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return config_from_dict(obj, base_dir=path.resolve().parent)
