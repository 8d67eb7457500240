"""Chat-completion providers, token accounting and cost.

Every call goes through :class:`LLMClient`, which picks the model for a
pipeline stage, forwards the request to the provider that serves that
model, prices the reported usage and records it in a ledger.
"""
from __future__ import annotations

import base64
import json
import logging
import os
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from decimal import Decimal
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import httpx

from .config import Config, EndpointConfig, PricingEntry
from .errors import AuthError, BadResponse, ConfigError, RateLimited, TransportError

log = logging.getLogger(__name__)

MILLION = Decimal(1_000_000)
LEDGER_STAGES = ("planner", "editor", "codegen", "judge")
# stages that count toward the headline efficiency numbers
EFFICIENCY_STAGES = ("planner", "editor", "codegen")


@dataclass(frozen=True)
class Usage:
    input_tokens: int = 0
    output_tokens: int = 0

    def __post_init__(self) -> None:
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts must be non-negative")

    def __add__(self, other: "Usage") -> "Usage":
        return Usage(self.input_tokens + other.input_tokens, self.output_tokens + other.output_tokens)


@dataclass(frozen=True)
class ModelPricing:
    input_usd_per_million: Decimal
    output_usd_per_million: Decimal

    def __post_init__(self) -> None:
        if self.input_usd_per_million < 0 or self.output_usd_per_million < 0:
            raise ValueError("prices must be non-negative")

    @classmethod
    def from_entry(cls, entry: PricingEntry) -> "ModelPricing":
        output = entry.output_thinking if entry.thinking else entry.output
        return cls(entry.input, output)


def format_usd(amount: Decimal) -> str:
    """Plain decimal text without trailing zeros or exponent ("0.00" -> "0")."""
    return format(amount.normalize(), "f")


def compute_cost(usage: Usage, pricing: ModelPricing) -> Decimal:
    return (Decimal(usage.input_tokens) * pricing.input_usd_per_million
            + Decimal(usage.output_tokens) * pricing.output_usd_per_million) / MILLION


@dataclass(frozen=True)
class ChatRequest:
    model_id: str
    user_text: str
    system_text: Optional[str] = None
    temperature: Decimal = Decimal("0.05")
    top_p: Decimal = Decimal("1.0")
    max_tokens: int = 2048
    # PNG bytes shown to the model before the text
    images: tuple[bytes, ...] = ()

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    usage: Usage


@dataclass(frozen=True)
class LedgerEntry:
    stage: str
    model_id: str
    usage: Usage
    cost_usd: Decimal


class UsageLedger:
    """Append-only record of every completion; safe to share between threads."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._entries: list[LedgerEntry] = []

    def record(self, entry: LedgerEntry) -> None:
        if entry.stage not in LEDGER_STAGES:
            raise ValueError(f"unknown stage {entry.stage!r}")
        with self._lock:
            self._entries.append(entry)

    @property
    def entries(self) -> list[LedgerEntry]:
        with self._lock:
            return list(self._entries)

    def _select(self, stages: Optional[Iterable[str]]) -> list[LedgerEntry]:
        wanted = set(stages) if stages is not None else None
        return [e for e in self.entries if wanted is None or e.stage in wanted]

    def usage(self, stages: Optional[Iterable[str]] = None) -> Usage:
        total = Usage()
        for e in self._select(stages):
            total = total + e.usage
        return total

    def cost(self, stages: Optional[Iterable[str]] = None) -> Decimal:
        return sum((e.cost_usd for e in self._select(stages)), Decimal(0))

    def stages(self) -> list[str]:
        return [e.stage for e in self.entries]

    def to_dict(self) -> dict:
        return {
            "entries": [
                {"stage": e.stage, "model_id": e.model_id, "input_tokens": e.usage.input_tokens,
                 "output_tokens": e.usage.output_tokens, "cost_usd": format_usd(e.cost_usd)}
                for e in self.entries
            ],
            "input_tokens": self.usage().input_tokens,
            "output_tokens": self.usage().output_tokens,
            "cost_usd": format_usd(self.cost()),
        }


# -- providers --------------------------------------------------------------


class ChatProvider(ABC):
    @abstractmethod
    def complete(self, request: ChatRequest) -> ChatResponse:
        ...


@dataclass
class MockReply:
    text: str
    usage: Usage = field(default_factory=Usage)
    # when set, the reply is only served to a prompt containing this text
    match: Optional[str] = None


def _mock_reply(item: Any) -> MockReply:
    if isinstance(item, MockReply):
        return item
    if isinstance(item, str):
        return MockReply(item)
    if isinstance(item, dict) and isinstance(item.get("text"), str):
        usage = item.get("usage") or {}
        return MockReply(
            item["text"],
            Usage(int(usage.get("input_tokens", usage.get("in", 0))),
                  int(usage.get("output_tokens", usage.get("out", 0)))),
            item.get("match"),
        )
    raise ValueError(f"bad mock reply {item!r}")


class MockProvider(ChatProvider):
    """Serves scripted replies in order.

    Replies carrying a ``match`` string go to the first request whose
    prompt contains it, which keeps concurrent runs deterministic. Other
    replies are served in script order.
    """

    def __init__(self, script: Sequence[Any]):
        self._replies = [_mock_reply(x) for x in script]
        self._used = [False] * len(self._replies)
        self._lock = threading.Lock()
        self.requests: list[ChatRequest] = []

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self.requests.append(request)
            for i, reply in enumerate(self._replies):
                if self._used[i]:
                    continue
                if reply.match is None or reply.match in request.user_text:
                    self._used[i] = True
                    return ChatResponse(reply.text, reply.usage)
        raise BadResponse("script exhausted")

    @property
    def remaining(self) -> int:
        with self._lock:
            return self._used.count(False)


def mock_provider(script: Sequence[Any]) -> MockProvider:
    return MockProvider(script)


def load_mock_script(path: Path) -> list[MockReply]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read mock script {path}: {exc}") from None
    if not isinstance(data, list):
        raise ConfigError(f"mock script {path} must be a JSON array")
    try:
        return [_mock_reply(x) for x in data]
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"mock script {path}: {exc}") from None


class HttpProvider(ChatProvider):
    """Shared plumbing for JSON-over-HTTPS chat endpoints."""

    max_retries = 3
    backoff_seconds = 1.0

    def __init__(self, url: str, env_credential: str, api_model: Optional[str] = None,
                 transport: Optional[httpx.BaseTransport] = None, timeout: float = 120.0,
                 sleep=time.sleep):
        self.url = url.rstrip("/")
        self.env_credential = env_credential
        self.api_model = api_model
        self._client = httpx.Client(transport=transport, timeout=timeout)
        self._sleep = sleep

    def _key(self) -> str:
        key = os.environ.get(self.env_credential)
        if not key:
            raise AuthError(f"environment variable {self.env_credential} is not set")
        return key

    def _post(self, url: str, headers: dict, body: dict) -> dict:
        for attempt in range(self.max_retries + 1):
            try:
                resp = self._client.post(url, headers=headers, json=body)
            except httpx.HTTPError as exc:
                raise TransportError(f"{type(exc).__name__}: {exc}") from exc
            if resp.status_code in (401, 403):
                raise AuthError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            if resp.status_code == 429 or resp.status_code >= 500:
                if attempt < self.max_retries:
                    delay = self.backoff_seconds * 2 ** attempt
                    log.warning("HTTP %s from %s; retrying in %.1fs", resp.status_code, url, delay)
                    self._sleep(delay)
                    continue
                if resp.status_code == 429:
                    raise RateLimited(f"rate limited after {self.max_retries + 1} attempts")
                raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            if resp.status_code >= 400:
                raise BadResponse(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError:
                raise BadResponse("response body is not JSON") from None
        raise AssertionError("unreachable")

    def _model(self, request: ChatRequest) -> str:
        return self.api_model or request.model_id

    @staticmethod
    def _dig(obj: Any, *path: Any) -> Any:
        try:
            for key in path:
                obj = obj[key]
        except (KeyError, IndexError, TypeError):
            raise BadResponse(f"response lacks {'/'.join(map(str, path))}") from None
        return obj


def _b64(png: bytes) -> str:
    return base64.b64encode(png).decode("ascii")


class OpenAIProvider(HttpProvider):
    """OpenAI chat completions; DeepSeek speaks the same protocol."""

    def complete(self, request: ChatRequest) -> ChatResponse:
        key = self._key()
        content: Any = request.user_text
        if request.images:
            content = [{"type": "image_url", "image_url": {"url": "data:image/png;base64," + _b64(img)}}
                       for img in request.images]
            content.append({"type": "text", "text": request.user_text})
        messages = []
        if request.system_text:
            messages.append({"role": "system", "content": request.system_text})
        messages.append({"role": "user", "content": content})
        body = {"model": self._model(request), "messages": messages,
                "temperature": float(request.temperature), "top_p": float(request.top_p),
                "max_tokens": request.max_tokens}
        data = self._post(self.url + "/chat/completions", {"Authorization": f"Bearer {key}"}, body)
        text = self._dig(data, "choices", 0, "message", "content")
        usage = data.get("usage") or {}
        return ChatResponse(text or "", Usage(int(usage.get("prompt_tokens", 0)),
                                              int(usage.get("completion_tokens", 0))))


class AnthropicProvider(HttpProvider):
    def complete(self, request: ChatRequest) -> ChatResponse:
        key = self._key()
        content = [{"type": "image", "source": {"type": "base64", "media_type": "image/png",
                                                "data": _b64(img)}} for img in request.images]
        content.append({"type": "text", "text": request.user_text})
        body = {"model": self._model(request), "max_tokens": request.max_tokens,
                "temperature": float(request.temperature), "top_p": float(request.top_p),
                "messages": [{"role": "user", "content": content}]}
        if request.system_text:
            body["system"] = request.system_text
        headers = {"x-api-key": key, "anthropic-version": "2023-06-01"}
        data = self._post(self.url + "/messages", headers, body)
        blocks = self._dig(data, "content")
        text = "".join(b.get("text", "") for b in blocks if isinstance(b, dict) and b.get("type") == "text")
        usage = data.get("usage") or {}
        return ChatResponse(text, Usage(int(usage.get("input_tokens", 0)), int(usage.get("output_tokens", 0))))


class GeminiProvider(HttpProvider):
    def complete(self, request: ChatRequest) -> ChatResponse:
        key = self._key()
        parts = [{"inline_data": {"mime_type": "image/png", "data": _b64(img)}} for img in request.images]
        parts.append({"text": request.user_text})
        body: dict[str, Any] = {
            "contents": [{"role": "user", "parts": parts}],
            "generationConfig": {"temperature": float(request.temperature), "topP": float(request.top_p),
                                 "maxOutputTokens": request.max_tokens},
        }
        if request.system_text:
            body["systemInstruction"] = {"parts": [{"text": request.system_text}]}
        url = f"{self.url}/models/{self._model(request)}:generateContent"
        data = self._post(url, {"x-goog-api-key": key}, body)
        parts_out = self._dig(data, "candidates", 0, "content", "parts")
        text = "".join(p.get("text", "") for p in parts_out if isinstance(p, dict))
        meta = data.get("usageMetadata") or {}
        out_tokens = int(meta.get("candidatesTokenCount", 0)) + int(meta.get("thoughtsTokenCount", 0))
        return ChatResponse(text, Usage(int(meta.get("promptTokenCount", 0)), out_tokens))


_ADAPTERS = {"openai": OpenAIProvider, "anthropic": AnthropicProvider, "gemini": GeminiProvider}


def build_provider(config: Config, model: str, transport: Optional[httpx.BaseTransport] = None) -> ChatProvider:
    ep = config.endpoint(model)
    if ep.api == "mock":
        if not ep.script:
            raise ConfigError(f"mock endpoint for {model!r} needs a 'script' path")
        return MockProvider(load_mock_script(config.base_dir / ep.script))
    return _ADAPTERS[ep.api](ep.url, ep.env_credential, ep.api_model, transport=transport)


# -- client -----------------------------------------------------------------


class LLMClient:
    """Routes stage requests to providers and ledgers every completion.

    ``providers`` maps model ids to provider instances; models without an
    entry are built from the config on first use.
    """

    def __init__(self, config: Config, providers: Optional[dict[str, ChatProvider]] = None,
                 ledger: Optional[UsageLedger] = None):
        self.config = config
        self._providers = dict(providers or {})
        self._lock = threading.Lock()
        self.ledger = ledger if ledger is not None else UsageLedger()

    def provider_for(self, model: str) -> ChatProvider:
        with self._lock:
            if model not in self._providers:
                self._providers[model] = build_provider(self.config, model)
            return self._providers[model]

    def with_ledger(self, ledger: Optional[UsageLedger] = None) -> "LLMClient":
        """Same config and providers, separate ledger."""
        clone = LLMClient.__new__(LLMClient)
        clone.config = self.config
        clone._providers = self._providers
        clone._lock = self._lock
        clone.ledger = ledger if ledger is not None else UsageLedger()
        return clone

    def pricing(self, model: str) -> ModelPricing:
        return ModelPricing.from_entry(self.config.price(model))

    def complete(self, stage: str, user_text: str, system_text: Optional[str] = None,
                 images: Sequence[bytes] = ()) -> ChatResponse:
        sc = self.config.stage(stage)
        pricing = self.pricing(sc.model)
        request = ChatRequest(sc.model, user_text, system_text, sc.temperature, sc.top_p,
                              sc.max_tokens, tuple(images))
        response = self.provider_for(sc.model).complete(request)
        self.ledger.record(LedgerEntry(stage, sc.model, response.usage, compute_cost(response.usage, pricing)))
        return response


def mock_client(script: Sequence[Any], config: Optional[Config] = None, model: str = "mock") -> LLMClient:
    """A client whose every stage is served by one scripted mock."""
    cfg = config or Config()
    cfg = replace(
        cfg,
        stages={name: replace(sc, model=model) for name, sc in cfg.stages.items()},
        pricing={**cfg.pricing, model: cfg.pricing.get(model, PricingEntry(Decimal("0.15"), Decimal("0.60")))},
        endpoints={**cfg.endpoints, model: EndpointConfig("mock")},
    )
    return LLMClient(cfg, {model: MockProvider(script)})
