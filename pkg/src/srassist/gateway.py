"""Provider-agnostic completion/embedding gateway with usage accounting.

Ships a deterministic mock completion provider and a hashing test embedder
so the full engine runs offline; real providers plug in behind the same
interfaces.
"""
from __future__ import annotations

import re
import statistics
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .errors import Cancelled, ProviderError, ProviderTimeout
from .events import (EventBus, GENERATING_FINISHED, GENERATING_STARTED,
                     HEARTBEAT)


def count_tokens(text: str) -> int:
    """Deterministic test tokenizer: whitespace-delimited word count."""
    return len(text.split())


# ---------------------------------------------------------------------------
# Prompt containers (rendered upstream, consumed by providers)

@dataclass
class TextPart:
    text: str


@dataclass
class ImagePart:
    ref: str


@dataclass
class AssembledPrompt:
    system: str
    user_parts: List[Any]
    template_id: str
    token_estimate: int = 0

    def serialized_text(self) -> str:
        """Stable text rendering used for token counting and mock matching."""
        parts = [self.system]
        for part in self.user_parts:
            if isinstance(part, ImagePart):
                parts.append(f"[image:{part.ref}]")
            else:
                parts.append(part.text)
        return "\n".join(parts)

    def image_count(self) -> int:
        return sum(1 for p in self.user_parts if isinstance(p, ImagePart))


def text_prompt(user_text: str, system: str = "", template_id: str = "utility") -> AssembledPrompt:
    """Minimal prompt for utility completions (paraphrasing, HyDE)."""
    return AssembledPrompt(system=system, user_parts=[TextPart(user_text)],
                           template_id=template_id,
                           token_estimate=count_tokens(system) + count_tokens(user_text))


@dataclass
class ModelRequest:
    prompt: AssembledPrompt
    max_output_tokens: int = 1024
    request_id: str = field(default_factory=lambda: uuid.uuid4().hex)


@dataclass
class Usage:
    input_tokens: int
    output_tokens: int


@dataclass
class ModelResponse:
    text: str
    usage: Usage
    latency_ms: float
    provider_id: str


# ---------------------------------------------------------------------------
# Embedding providers

class EmbeddingProvider:
    provider_id: str = "abstract"
    dim: int = 0

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        """Return one unit-normalized (or zero) vector per text, shape (n, dim)."""
        raise NotImplementedError


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1
_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


def _fnv1a_64(token: str) -> int:
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


class HashingTestEmbedder(EmbeddingProvider):
    """Deterministic bag-of-words embedder used by tests and fixtures.

    Lowercases, splits on non-alphanumeric runs, hashes each token with
    64-bit FNV-1a, signs by the hash's top bit, accumulates into
    h mod dim, then L2-normalizes. Order-independent by construction.
    """

    provider_id = "test-fnv-256"

    def __init__(self, dim: int = 256) -> None:
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float32)
        for i, text in enumerate(texts):
            for token in _TOKEN_SPLIT.split(text.lower()):
                if not token:
                    continue
                h = _fnv1a_64(token)
                sign = 1.0 if (h >> 63) == 0 else -1.0
                out[i, h % self.dim] += sign
            norm = float(np.linalg.norm(out[i]))
            if norm > 0.0:
                out[i] /= norm
        return out


# ---------------------------------------------------------------------------
# Completion providers

@dataclass
class ProviderCapabilities:
    supports_images: bool = True
    embedding_dim: int = 0


class CompletionProvider:
    provider_id: str = "abstract"
    capabilities = ProviderCapabilities()

    def complete(self, request: ModelRequest,
                 cancel: Optional[threading.Event] = None) -> ModelResponse:
        raise NotImplementedError


@dataclass
class ScriptRule:
    """One mock-script entry: first matching substring wins."""
    match: str
    response: str
    latency_ms: float = 0.0
    block_ms: float = 0.0  # real wall delay, for cancellation tests


class MockCompletionProvider(CompletionProvider):
    """Scripted, fully deterministic provider for offline runs."""

    provider_id = "mock"

    def __init__(self, rules: Optional[Sequence[ScriptRule]] = None,
                 default_response: str = "I am not sure how to help with that.",
                 default_latency_ms: float = 0.0,
                 timeout_ms: Optional[float] = None,
                 fail_with: Optional[str] = None) -> None:
        self.rules = list(rules or [])
        self.default_response = default_response
        self.default_latency_ms = default_latency_ms
        self.timeout_ms = timeout_ms
        self.fail_with = fail_with
        self.calls: List[str] = []

    @classmethod
    def from_script(cls, script: Dict[str, Any]) -> "MockCompletionProvider":
        rules = [ScriptRule(match=r["match"], response=r["response"],
                            latency_ms=float(r.get("latency_ms", 0.0)),
                            block_ms=float(r.get("block_ms", 0.0)))
                 for r in script.get("rules", [])]
        return cls(rules=rules,
                   default_response=script.get(
                       "default", "I am not sure how to help with that."),
                   default_latency_ms=float(script.get("default_latency_ms", 0.0)))

    def _pick(self, serialized: str) -> ScriptRule:
        for rule in self.rules:
            if rule.match in serialized:
                return rule
        return ScriptRule(match="", response=self.default_response,
                          latency_ms=self.default_latency_ms)

    def complete(self, request: ModelRequest,
                 cancel: Optional[threading.Event] = None) -> ModelResponse:
        serialized = request.prompt.serialized_text()
        self.calls.append(serialized)
        if self.fail_with is not None:
            raise ProviderError(self.fail_with)
        rule = self._pick(serialized)
        block_ms = rule.block_ms
        if self.timeout_ms is not None and self.timeout_ms <= block_ms:
            if cancel is not None and cancel.wait(self.timeout_ms / 1000.0):
                raise Cancelled("completion cancelled")
            elif cancel is None and self.timeout_ms > 0:
                time.sleep(self.timeout_ms / 1000.0)
            raise ProviderTimeout(f"provider timed out after {self.timeout_ms} ms")
        if block_ms > 0:
            if cancel is not None:
                if cancel.wait(block_ms / 1000.0):
                    raise Cancelled("completion cancelled")
            else:
                time.sleep(block_ms / 1000.0)
        elif cancel is not None and cancel.is_set():
            raise Cancelled("completion cancelled")
        return ModelResponse(
            text=rule.response,
            usage=Usage(input_tokens=count_tokens(serialized),
                        output_tokens=count_tokens(rule.response)),
            latency_ms=rule.latency_ms,
            provider_id=self.provider_id,
        )


# ---------------------------------------------------------------------------
# Usage accounting

@dataclass
class PriceTable:
    per_input_token: float = 0.0
    per_output_token: float = 0.0


@dataclass
class UsageRecord:
    feature: str
    input_tokens: int
    output_tokens: int
    latency_ms: float
    cost: float


class UsageLedger:
    """Per-feature token, latency, and cost accounting."""

    def __init__(self, price_table: Optional[PriceTable] = None,
                 image_token_constant: int = 0) -> None:
        self.price_table = price_table or PriceTable()
        self.image_token_constant = image_token_constant
        self.records: List[UsageRecord] = []

    def cost_of(self, input_tokens: int, output_tokens: int) -> float:
        return (input_tokens * self.price_table.per_input_token
                + output_tokens * self.price_table.per_output_token)

    def record_usage(self, feature: str, response: ModelResponse,
                     image_count: int = 0) -> UsageRecord:
        input_tokens = response.usage.input_tokens + image_count * self.image_token_constant
        record = UsageRecord(
            feature=feature,
            input_tokens=input_tokens,
            output_tokens=response.usage.output_tokens,
            latency_ms=response.latency_ms,
            cost=self.cost_of(input_tokens, response.usage.output_tokens),
        )
        self.records.append(record)
        return record

    def report(self) -> Dict[str, Dict[str, float]]:
        """Mean and population std per feature for latency, cost, and tokens."""
        by_feature: Dict[str, List[UsageRecord]] = {}
        for record in self.records:
            by_feature.setdefault(record.feature, []).append(record)
        out: Dict[str, Dict[str, float]] = {}
        for feature, records in sorted(by_feature.items()):
            def stats(values: List[float]) -> Dict[str, float]:
                return {"mean": statistics.fmean(values),
                        "std": statistics.pstdev(values)}
            out[feature] = {
                "count": len(records),
                "latency_ms": stats([r.latency_ms for r in records]),
                "cost": stats([r.cost for r in records]),
                "input_tokens": stats([r.input_tokens for r in records]),
                "output_tokens": stats([r.output_tokens for r in records]),
            }
        return out


# ---------------------------------------------------------------------------
# Gateway

class ModelGateway:
    """Runs completions through a provider, emitting status events.

    Heartbeats are derived from the response's (scripted or measured)
    latency so fixture runs stay deterministic and sleep-free.
    """

    def __init__(self, provider: CompletionProvider,
                 embedder: Optional[EmbeddingProvider] = None,
                 bus: Optional[EventBus] = None,
                 ledger: Optional[UsageLedger] = None,
                 heartbeat_interval_ms: float = 1000.0) -> None:
        self.provider = provider
        self.embedder = embedder or HashingTestEmbedder()
        self.bus = bus or EventBus()
        self.ledger = ledger or UsageLedger()
        self.heartbeat_interval_ms = heartbeat_interval_ms

    def count_tokens(self, text: str) -> int:
        return count_tokens(text)

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        return self.embedder.embed(texts)

    def complete(self, request: ModelRequest, feature: str = "utility",
                 cancel: Optional[threading.Event] = None,
                 record: bool = True) -> ModelResponse:
        self.bus.emit(GENERATING_STARTED, {"feature": feature},
                      request_id=request.request_id)
        started = time.monotonic()
        try:
            response = self.provider.complete(request, cancel=cancel)
        except Cancelled:
            self.bus.emit(GENERATING_FINISHED, {"status": "cancelled"},
                          request_id=request.request_id)
            raise
        except ProviderError as exc:
            self.bus.emit(GENERATING_FINISHED,
                          {"status": "error", "code": exc.code},
                          request_id=request.request_id)
            raise
        wall_ms = (time.monotonic() - started) * 1000.0
        beats = int(response.latency_ms // self.heartbeat_interval_ms)
        for seq in range(beats):
            self.bus.emit(HEARTBEAT, {"seq": seq}, request_id=request.request_id)
        self.bus.emit(GENERATING_FINISHED, {"status": "ok", "wall_ms": wall_ms},
                      request_id=request.request_id)
        if record:
            self.ledger.record_usage(feature, response,
                                     image_count=request.prompt.image_count())
        return response
