"""Engine and gateway configuration."""
from __future__ import annotations

import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .context import BlockBudgets
from .gateway import PriceTable


@dataclass
class EngineConfig:
    retrieval_k: int = 3
    use_hyde: bool = False
    trace_capacity: int = 500
    trace_window: int = 50
    budgets: BlockBudgets = field(default_factory=BlockBudgets)
    max_output_tokens: int = 1024
    heartbeat_interval_ms: float = 1000.0
    image_token_constant: int = 0
    price_table: PriceTable = field(default_factory=PriceTable)


@dataclass
class GatewayConfig:
    provider_id: str = "mock"
    endpoint: str = ""
    model_name: str = ""
    timeout_ms: Optional[float] = None
    price_table: PriceTable = field(default_factory=PriceTable)


_ENV_PREFIX = "SRASSIST_"


def load_gateway_config(path: Optional[str | Path] = None) -> GatewayConfig:
    """Read gateway settings from a TOML file with environment overrides."""
    data: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    price = data.get("price_table", {})
    config = GatewayConfig(
        provider_id=data.get("provider_id", "mock"),
        endpoint=data.get("endpoint", ""),
        model_name=data.get("model_name", ""),
        timeout_ms=data.get("timeout_ms"),
        price_table=PriceTable(
            per_input_token=float(price.get("per_input_token", 0.0)),
            per_output_token=float(price.get("per_output_token", 0.0))),
    )
    for key in ("provider_id", "endpoint", "model_name"):
        value = os.environ.get(_ENV_PREFIX + key.upper())
        if value is not None:
            setattr(config, key, value)
    timeout = os.environ.get(_ENV_PREFIX + "TIMEOUT_MS")
    if timeout is not None:
        config.timeout_ms = float(timeout)
    return config
