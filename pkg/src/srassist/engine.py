"""Wiring helpers: build a full session from fixtures and configuration."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional

from .config import EngineConfig
from .context import ContextStore
from .events import EventBus
from .gateway import (CompletionProvider, EmbeddingProvider,
                      HashingTestEmbedder, MockCompletionProvider,
                      ModelGateway, UsageLedger)
from .kb.store import KnowledgeBase
from .orchestrator import Session
from .platform_sim import (PlatformAdapter, SimulatedDesktop,
                           script_from_dict)
from .prompts import PromptAssembler


@dataclass
class Engine:
    """A session plus the collaborators tests and harnesses need to reach."""
    session: Session
    adapter: PlatformAdapter
    gateway: ModelGateway
    store: ContextStore
    bus: EventBus
    ledger: UsageLedger


def build_engine(adapter: PlatformAdapter,
                 provider: CompletionProvider,
                 kb: Optional[KnowledgeBase] = None,
                 embedder: Optional[EmbeddingProvider] = None,
                 config: Optional[EngineConfig] = None) -> Engine:
    config = config or EngineConfig()
    bus = EventBus()
    ledger = UsageLedger(price_table=config.price_table,
                         image_token_constant=config.image_token_constant)
    gateway = ModelGateway(provider=provider,
                           embedder=embedder or HashingTestEmbedder(),
                           bus=bus, ledger=ledger,
                           heartbeat_interval_ms=config.heartbeat_interval_ms)
    store = ContextStore(trace_capacity=config.trace_capacity,
                         trace_window=config.trace_window,
                         budgets=config.budgets)
    session = Session(store=store, gateway=gateway,
                      assembler=PromptAssembler(), adapter=adapter,
                      kb=kb, config=config)
    return Engine(session=session, adapter=adapter, gateway=gateway,
                  store=store, bus=bus, ledger=ledger)


def engine_from_fixtures(desktop: Dict[str, Any],
                         model_script: Dict[str, Any],
                         kb: Optional[KnowledgeBase] = None,
                         config: Optional[EngineConfig] = None) -> Engine:
    """Build a fully scripted, offline engine from fixture dictionaries."""
    adapter = SimulatedDesktop(script_from_dict(desktop))
    provider = MockCompletionProvider.from_script(model_script)
    return build_engine(adapter=adapter, provider=provider, kb=kb,
                        config=config)
