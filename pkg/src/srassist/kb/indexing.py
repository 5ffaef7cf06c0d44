"""Exact flat inner-product index with max-pool merging and HyDE expansion."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..errors import DimMismatch, EmptyQuery, IndexNotLoaded, ProviderError
from ..gateway import (CompletionProvider, EmbeddingProvider, ModelRequest,
                       text_prompt)
from ..prompts import load_prompt_asset
from .chunking import DocChunk
from .variants import ChunkVariant


@dataclass
class RetrievalHit:
    chunk_id: int
    score: float  # max inner product over (variants x query embeddings)
    best_variant_id: int


@dataclass
class VectorIndex:
    """Exact (non-approximate) inner-product index over variant vectors."""
    dim: int
    variant_ids: np.ndarray = field(
        default_factory=lambda: np.zeros(0, dtype=np.int64))
    chunk_ids: np.ndarray = field(
        default_factory=lambda: np.zeros(0, dtype=np.int64))
    vectors: np.ndarray = field(
        default_factory=lambda: np.zeros((0, 0), dtype=np.float32))

    def __len__(self) -> int:
        return len(self.variant_ids)


def build_index(variants: Sequence[ChunkVariant],
                embedder: EmbeddingProvider) -> VectorIndex:
    """Embed every variant text into one index row; vectors unit-normalized."""
    for variant in variants:
        if not variant.text:
            raise ValueError(f"variant {variant.variant_id} has empty text")
    if not variants:
        return VectorIndex(dim=embedder.dim,
                           vectors=np.zeros((0, embedder.dim), dtype=np.float32))
    vectors = embedder.embed([v.text for v in variants]).astype(np.float32)
    if vectors.shape[1] != embedder.dim:
        raise DimMismatch(
            f"embedder returned dim {vectors.shape[1]}, expected {embedder.dim}")
    norms = np.linalg.norm(vectors, axis=1)
    nonzero = norms > 0
    vectors[nonzero] /= norms[nonzero, None]
    return VectorIndex(dim=embedder.dim,
                       variant_ids=np.array([v.variant_id for v in variants],
                                            dtype=np.int64),
                       chunk_ids=np.array([v.chunk_id for v in variants],
                                          dtype=np.int64),
                       vectors=vectors)


def hyde_expand(query: str, provider: CompletionProvider) -> str:
    """Generate a hypothetical answer passage for the query.

    Degrades to the original query on provider failure: retrieval must
    always be answerable.
    """
    if not query.strip():
        raise EmptyQuery("query must be non-empty")
    template = load_prompt_asset("hyde.txt")
    try:
        response = provider.complete(
            ModelRequest(prompt=text_prompt(template.format(query=query))))
    except ProviderError:
        return query
    return response.text if response.text.strip() else query


def search(index: Optional[VectorIndex], query: str, k: int,
           embedder: EmbeddingProvider,
           use_hyde: bool = False,
           provider: Optional[CompletionProvider] = None) -> List[RetrievalHit]:
    """Top-k chunks by max-pooled inner product.

    With HyDE on, the original and expanded query embeddings both retrieve
    and the chunk score is the max over all (variant, query) pairs. Ties
    break by ascending chunk_id; each hit records the argmax variant.
    """
    if index is None:
        raise IndexNotLoaded("no vector index loaded")
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0 or len(index) == 0:
        return []
    query_texts = [query]
    if use_hyde:
        if provider is None:
            raise ValueError("use_hyde requires a completion provider")
        query_texts.append(hyde_expand(query, provider))
    queries = embedder.embed(query_texts).astype(np.float32)
    scores = index.vectors.astype(np.float64) @ queries.astype(np.float64).T
    entry_best = scores.max(axis=1)

    best_score: Dict[int, float] = {}
    best_variant: Dict[int, int] = {}
    for i in range(len(index)):
        cid = int(index.chunk_ids[i])
        score = float(entry_best[i])
        if cid not in best_score or score > best_score[cid]:
            best_score[cid] = score
            best_variant[cid] = int(index.variant_ids[i])
    ranked = sorted(best_score.items(), key=lambda item: (-item[1], item[0]))
    return [RetrievalHit(chunk_id=cid, score=score,
                         best_variant_id=best_variant[cid])
            for cid, score in ranked[:k]]


def format_hits(hits: Sequence[RetrievalHit],
                chunks_by_id: Dict[int, DocChunk]) -> str:
    """Deterministic context block: one headed section per hit, rank order."""
    sections = []
    for hit in hits:
        chunk = chunks_by_id[hit.chunk_id]
        sections.append(f"### {chunk.heading_line()}\n{chunk.content}")
    return "\n\n".join(sections)
