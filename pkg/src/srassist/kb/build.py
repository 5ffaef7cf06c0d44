"""End-to-end knowledge-base construction from source documents."""
from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from ..gateway import CompletionProvider, EmbeddingProvider
from .chunking import SourceDocument, chunk_document
from .indexing import build_index
from .store import KnowledgeBase
from .variants import ChunkVariant, generate_variants


def build_knowledge_base(docs: Sequence[SourceDocument],
                         embedder: EmbeddingProvider,
                         provider: Optional[CompletionProvider] = None,
                         languages: Sequence[str] = (),
                         variants_per_language: int = 5,
                         ) -> Tuple[KnowledgeBase, List[str]]:
    """Chunk, paraphrase (when a provider and languages are given), and index.

    Returns the knowledge base plus any per-chunk degradation messages.
    """
    chunks = []
    next_chunk_id = 1
    for doc in docs:
        doc_chunks = chunk_document(doc, id_start=next_chunk_id)
        chunks.extend(doc_chunks)
        next_chunk_id += len(doc_chunks)

    variants: List[ChunkVariant] = []
    errors: List[str] = []
    next_variant_id = 1
    for chunk in chunks:
        if provider is not None and languages:
            chunk_variants, chunk_errors = generate_variants(
                chunk, languages, provider,
                n_variants=variants_per_language,
                id_start=next_variant_id)
            errors.extend(f"chunk {chunk.chunk_id}: {e}" for e in chunk_errors)
        else:
            chunk_variants = [ChunkVariant(variant_id=next_variant_id,
                                           chunk_id=chunk.chunk_id,
                                           language="en", text=chunk.content,
                                           is_original=True)]
        variants.extend(chunk_variants)
        next_variant_id += len(chunk_variants)

    index = build_index(variants, embedder)
    kb = KnowledgeBase(chunks=chunks, variants=variants, index=index,
                       embedder_id=embedder.provider_id,
                       languages=list(languages))
    return kb, errors
