"""Documentation knowledge base: chunking, paraphrase indexing, retrieval."""
from .build import build_knowledge_base
from .chunking import (DocChunk, Section, SourceDocument, chunk_document,
                       document_from_dict)
from .indexing import (RetrievalHit, VectorIndex, build_index, format_hits,
                       hyde_expand, search)
from .store import KnowledgeBase, load, persist
from .variants import ChunkVariant, generate_variants

__all__ = [
    "ChunkVariant", "DocChunk", "KnowledgeBase", "RetrievalHit", "Section",
    "SourceDocument", "VectorIndex", "build_index", "build_knowledge_base",
    "chunk_document", "document_from_dict", "format_hits", "generate_variants",
    "hyde_expand", "load", "persist", "search",
]
