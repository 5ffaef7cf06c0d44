"""Knowledge-base persistence: manifest + jsonl records + raw vector file."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..errors import CorruptFile, ManifestMismatch
from ..gateway import CompletionProvider, EmbeddingProvider
from .chunking import DocChunk
from .indexing import RetrievalHit, VectorIndex, format_hits, search
from .variants import ChunkVariant

FORMAT_VERSION = 1

MANIFEST_FILE = "manifest.json"
CHUNKS_FILE = "chunks.jsonl"
VARIANTS_FILE = "variants.jsonl"
VECTORS_FILE = "vectors.bin"


@dataclass
class KnowledgeBase:
    """Loaded chunks, variants, and index; read-only after load."""
    chunks: List[DocChunk]
    variants: List[ChunkVariant]
    index: VectorIndex
    embedder_id: str
    languages: List[str] = field(default_factory=list)

    @property
    def chunks_by_id(self) -> Dict[int, DocChunk]:
        return {c.chunk_id: c for c in self.chunks}

    def search(self, query: str, k: int, embedder: EmbeddingProvider,
               use_hyde: bool = False,
               provider: Optional[CompletionProvider] = None) -> List[RetrievalHit]:
        return search(self.index, query, k, embedder,
                      use_hyde=use_hyde, provider=provider)

    def format_hits(self, hits: Sequence[RetrievalHit]) -> str:
        return format_hits(hits, self.chunks_by_id)


def _dump_jsonl(path: Path, records: Sequence[dict]) -> None:
    lines = [json.dumps(r, sort_keys=True, ensure_ascii=False) for r in records]
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def persist(kb: KnowledgeBase, path: str | Path) -> None:
    """Write the self-describing directory layout; stable bytes for stable input."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "embedder_id": kb.embedder_id,
        "dim": kb.index.dim,
        "languages": list(kb.languages),
        "chunk_count": len(kb.chunks),
        "variant_count": len(kb.variants),
    }
    (out / MANIFEST_FILE).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _dump_jsonl(out / CHUNKS_FILE, [
        {"chunk_id": c.chunk_id, "software": c.software,
         "section_path": c.section_path, "content": c.content}
        for c in kb.chunks])
    _dump_jsonl(out / VARIANTS_FILE, [
        {"variant_id": v.variant_id, "chunk_id": v.chunk_id,
         "language": v.language, "text": v.text, "is_original": v.is_original}
        for v in kb.variants])
    vectors = kb.index.vectors.astype("<f4")
    (out / VECTORS_FILE).write_bytes(vectors.tobytes(order="C"))


def load(path: str | Path, expected_embedder_id: Optional[str] = None) -> KnowledgeBase:
    """Inverse of persist. Rejects embedder mismatches and size anomalies."""
    root = Path(path)
    try:
        manifest = json.loads((root / MANIFEST_FILE).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"bad manifest: {exc}") from exc
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ManifestMismatch(
            f"unsupported format_version {manifest.get('format_version')}")
    if expected_embedder_id is not None \
            and manifest["embedder_id"] != expected_embedder_id:
        raise ManifestMismatch(
            f"index built with embedder {manifest['embedder_id']!r}, "
            f"expected {expected_embedder_id!r}")

    def read_jsonl(name: str) -> List[dict]:
        records = []
        for lineno, line in enumerate(
                (root / name).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CorruptFile(f"{name}:{lineno}: {exc}") from exc
        return records

    chunks = [DocChunk(chunk_id=r["chunk_id"], software=r["software"],
                       section_path=list(r["section_path"]),
                       content=r["content"]) for r in read_jsonl(CHUNKS_FILE)]
    variants = [ChunkVariant(variant_id=r["variant_id"], chunk_id=r["chunk_id"],
                             language=r["language"], text=r["text"],
                             is_original=bool(r["is_original"]))
                for r in read_jsonl(VARIANTS_FILE)]
    if len(chunks) != manifest["chunk_count"]:
        raise CorruptFile(f"expected {manifest['chunk_count']} chunks, "
                          f"found {len(chunks)}")
    if len(variants) != manifest["variant_count"]:
        raise CorruptFile(f"expected {manifest['variant_count']} variants, "
                          f"found {len(variants)}")

    dim = int(manifest["dim"])
    raw = (root / VECTORS_FILE).read_bytes()
    expected_bytes = len(variants) * dim * 4
    if len(raw) != expected_bytes:
        raise CorruptFile(f"vectors.bin is {len(raw)} bytes, "
                          f"expected {expected_bytes}")
    vectors = np.frombuffer(raw, dtype="<f4").reshape(len(variants), dim).copy()
    index = VectorIndex(
        dim=dim,
        variant_ids=np.array([v.variant_id for v in variants], dtype=np.int64),
        chunk_ids=np.array([v.chunk_id for v in variants], dtype=np.int64),
        vectors=vectors)
    return KnowledgeBase(chunks=chunks, variants=variants, index=index,
                         embedder_id=manifest["embedder_id"],
                         languages=list(manifest.get("languages", [])))
