"""Chunking, paraphrase variants, index building, and persistence."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from srassist.errors import CorruptFile, ManifestMismatch
from srassist.gateway import (HashingTestEmbedder, MockCompletionProvider,
                              ScriptRule)
from srassist.kb.build import build_knowledge_base
from srassist.kb.chunking import (DocChunk, Section, SourceDocument,
                                  chunk_document, document_from_dict)
from srassist.kb.indexing import build_index, format_hits
from srassist.kb.store import load, persist
from srassist.kb.variants import ChunkVariant, generate_variants

WORD_DOC = SourceDocument(software="Microsoft Word", sections=[
    Section(heading="Insert", children=[
        Section(heading="Page Number",
                body="Press Alt+N, then N, then U to open the Page Number "
                     "menu. Choose a position with the arrow keys."),
    ]),
    Section(heading="Layout", children=[
        Section(heading="Margins",
                body="Press Alt+P, then M to open the Margins gallery."),
    ]),
])


def paraphrase_provider(lines_per_language=5) -> MockCompletionProvider:
    en = "\n".join(f"{i}. english paraphrase {i}"
                   for i in range(1, lines_per_language + 1))
    zh = "\n".join(f"{i}. chinese paraphrase {i}"
                   for i in range(1, lines_per_language + 1))
    return MockCompletionProvider(rules=[
        ScriptRule(match="in Chinese", response=zh),
        ScriptRule(match="in English", response=en),
    ])


# -- chunking ------------------------------------------------------------------

def test_chunk_empty_document():
    assert chunk_document(SourceDocument(software="App")) == []


def test_chunk_word_fixture():
    chunks = chunk_document(WORD_DOC)
    assert [c.section_path for c in chunks] == [
        ["Insert", "Page Number"], ["Layout", "Margins"]]
    assert [c.chunk_id for c in chunks] == [1, 2]
    assert chunks[0].heading_line() == \
        "Microsoft Word — Insert > Page Number"
    assert "Alt+N" in chunks[0].content


def test_chunk_nested_ancestry_and_empty_bodies():
    doc = SourceDocument(software="App", sections=[
        Section(heading="H1", children=[
            Section(heading="H2", body="leaf body"),
            Section(heading="H3", body="   "),
        ])])
    chunks = chunk_document(doc)
    assert len(chunks) == 1
    assert chunks[0].section_path == ["H1", "H2"]


def test_chunk_requires_content():
    with pytest.raises(ValueError):
        DocChunk(chunk_id=1, software="App", section_path=["A"], content="")


def test_document_from_dict_round_trip():
    doc = document_from_dict({
        "software": "App", "language": "en",
        "sections": [{"heading": "A", "children": [
            {"heading": "B", "body": "text"}]}]})
    chunks = chunk_document(doc)
    assert chunks[0].section_path == ["A", "B"]


# -- variants ------------------------------------------------------------------

def test_variants_single_language_count():
    chunk = chunk_document(WORD_DOC)[0]
    variants, errors = generate_variants(chunk, ["en"],
                                         paraphrase_provider())
    assert errors == []
    assert len(variants) == 6
    assert variants[0].is_original and variants[0].text == chunk.content
    assert all(v.chunk_id == chunk.chunk_id for v in variants)
    assert sum(v.is_original for v in variants) == 1


def test_variants_two_languages_count():
    chunk = chunk_document(WORD_DOC)[0]
    variants, errors = generate_variants(chunk, ["en", "zh"],
                                         paraphrase_provider())
    assert errors == []
    assert len(variants) == 11
    assert [v.language for v in variants].count("zh") == 5
    # leading numbering stripped from paraphrase lines
    assert all(not v.text[0].isdigit() for v in variants if not v.is_original)


def test_variants_count_mismatch_degrades_to_original():
    chunk = chunk_document(WORD_DOC)[0]
    variants, errors = generate_variants(chunk, ["en"],
                                         paraphrase_provider(3))
    assert len(variants) == 1 and variants[0].is_original
    assert any("variant_count_mismatch" in e for e in errors)


def test_variants_provider_error_degrades_to_original():
    chunk = chunk_document(WORD_DOC)[0]
    variants, errors = generate_variants(
        chunk, ["en"], MockCompletionProvider(fail_with="down"))
    assert len(variants) == 1 and variants[0].is_original
    assert any("provider_error" in e for e in errors)


# -- index build ------------------------------------------------------------------

def test_build_index_counts_and_unit_norms(embedder):
    kb, errors = build_knowledge_base([WORD_DOC], embedder,
                                      provider=paraphrase_provider(),
                                      languages=["en"])
    assert errors == []
    assert len(kb.variants) == 12  # 2 chunks x (1 + 5)
    assert kb.index.vectors.shape == (12, 256)
    norms = np.linalg.norm(kb.index.vectors, axis=1)
    assert np.allclose(norms, 1.0, atol=1e-6)


def test_build_index_empty(embedder):
    index = build_index([], embedder)
    assert len(index) == 0


def test_build_index_rejects_empty_text(embedder):
    with pytest.raises(ValueError):
        build_index([ChunkVariant(variant_id=1, chunk_id=1, language="en",
                                  text="")], embedder)


def test_build_is_deterministic(embedder, tmp_path):
    def build_and_persist(out: Path) -> None:
        kb, _ = build_knowledge_base([WORD_DOC], embedder,
                                     provider=paraphrase_provider(),
                                     languages=["en", "zh"])
        persist(kb, out)

    build_and_persist(tmp_path / "a")
    build_and_persist(tmp_path / "b")
    for name in ("manifest.json", "chunks.jsonl", "variants.jsonl",
                 "vectors.bin"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


# -- persistence --------------------------------------------------------------------

def build_kb(embedder, languages=("en",)):
    kb, _ = build_knowledge_base([WORD_DOC], embedder,
                                 provider=paraphrase_provider(),
                                 languages=list(languages))
    return kb


def test_persist_load_round_trip(embedder, tmp_path):
    kb = build_kb(embedder)
    persist(kb, tmp_path / "kb")
    loaded = load(tmp_path / "kb", expected_embedder_id=embedder.provider_id)
    assert loaded.chunks == kb.chunks
    assert loaded.variants == kb.variants
    assert loaded.languages == kb.languages
    assert np.array_equal(loaded.index.vectors, kb.index.vectors)
    hits = loaded.search("page number menu", 2, embedder)
    assert hits[0].chunk_id == 1


def test_persist_is_byte_stable_through_reload(embedder, tmp_path):
    kb = build_kb(embedder, languages=("en", "zh"))
    persist(kb, tmp_path / "first")
    persist(load(tmp_path / "first"), tmp_path / "second")
    for name in ("manifest.json", "chunks.jsonl", "variants.jsonl",
                 "vectors.bin"):
        assert (tmp_path / "first" / name).read_bytes() == \
            (tmp_path / "second" / name).read_bytes()


def test_load_rejects_embedder_mismatch(embedder, tmp_path):
    persist(build_kb(embedder), tmp_path / "kb")
    with pytest.raises(ManifestMismatch):
        load(tmp_path / "kb", expected_embedder_id="hosted-3-large")


def test_load_rejects_bad_format_version(embedder, tmp_path):
    persist(build_kb(embedder), tmp_path / "kb")
    manifest_path = tmp_path / "kb" / "manifest.json"
    manifest = json.loads(manifest_path.read_text())
    manifest["format_version"] = 99
    manifest_path.write_text(json.dumps(manifest))
    with pytest.raises(ManifestMismatch):
        load(tmp_path / "kb")


def test_load_rejects_truncated_vectors(embedder, tmp_path):
    persist(build_kb(embedder), tmp_path / "kb")
    vectors_path = tmp_path / "kb" / "vectors.bin"
    vectors_path.write_bytes(vectors_path.read_bytes()[:-8])
    with pytest.raises(CorruptFile):
        load(tmp_path / "kb")


def test_load_rejects_corrupt_jsonl(embedder, tmp_path):
    persist(build_kb(embedder), tmp_path / "kb")
    chunks_path = tmp_path / "kb" / "chunks.jsonl"
    chunks_path.write_text(chunks_path.read_text() + "{not json\n")
    with pytest.raises(CorruptFile):
        load(tmp_path / "kb")


# -- hit formatting -------------------------------------------------------------------

def test_format_hits_empty_and_ordered(embedder):
    kb = build_kb(embedder)
    assert kb.format_hits([]) == ""
    hits = kb.search("page number margins", 2, embedder)
    text = kb.format_hits(hits)
    sections = text.split("\n\n")
    assert len(sections) == 2
    assert all(s.startswith("### Microsoft Word — ") for s in sections)
    first_heading = kb.chunks_by_id[hits[0].chunk_id].heading_line()
    assert sections[0].startswith(f"### {first_heading}")
