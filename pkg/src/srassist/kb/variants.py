"""Paraphrase-variant generation linked to shared chunk IDs."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ..errors import ProviderError
from ..gateway import CompletionProvider, ModelRequest, text_prompt
from ..prompts import load_prompt_asset

PARAPHRASES_PER_LANGUAGE = 5

_LEADING_NUMBER = re.compile(r"^\s*\d+[.)]\s*")

LANGUAGE_NAMES = {"en": "English", "zh": "Chinese"}


@dataclass
class ChunkVariant:
    variant_id: int
    chunk_id: int
    language: str
    text: str
    is_original: bool = False


def _parse_paraphrase_lines(raw: str) -> List[str]:
    lines = []
    for line in raw.splitlines():
        line = _LEADING_NUMBER.sub("", line).strip()
        if line:
            lines.append(line)
    return lines


def generate_variants(chunk, languages: Sequence[str],
                      provider: CompletionProvider,
                      n_variants: int = PARAPHRASES_PER_LANGUAGE,
                      id_start: int = 1,
                      original_language: str = "en",
                      ) -> Tuple[List[ChunkVariant], List[str]]:
    """Return 1 original + n paraphrases per language for a chunk.

    Any provider failure or wrong line count degrades the chunk to its
    original variant only; the error is reported, not raised, so an index
    build never loses a chunk entirely.
    """
    template = load_prompt_asset("paraphrase.txt")
    next_id = id_start
    original = ChunkVariant(variant_id=next_id, chunk_id=chunk.chunk_id,
                            language=original_language, text=chunk.content,
                            is_original=True)
    next_id += 1
    paraphrases: List[ChunkVariant] = []
    errors: List[str] = []
    for language in languages:
        prompt_text = template.format(
            language=LANGUAGE_NAMES.get(language, language),
            n=n_variants,
            heading=chunk.heading_line(),
            text=chunk.content,
        )
        try:
            response = provider.complete(ModelRequest(prompt=text_prompt(prompt_text)))
        except ProviderError as exc:
            errors.append(f"provider_error[{language}]: {exc}")
            return [original], errors
        lines = _parse_paraphrase_lines(response.text)
        if len(lines) != n_variants:
            errors.append(
                f"variant_count_mismatch[{language}]: expected {n_variants}, "
                f"got {len(lines)}")
            return [original], errors
        for line in lines:
            paraphrases.append(ChunkVariant(variant_id=next_id,
                                            chunk_id=chunk.chunk_id,
                                            language=language, text=line))
            next_id += 1
    return [original] + paraphrases, errors
