"""Heading-based documentation chunking."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional


@dataclass
class Section:
    heading: str
    body: str = ""
    children: List["Section"] = field(default_factory=list)


@dataclass
class SourceDocument:
    software: str
    language: str = "en"
    sections: List[Section] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.software:
            raise ValueError("software name must be non-empty")


@dataclass
class DocChunk:
    chunk_id: int
    software: str
    section_path: List[str]
    content: str

    def __post_init__(self) -> None:
        if not self.content:
            raise ValueError("chunk content must be non-empty")

    def heading_line(self) -> str:
        return f"{self.software} — {' > '.join(self.section_path)}"


def chunk_document(doc: SourceDocument, id_start: int = 1) -> List[DocChunk]:
    """One chunk per leaf section with a non-empty body, in document order.

    section_path is the heading ancestry down to the leaf.
    """
    chunks: List[DocChunk] = []
    next_id = id_start

    def walk(section: Section, ancestry: List[str]) -> None:
        nonlocal next_id
        path = ancestry + [section.heading]
        if section.children:
            for child in section.children:
                walk(child, path)
        elif section.body.strip():
            chunks.append(DocChunk(chunk_id=next_id, software=doc.software,
                                   section_path=path,
                                   content=section.body.strip()))
            next_id += 1

    for section in doc.sections:
        walk(section, [])
    return chunks


def document_from_dict(data: Dict) -> SourceDocument:
    def section(d: Dict) -> Section:
        return Section(heading=d["heading"], body=d.get("body", ""),
                       children=[section(c) for c in d.get("children", [])])

    return SourceDocument(software=data["software"],
                          language=data.get("language", "en"),
                          sections=[section(s) for s in data.get("sections", [])])
