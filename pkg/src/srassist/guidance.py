"""Parsing model output into step-navigable guidance."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Optional

_STEP_LINE = re.compile(r"^\s*(\d+)[.)]\s+(.*)$")


@dataclass
class Step:
    index: int  # 1-based, contiguous
    text: str


@dataclass
class GuidanceResponse:
    turn_id: int
    preamble: Optional[str]
    steps: List[Step]
    raw_text: str
    feature: str = ""


def parse_steps(raw_text: str, fallback_single_step: bool = True) -> tuple[Optional[str], List[Step]]:
    """Split raw model text into (preamble, numbered steps).

    Lines starting with ``N.`` or ``N)`` open a step; following unnumbered
    lines attach to the current step. Text before the first numbered line is
    the preamble. Indices are renumbered 1..n in order of appearance. With no
    numbered line at all, the whole text becomes a single step (or no step
    when ``fallback_single_step`` is off, for summary-style responses).
    """
    preamble_lines: List[str] = []
    step_texts: List[str] = []
    for line in raw_text.splitlines():
        match = _STEP_LINE.match(line)
        if match:
            step_texts.append(match.group(2).strip())
        elif step_texts:
            if line.strip():
                step_texts[-1] = f"{step_texts[-1]} {line.strip()}".strip()
        else:
            if line.strip():
                preamble_lines.append(line.strip())
    preamble = "\n".join(preamble_lines) if preamble_lines else None
    steps = [Step(index=i + 1, text=text) for i, text in enumerate(step_texts)]
    if not steps and fallback_single_step and raw_text.strip():
        steps = [Step(index=1, text=raw_text.strip())]
        preamble = None
    return preamble, steps
