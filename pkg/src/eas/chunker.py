"""Sentence chunking of input documents."""

from __future__ import annotations

import re
from dataclasses import dataclass

DEFAULT_ABBREVIATIONS = frozenset({"Mr.", "Mrs.", "Dr.", "e.g.", "i.e."})
# "Title:" or a single capital letter, e.g. "C:"
DEFAULT_LABEL_PATTERN = r"(Title|[A-Z]):"

_TERMINATOR_RUN = re.compile(r"[.?!…]+[\"')\]”’]*")


@dataclass(frozen=True)
class Chunk:
    index: int
    text: str
    speaker: str | None
    source_line: int  # 1-based
    source_offset: int  # 0-based, within the raw source line


def normalize_sentence(text: str) -> str:
    """Collapse whitespace runs to one space and trim; nothing else changes."""
    return " ".join(text.split())


def _is_boundary(line: str, run: re.Match[str], abbreviations: frozenset[str]) -> bool:
    end = run.end()
    if end < len(line) and not line[end].isspace():
        return False
    marks = run.group().rstrip("\"')]”’")
    if "…" in marks or marks.count(".") >= 3 and set(marks) == {"."}:
        return False
    if marks[-1] == "." and set(marks) == {"."}:
        start = line.rfind(" ", 0, run.start()) + 1
        token = line[start:end].lstrip("\"'(“‘")
        if token in abbreviations:
            return False
    if marks[-1] in "?!":
        rest = line[end:].lstrip()
        if rest and rest[0].islower():
            return False
    return True


def _split_line(content: str, abbreviations: frozenset[str]) -> list[tuple[int, str]]:
    pieces = []
    start = 0
    for run in _TERMINATOR_RUN.finditer(content):
        if _is_boundary(content, run, abbreviations):
            pieces.append((start, content[start : run.end()]))
            start = run.end()
    pieces.append((start, content[start:]))

    out = []
    for offset, piece in pieces:
        stripped = piece.strip()
        if stripped:
            out.append((offset + (len(piece) - len(piece.lstrip())), stripped))
    return out


def chunk_text(
    document: str,
    *,
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
    label_pattern: str = DEFAULT_LABEL_PATTERN,
) -> list[Chunk]:
    """Split ``document`` into one chunk per sentence.

    Boundaries are ``.``, ``?`` or ``!`` followed by whitespace or the end of
    the line; semicolons never split and sentences never cross lines. A leading
    speaker label (``"Title:"``, ``"B:"``) is removed from the text and kept in
    :attr:`Chunk.speaker`.
    """
    label_re = re.compile(r"\s*" + label_pattern + r"\s*")
    document = document.replace("\r\n", "\n").replace("\r", "\n")
    chunks: list[Chunk] = []
    for line_no, line in enumerate(document.split("\n"), start=1):
        speaker = None
        base = 0
        m = label_re.match(line)
        if m:
            speaker = m.group(1)
            base = m.end()
        for offset, text in _split_line(line[base:], abbreviations):
            chunks.append(Chunk(len(chunks), text, speaker, line_no, base + offset))
    return chunks
