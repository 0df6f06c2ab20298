"""Taxonomy-driven grammatical error analysis with a completion backend."""

from .chunker import Chunk, chunk_text, normalize_sentence
from .parser import AnalysisRecord, CodeStatus, ErrorFinding, parse_response
from .taxonomy import ErrorCode, Taxonomy, load_taxonomy, parse_code, read_taxonomy, validate

__all__ = [
    "AnalysisRecord",
    "Chunk",
    "CodeStatus",
    "ErrorCode",
    "ErrorFinding",
    "Taxonomy",
    "chunk_text",
    "load_taxonomy",
    "normalize_sentence",
    "parse_code",
    "parse_response",
    "read_taxonomy",
    "validate",
]

__version__ = "0.1.0"
