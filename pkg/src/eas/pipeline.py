"""End-to-end document analysis: chunk, prompt, complete, parse, resolve, write."""

from __future__ import annotations

import json
import logging
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .backend import Backend, BackendConfig, CompletionRequest, make_backend
from .chunker import Chunk, chunk_text, normalize_sentence
from .errors import (
    AuthError,
    BackendError,
    BackendFatal,
    EASError,
    InputUnreadable,
    MissingApiKey,
    OutputUnwritable,
    ResponseParseError,
    TaxonomyError,
    TaxonomyInvalid,
)
from .parser import ANALYSIS_FAILED, AnalysisRecord, CodeStatus, parse_response, render_records
from .prompting import PromptBuilder
from .resolver import apply_resolution, classify_code_status, resolve_conflicts
from .taxonomy import Taxonomy, has_errors, read_taxonomy, validate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    taxonomy_path: str | Path
    input_path: str | Path
    output_path: str | Path
    backend: BackendConfig
    report_path: str | Path | None = None
    max_sentence_retries: int = 3
    parallelism: int = 1
    temperature: float = 0.0
    request_timeout: float = 60.0

    def __post_init__(self) -> None:
        for name in ("taxonomy_path", "input_path", "output_path"):
            if not str(getattr(self, name)):
                raise ValueError(f"{name} must not be empty")
        if self.max_sentence_retries < 0:
            raise ValueError("max_sentence_retries must be >= 0")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


@dataclass
class ChunkStatus:
    index: int
    text: str
    status: str  # "analyzed" | "abandoned"
    retries: int
    last_error: str | None = None


@dataclass
class RunReport:
    chunks: list[ChunkStatus] = field(default_factory=list)
    code_status_counts: dict[str, int] = field(
        default_factory=lambda: {s.value: 0 for s in CodeStatus}
    )
    suppressed: list[dict[str, Any]] = field(default_factory=list)
    label_drift: list[dict[str, Any]] = field(default_factory=list)
    unknown_codes: list[dict[str, Any]] = field(default_factory=list)
    duration_seconds: float = 0.0

    @property
    def abandoned(self) -> list[ChunkStatus]:
        return [c for c in self.chunks if c.status == "abandoned"]

    def to_dict(self) -> dict[str, Any]:
        return {
            "chunk_count": len(self.chunks),
            "abandoned_count": len(self.abandoned),
            "chunks": [
                {
                    "index": c.index,
                    "text": c.text,
                    "status": c.status,
                    "retries": c.retries,
                    "last_error": c.last_error,
                }
                for c in self.chunks
            ],
            "code_status_counts": dict(self.code_status_counts),
            "suppressed": self.suppressed,
            "label_drift": self.label_drift,
            "unknown_codes": self.unknown_codes,
            "duration_seconds": round(self.duration_seconds, 3),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def find_missing(sent: list[Chunk], records: list[AnalysisRecord]) -> list[Chunk]:
    """Chunks with no record echoing their sentence; each record satisfies one chunk."""
    available = Counter(normalize_sentence(r.original_text) for r in records)
    missing = []
    for chunk in sent:
        key = normalize_sentence(chunk.text)
        if available[key] > 0:
            available[key] -= 1
        else:
            missing.append(chunk)
    return missing


def write_output(records: list[AnalysisRecord], path: str | Path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_records(records))
    except OSError as exc:
        raise OutputUnwritable(f"cannot write {path}: {exc}") from None


def failed_record(chunk: Chunk) -> AnalysisRecord:
    return AnalysisRecord(chunk.text, ANALYSIS_FAILED, analysis_failed=True)


def resolve_record(tax: Taxonomy, record: AnalysisRecord, chunk_index: int, report: RunReport):
    """Classify codes and apply hierarchy rules, logging findings into ``report``."""
    for finding in record.findings:
        status = classify_code_status(tax, finding)
        finding.code_status = status.status
        report.code_status_counts[status.status.value] += 1
        if status.status is CodeStatus.UNKNOWN_CODE:
            report.unknown_codes.append(
                {
                    "chunk": chunk_index,
                    "ordinal": finding.ordinal,
                    "code": finding.code_text,
                    "nearest_known": str(status.nearest_known) if status.nearest_known else None,
                }
            )
        if status.label_drift:
            node = tax.lookup(finding.code)
            report.label_drift.append(
                {
                    "chunk": chunk_index,
                    "ordinal": finding.ordinal,
                    "code": finding.code_text,
                    "explanation": finding.explanation,
                    "category_name": node.name if node else None,
                }
            )
    outcome = resolve_conflicts(tax, record)
    for s in outcome.suppressed:
        report.suppressed.append(
            {
                "chunk": chunk_index,
                "ordinal": s.finding.ordinal,
                "code": s.finding.code_text,
                "span": s.finding.span,
                "winner_code": s.winner.code_text,
                "winner_span": s.winner.span,
                "rule": s.rule_ordinal,
            }
        )
    return apply_resolution(tax, record, outcome)


def _load_taxonomy(path: str | Path) -> Taxonomy:
    try:
        tax = read_taxonomy(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise TaxonomyInvalid(f"cannot read taxonomy {path}: {exc}") from None
    except TaxonomyError as exc:
        raise TaxonomyInvalid(f"{path}: {exc}") from None
    diags = validate(tax)
    if has_errors(diags):
        raise TaxonomyInvalid("; ".join(str(d) for d in diags if d.severity == "error"))
    return tax


def analyze_document(config: RunConfig, *, backend: Backend | None = None) -> RunReport:
    """Run the whole analysis and write the output (and report) files.

    Chunks whose response is missing, unparseable, or lacks their sentence are
    re-sent up to ``max_sentence_retries`` times, then recorded as abandoned.
    Output order always follows the input, whatever the parallelism.
    """
    started = time.monotonic()
    tax = _load_taxonomy(config.taxonomy_path)
    try:
        document = Path(config.input_path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputUnreadable(f"cannot read {config.input_path}: {exc}") from None
    chunks = chunk_text(document)

    if backend is None:
        try:
            backend = make_backend(config.backend)
        except (OSError, EASError) as exc:
            raise BackendFatal(f"cannot initialise backend: {exc}") from None
    builder = PromptBuilder(tax, temperature=config.temperature, model_hint=config.backend.model)

    def call(chunk: Chunk):
        request = CompletionRequest(
            builder.build(chunk), chunk.index, config.request_timeout, chunk.text
        )
        try:
            return backend.complete(request).raw_text
        except BackendError as exc:
            return exc

    accepted: dict[int, AnalysisRecord] = {}
    attempts: Counter[int] = Counter()
    last_error: dict[int, str] = {}
    pending = list(chunks)
    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        for _round in range(config.max_sentence_retries + 1):
            if not pending:
                break
            still_missing = []
            for chunk, outcome in zip(pending, pool.map(call, pending)):
                attempts[chunk.index] += 1
                if isinstance(outcome, (AuthError, MissingApiKey)):
                    raise BackendFatal(str(outcome)) from outcome
                if isinstance(outcome, BackendError):
                    last_error[chunk.index] = f"{type(outcome).__name__}: {outcome}"
                    still_missing.append(chunk)
                    continue
                try:
                    records = parse_response(outcome)
                except ResponseParseError as exc:
                    last_error[chunk.index] = f"{type(exc).__name__}: {exc}"
                    still_missing.append(chunk)
                    continue
                key = normalize_sentence(chunk.text)
                match = next(
                    (r for r in records if normalize_sentence(r.original_text) == key), None
                )
                if match is None:
                    last_error[chunk.index] = "response does not echo the sentence"
                    still_missing.append(chunk)
                else:
                    accepted[chunk.index] = match
            pending = still_missing
            if pending:
                log.info("%d chunk(s) missing after round %d", len(pending), _round + 1)

    report = RunReport()
    out_records = []
    for chunk in chunks:
        retries = attempts[chunk.index] - 1
        record = accepted.get(chunk.index)
        if record is None:
            report.chunks.append(
                ChunkStatus(chunk.index, chunk.text, "abandoned", retries, last_error.get(chunk.index))
            )
            out_records.append(failed_record(chunk))
            continue
        report.chunks.append(ChunkStatus(chunk.index, chunk.text, "analyzed", retries))
        out_records.append(resolve_record(tax, record, chunk.index, report))

    write_output(out_records, config.output_path)
    report.duration_seconds = time.monotonic() - started
    if config.report_path is not None:
        try:
            Path(config.report_path).write_text(report.dumps(), encoding="utf-8")
        except OSError as exc:
            raise OutputUnwritable(f"cannot write {config.report_path}: {exc}") from None
    return report
