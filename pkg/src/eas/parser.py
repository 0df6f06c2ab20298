"""Strict parser (and renderer) for the line-oriented analysis format.

A response is a sequence of records::

    OT: <original sentence>
    Corrected: <corrected sentence>
    1st Error & Reason: <code>, <span>, <explanation>
    2nd Error & Reason: ...

or, for a clean sentence, a single ``[No errors]`` line after ``Corrected:``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

from .errors import (
    EmptyRecord,
    GarbageLine,
    MalformedCode,
    MissingCorrectedLine,
    NonConsecutiveOrdinals,
    OrdinalMismatch,
    TooFewFields,
)
from .taxonomy import ErrorCode, parse_code

NO_ERRORS = "[No errors]"
ANALYSIS_FAILED = "[ANALYSIS FAILED]"
SPAN_NOT_IN_OT = "SpanNotInOT"

_FINDING_RE = re.compile(r"([0-9]{1,2})(st|nd|rd|th) Error & Reason:(.*)")
_SUPPRESSED_RE = re.compile(r" \[suppressed by rule ([0-9]+)\]$")


class CodeStatus(enum.Enum):
    KNOWN = "Known"
    UNKNOWN_CODE = "UnknownCode"
    MALFORMED_CODE = "MalformedCode"


@dataclass
class ErrorFinding:
    ordinal: int
    code_text: str
    code: ErrorCode | None
    span: str
    explanation: str
    # MalformedCode is known at parse time; the rest is settled by the resolver
    code_status: CodeStatus | None = None
    warnings: list[str] = field(default_factory=list)
    suppressed_by: int | None = None


@dataclass
class AnalysisRecord:
    original_text: str
    corrected_text: str
    findings: list[ErrorFinding] = field(default_factory=list)
    no_errors_declared: bool = False
    analysis_failed: bool = False


def ordinal_label(n: int) -> str:
    if 10 <= n % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


def parse_finding_line(line: str, expected_ordinal: int) -> ErrorFinding:
    """Parse one ``"Nth Error & Reason: code, span, explanation"`` line.

    The span ends at the second comma; everything after it is the
    explanation. An unparseable code is kept verbatim with status
    ``MalformedCode`` instead of raising.
    """
    m = _FINDING_RE.fullmatch(line.strip())
    if m is None:
        raise GarbageLine(f"not a finding line: {line!r}")
    ordinal = int(m.group(1))
    if ordinal != expected_ordinal:
        raise OrdinalMismatch(f"expected finding {expected_ordinal}, got {ordinal}")

    parts = m.group(3).split(",", 2)
    if len(parts) < 3:
        raise TooFewFields(f"finding {ordinal} needs code, span and explanation: {line!r}")
    code_text, span, explanation = (p.strip() for p in parts)
    suppressed_by = None
    sm = _SUPPRESSED_RE.search(explanation)
    if sm:
        suppressed_by = int(sm.group(1))
        explanation = explanation[: sm.start()]
    if not span or not explanation:
        raise TooFewFields(f"finding {ordinal} has an empty span or explanation")

    try:
        code = parse_code(code_text)
        status = None
    except MalformedCode:
        code = None
        status = CodeStatus.MALFORMED_CODE
    return ErrorFinding(
        ordinal, code_text, code, span, explanation, status, suppressed_by=suppressed_by
    )


def find_span(span: str, sentence: str) -> int:
    """Leftmost index of ``span`` in ``sentence``, ignoring case as a fallback."""
    if not span:
        return -1
    at = sentence.find(span)
    if at < 0 and len(sentence.lower()) == len(sentence):
        at = sentence.lower().find(span.lower())
    return at


def _payload(line: str, prefix: str) -> str | None:
    if line.startswith(prefix):
        return line[len(prefix) :].strip()
    return None


def parse_response(raw: str) -> list[AnalysisRecord]:
    """Parse a raw response block into records, in order.

    Anything before the first ``OT:`` line (reasoning preambles and the like)
    is discarded. Blank lines are ignored everywhere.
    """
    lines = [ln.strip() for ln in raw.replace("\r\n", "\n").split("\n")]
    start = next((i for i, ln in enumerate(lines) if ln.startswith("OT:")), len(lines))

    records: list[AnalysisRecord] = []
    current: AnalysisRecord | None = None
    awaiting_corrected = False

    def close(line_no: int) -> None:
        if current is None:
            return
        if awaiting_corrected:
            raise MissingCorrectedLine("record has no Corrected: line", line_no)
        if not (current.findings or current.no_errors_declared or current.analysis_failed):
            raise EmptyRecord(
                f"record {current.original_text!r} has neither findings nor {NO_ERRORS}",
                line_no,
            )

    for i in range(start, len(lines)):
        line = lines[i]
        line_no = i + 1
        if not line:
            continue

        ot = _payload(line, "OT:")
        if ot is not None:
            close(line_no)
            if not ot:
                raise EmptyRecord("OT: line has no text", line_no)
            current = AnalysisRecord(ot, "")
            records.append(current)
            awaiting_corrected = True
            continue

        assert current is not None
        corrected = _payload(line, "Corrected:")
        if awaiting_corrected:
            if corrected is None:
                raise MissingCorrectedLine(f"expected Corrected:, got {line!r}", line_no)
            if not corrected:
                raise MissingCorrectedLine("Corrected: line has no text", line_no)
            current.corrected_text = corrected
            current.analysis_failed = corrected == ANALYSIS_FAILED
            awaiting_corrected = False
            continue
        if corrected is not None:
            raise GarbageLine("second Corrected: line in one record", line_no)

        if line == NO_ERRORS:
            if current.findings or current.no_errors_declared or current.analysis_failed:
                raise GarbageLine(f"unexpected {NO_ERRORS}", line_no)
            current.no_errors_declared = True
            continue

        if _FINDING_RE.fullmatch(line):
            if current.no_errors_declared or current.analysis_failed:
                raise GarbageLine("finding after a record closed to findings", line_no)
            try:
                finding = parse_finding_line(line, len(current.findings) + 1)
            except OrdinalMismatch as exc:
                raise NonConsecutiveOrdinals(str(exc), line_no) from None
            except TooFewFields as exc:
                raise TooFewFields(str(exc), line_no) from None
            if find_span(finding.span, current.original_text) < 0:
                finding.warnings.append(SPAN_NOT_IN_OT)
            current.findings.append(finding)
            continue

        raise GarbageLine(f"unrecognized line {line!r}", line_no)

    close(len(lines))
    return records


def render_finding(finding: ErrorFinding, *, annotate: bool = True) -> str:
    line = (
        f"{ordinal_label(finding.ordinal)} Error & Reason: "
        f"{finding.code_text}, {finding.span}, {finding.explanation}"
    )
    if annotate and finding.suppressed_by is not None:
        line += f" [suppressed by rule {finding.suppressed_by}]"
    return line


def render_record(record: AnalysisRecord) -> list[str]:
    lines = [f"OT: {record.original_text}", f"Corrected: {record.corrected_text}"]
    if record.analysis_failed:
        return lines
    if not record.findings:
        lines.append(NO_ERRORS)
    lines.extend(render_finding(f) for f in record.findings)
    return lines


def render_records(records: list[AnalysisRecord]) -> str:
    """Render records in the response grammar, one blank line between records."""
    if not records:
        return ""
    return "\n\n".join("\n".join(render_record(r)) for r in records) + "\n"
