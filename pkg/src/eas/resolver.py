"""Code-status classification and hierarchy-rule conflict resolution."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from itertools import combinations

from .parser import SPAN_NOT_IN_OT, AnalysisRecord, CodeStatus, ErrorFinding, find_span
from .taxonomy import ErrorCode, HierarchyRule, RuleKind, Taxonomy

STOPWORDS = frozenset(
    """
    a an the and or but nor of to in on at by for with from into onto as is are was were
    be been being it its this that these those there here than then so such not no
    do does did done has have had can could will would shall should may might must
    i you he she we they me him her us them my your his our their what which who whom
    whose where when why how if s t re ve ll d
    error errors incorrect incorrectly
    """.split()
)

DEFAULT_DRIFT_THRESHOLD = 1

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def content_tokens(text: str) -> set[str]:
    return {t for t in _TOKEN_RE.findall(text.casefold()) if t not in STOPWORDS}


@dataclass(frozen=True)
class CodeStatusReport:
    finding: ErrorFinding
    status: CodeStatus
    nearest_known: ErrorCode | None = None
    label_drift: bool = False


def classify_code_status(
    tax: Taxonomy, finding: ErrorFinding, *, drift_threshold: int = DEFAULT_DRIFT_THRESHOLD
) -> CodeStatusReport:
    """Report whether a finding's code exists and whether its wording matches.

    ``label_drift`` flags a known code whose explanation shares fewer than
    ``drift_threshold`` content words with the category's name and
    description, i.e. the model has quietly renamed the category.
    """
    code = finding.code
    if code is None:
        return CodeStatusReport(finding, CodeStatus.MALFORMED_CODE)
    node = tax.lookup(code)
    if node is None:
        nearest = None
        if code.tier3 is not None:
            parent = ErrorCode(code.tier1, code.tier2)
            if tax.lookup(parent) is not None:
                nearest = parent
        return CodeStatusReport(finding, CodeStatus.UNKNOWN_CODE, nearest)
    shared = content_tokens(finding.explanation) & content_tokens(
        f"{node.name} {node.description}"
    )
    return CodeStatusReport(finding, CodeStatus.KNOWN, None, len(shared) < drift_threshold)


# --- conflict resolution ------------------------------------------------------


@dataclass(frozen=True)
class Suppression:
    finding: ErrorFinding
    winner: ErrorFinding
    rule_ordinal: int


@dataclass(frozen=True)
class ResolutionOutcome:
    kept: list[ErrorFinding]
    suppressed: list[Suppression]


def locate_span(finding: ErrorFinding, sentence: str) -> tuple[int, int]:
    """Leftmost occurrence of the span; the whole sentence when it is absent."""
    start = find_span(finding.span, sentence)
    if start < 0 or SPAN_NOT_IN_OT in finding.warnings:
        return 0, len(sentence)
    return start, start + len(finding.span)


# Specific rules beat general ones regardless of list position; list order
# only breaks ties between rules of the same kind.
_SPECIFICITY = {
    RuleKind.CODE_SUPERSEDES_CODE: 3,
    RuleKind.SPECIFIC_OVERRIDES_PARENT: 2,
    RuleKind.SYNTAX_OVERRIDES_WORD: 1,
}


def _rule_winner(rule: HierarchyRule, a: ErrorCode, b: ErrorCode) -> int | None:
    """0 if ``a`` beats ``b`` under ``rule``, 1 if ``b`` beats ``a``, else None."""
    kind = rule.kind
    if kind is RuleKind.SYNTAX_OVERRIDES_WORD:
        if a.tier1 == "GS" and b.tier1 == "GW":
            return 0
        if b.tier1 == "GS" and a.tier1 == "GW":
            return 1
    elif kind is RuleKind.SPECIFIC_OVERRIDES_PARENT:
        if a != b and b.covers(a):
            return 0
        if a != b and a.covers(b):
            return 1
    elif kind is RuleKind.CODE_SUPERSEDES_CODE:
        assert rule.winner is not None and rule.loser is not None
        if rule.winner.covers(a) and rule.loser.covers(b):
            return 0
        if rule.winner.covers(b) and rule.loser.covers(a):
            return 1
    return None


def _decide(rules: tuple[HierarchyRule, ...], a: ErrorCode, b: ErrorCode):
    best = None
    for pos, rule in enumerate(rules):
        side = _rule_winner(rule, a, b)
        if side is None:
            continue
        rank = (-_SPECIFICITY[rule.kind], pos)
        if best is None or rank < best[0]:
            best = (rank, side, rule)
    return best


def _finding_key(f: ErrorFinding, span: tuple[int, int]):
    return (span, f.code_text, f.span, f.explanation)


def _output_order(rules, findings: list[ErrorFinding]) -> list[ErrorFinding]:
    if any(r.kind is RuleKind.SPELLING_FIRST for r in rules):
        return sorted(findings, key=lambda f: (f.code is None or f.code.tier1 != "SP", f.ordinal))
    return sorted(findings, key=lambda f: f.ordinal)


def resolve_conflicts(tax: Taxonomy, record: AnalysisRecord) -> ResolutionOutcome:
    """Apply the taxonomy's hierarchy rules to findings on overlapping spans.

    Every overlapping pair is decided by its most specific applicable rule
    (code-specific, then parent/child, then syntax-over-word); the loser of
    any decided pair is suppressed. The result does not depend on the input
    order of the findings.
    """
    rules = tax.rules
    findings = record.findings
    spans = [locate_span(f, record.original_text) for f in findings]
    # loser index -> (rank, winner key, winner index, rule)
    losses: dict[int, tuple] = {}

    for i, j in combinations(range(len(findings)), 2):
        a, b = findings[i], findings[j]
        if a.code is None or b.code is None:
            continue
        (s1, e1), (s2, e2) = spans[i], spans[j]
        if not (s1 < e2 and s2 < e1):
            continue
        decision = _decide(rules, a.code, b.code)
        if decision is None:
            continue
        rank, side, rule = decision
        win, lose = (i, j) if side == 0 else (j, i)
        entry = (rank, _finding_key(findings[win], spans[win]), win, rule)
        if lose not in losses or entry[:2] < losses[lose][:2]:
            losses[lose] = entry

    kept = [f for k, f in enumerate(findings) if k not in losses]
    suppressed = [
        Suppression(findings[k], findings[losses[k][2]], losses[k][3].ordinal)
        for k in sorted(losses, key=lambda k: findings[k].ordinal)
    ]
    return ResolutionOutcome(_output_order(rules, kept), suppressed)


def apply_resolution(
    tax: Taxonomy, record: AnalysisRecord, outcome: ResolutionOutcome
) -> AnalysisRecord:
    """Return a copy of ``record`` with suppressed findings marked, not removed.

    Findings are re-ordered per the spelling-first rule and renumbered.
    """
    by_id = {id(s.finding): s.rule_ordinal for s in outcome.suppressed}
    marked = [
        replace(f, suppressed_by=by_id.get(id(f)), warnings=list(f.warnings))
        for f in record.findings
    ]
    ordered = _output_order(tax.rules, marked)
    for n, f in enumerate(ordered, start=1):
        f.ordinal = n
    return replace(record, findings=ordered)
