"""Compare predicted error codes against gold annotations and expert verdicts."""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Any

from .chunker import normalize_sentence
from .errors import DuplicateSentence, MalformedCode, MalformedGold, SentenceMismatch
from .parser import AnalysisRecord
from .taxonomy import ErrorCode, parse_code


class MatchClass(enum.Enum):
    EXACT_T3 = "ExactT3"
    T2_MATCH = "T2Match"
    T1_MATCH = "T1Match"
    OUTLIER = "Outlier"
    MISSING_GOLD = "MissingGold"
    SPURIOUS = "Spurious"


class Verdict(enum.Enum):
    CORRECT = "correct"
    PARTIAL = "partial"
    INCORRECT = "incorrect"


@dataclass(frozen=True)
class VerdictEntry:
    ordinal: int | None  # None: counted by the reviewers but tied to no finding line
    verdict: Verdict
    note: str = ""


@dataclass(frozen=True)
class GoldEntry:
    sentence: str
    expected_codes: tuple[ErrorCode, ...]
    verdicts: tuple[VerdictEntry, ...] = ()
    note: str = ""


@dataclass(frozen=True)
class AlignedPair:
    match: MatchClass
    predicted: ErrorCode | None
    gold: ErrorCode | None


def classify_match(predicted: ErrorCode, gold: ErrorCode) -> MatchClass:
    if predicted == gold:
        return MatchClass.EXACT_T3
    if predicted.tier1 != gold.tier1:
        return MatchClass.OUTLIER
    if predicted.tier2 is not None and predicted.tier2 == gold.tier2:
        return MatchClass.T2_MATCH
    return MatchClass.T1_MATCH


_TIERS = (MatchClass.EXACT_T3, MatchClass.T2_MATCH, MatchClass.T1_MATCH)


def align_findings(
    predicted: list[ErrorCode], gold: list[ErrorCode]
) -> list[AlignedPair]:
    """Pair predicted and gold codes greedily, best match class first.

    Within a class the leftmost unused predicted code takes the leftmost
    unused gold code. Codes left over become ``Spurious`` (predicted) or
    ``MissingGold`` (gold).
    """
    used_p = [False] * len(predicted)
    used_g = [False] * len(gold)
    pairs: list[AlignedPair] = []
    for tier in _TIERS:
        for i, p in enumerate(predicted):
            if used_p[i]:
                continue
            for j, g in enumerate(gold):
                if not used_g[j] and classify_match(p, g) is tier:
                    used_p[i] = used_g[j] = True
                    pairs.append(AlignedPair(tier, p, g))
                    break
    pairs.extend(
        AlignedPair(MatchClass.SPURIOUS, p, None) for i, p in enumerate(predicted) if not used_p[i]
    )
    pairs.extend(
        AlignedPair(MatchClass.MISSING_GOLD, None, g) for j, g in enumerate(gold) if not used_g[j]
    )
    return pairs


def percent(count: int, total: int) -> str:
    """One-decimal percentage, ties to even (27/32 -> 84.4, 2/32 -> 6.2)."""
    if total == 0:
        return "0.0"
    value = Decimal(count * 100) / Decimal(total)
    return str(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_EVEN))


# --- gold files -----------------------------------------------------------------


def _parse_gold_entry(n: int, raw: Any) -> GoldEntry:
    if not isinstance(raw, dict):
        raise MalformedGold(f"entry {n} is not an object")
    sentence = raw.get("sentence")
    if not isinstance(sentence, str) or not sentence.strip():
        raise MalformedGold(f"entry {n} needs a non-empty 'sentence'")
    codes_raw = raw.get("expected_codes")
    if not isinstance(codes_raw, list):
        raise MalformedGold(f"entry {n} needs an 'expected_codes' array")
    try:
        codes = tuple(parse_code(c) for c in codes_raw)
    except MalformedCode as exc:
        raise MalformedGold(f"entry {n}: {exc}") from None

    verdicts = []
    seen: set[int] = set()
    for v in raw.get("verdicts") or []:
        if not isinstance(v, dict):
            raise MalformedGold(f"entry {n}: verdicts must be objects")
        ordinal = v.get("ordinal")
        if ordinal is not None:
            if isinstance(ordinal, bool) or not isinstance(ordinal, int) or ordinal < 1:
                raise MalformedGold(f"entry {n}: bad verdict ordinal {ordinal!r}")
            if ordinal in seen:
                raise MalformedGold(f"entry {n}: verdict ordinal {ordinal} repeated")
            seen.add(ordinal)
        try:
            verdict = Verdict(v.get("verdict"))
        except ValueError:
            raise MalformedGold(f"entry {n}: unknown verdict {v.get('verdict')!r}") from None
        note = v.get("note", "")
        if not isinstance(note, str):
            raise MalformedGold(f"entry {n}: verdict note must be text")
        verdicts.append(VerdictEntry(ordinal, verdict, note))
    note = raw.get("note", "")
    if not isinstance(note, str):
        raise MalformedGold(f"entry {n}: note must be text")
    return GoldEntry(normalize_sentence(sentence), codes, tuple(verdicts), note)


def parse_gold(text: str) -> list[GoldEntry]:
    if not text.strip():
        return []
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedGold(f"gold file is not valid JSON: {exc}") from None
    if not isinstance(raw, list):
        raise MalformedGold("gold file must be a JSON array")
    entries = []
    seen: set[str] = set()
    for n, item in enumerate(raw):
        entry = _parse_gold_entry(n, item)
        if entry.sentence in seen:
            raise DuplicateSentence(f"sentence listed twice: {entry.sentence!r}")
        seen.add(entry.sentence)
        entries.append(entry)
    return entries


def load_gold(path: str | Path) -> list[GoldEntry]:
    return parse_gold(Path(path).read_text(encoding="utf-8"))


# --- scoring --------------------------------------------------------------------


@dataclass
class SentenceScore:
    sentence: str
    pairs: list[AlignedPair]


@dataclass
class ScoreReport:
    sentences: list[SentenceScore] = field(default_factory=list)
    counts: dict[MatchClass, int] = field(default_factory=lambda: {m: 0 for m in MatchClass})
    verdict_counts: dict[Verdict, int] = field(default_factory=lambda: {v: 0 for v in Verdict})
    skipped_malformed: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def verdict_total(self) -> int:
        return sum(self.verdict_counts.values())

    def class_counts(self, three_class: bool = False) -> dict[str, int]:
        c = self.counts
        if not three_class:
            return {m.value: c[m] for m in MatchClass}
        # every prediction is exact, T2, or an outlier; unmatched gold stays separate
        return {
            "Exact": c[MatchClass.EXACT_T3],
            "T2": c[MatchClass.T2_MATCH],
            "Outlier": c[MatchClass.T1_MATCH] + c[MatchClass.OUTLIER] + c[MatchClass.SPURIOUS],
            "MissingGold": c[MatchClass.MISSING_GOLD],
        }

    def to_dict(self, three_class: bool = False) -> dict[str, Any]:
        counts = self.class_counts(three_class)
        out: dict[str, Any] = {
            "sentences": len(self.sentences),
            "alignment": {
                "total": self.total,
                "counts": counts,
                "rates": {k: percent(v, self.total) for k, v in counts.items()},
            },
        }
        if self.verdict_total:
            out["verdicts"] = {
                "total": self.verdict_total,
                "counts": {v.value: self.verdict_counts[v] for v in Verdict},
                "rates": {
                    v.value: percent(self.verdict_counts[v], self.verdict_total) for v in Verdict
                },
            }
        out["per_sentence"] = [
            {
                "sentence": s.sentence,
                "pairs": [
                    {
                        "class": p.match.value,
                        "predicted": str(p.predicted) if p.predicted else None,
                        "gold": str(p.gold) if p.gold else None,
                    }
                    for p in s.pairs
                ],
            }
            for s in self.sentences
        ]
        if self.skipped_malformed:
            out["skipped_malformed_codes"] = self.skipped_malformed
        return out

    def render_text(self, three_class: bool = False) -> str:
        lines = [f"sentences: {len(self.sentences)}", f"alignment (n={self.total})"]
        for name, n in self.class_counts(three_class).items():
            lines.append(f"  {name:<12} {n:>4}  {percent(n, self.total):>5}%")
        if self.verdict_total:
            lines.append(f"verdicts (n={self.verdict_total})")
            for v in Verdict:
                n = self.verdict_counts[v]
                lines.append(f"  {v.value:<12} {n:>4}  {percent(n, self.verdict_total):>5}%")
        if self.skipped_malformed:
            lines.append(f"skipped malformed codes: {self.skipped_malformed}")
        return "\n".join(lines) + "\n"


def score_run(predictions: list[AnalysisRecord], gold: list[GoldEntry]) -> ScoreReport:
    """Align each gold sentence's codes with the prediction for that sentence.

    Suppressed findings count as predictions; they are what the model said.
    Verdict tallies come straight from the gold file.
    """
    by_sentence: dict[str, list[AnalysisRecord]] = {}
    for rec in predictions:
        by_sentence.setdefault(normalize_sentence(rec.original_text), []).append(rec)

    report = ScoreReport()
    for entry in gold:
        candidates = by_sentence.get(entry.sentence)
        if not candidates:
            raise SentenceMismatch(f"no prediction for gold sentence {entry.sentence!r}")
        rec = candidates.pop(0)
        codes = [f.code for f in rec.findings if f.code is not None]
        report.skipped_malformed += sum(1 for f in rec.findings if f.code is None)
        pairs = align_findings(codes, list(entry.expected_codes))
        for p in pairs:
            report.counts[p.match] += 1
        report.sentences.append(SentenceScore(entry.sentence, pairs))
        tally = Counter(v.verdict for v in entry.verdicts)
        for v, n in tally.items():
            report.verdict_counts[v] += n
    return report
