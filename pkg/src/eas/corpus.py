"""Shipped Dialogue 16 corpus and its cross-file consistency checks."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

from .backend import load_fixtures
from .chunker import chunk_text, normalize_sentence
from .errors import EASError
from .parser import parse_response, render_records
from .scorer import Verdict, load_gold
from .taxonomy import Diagnostic, read_taxonomy, validate

FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures"

SEED_TAXONOMY = "seed_taxonomy.json"
DIALOGUE16_INPUT = "dialogue16.txt"
DIALOGUE16_FULL = "dialogue16_full.txt"
DIALOGUE16_RESPONSES = "dialogue16_responses.json"
DIALOGUE16_GOLD = "dialogue16_gold.json"
GOLDEN_OUTPUT = "golden_output.txt"
PUBLISHED_RAW = "published_raw.txt"

EXPECTED_RECORDS = 8
EXPECTED_FINDINGS = 25
EXPECTED_VERDICTS = {Verdict.CORRECT: 27, Verdict.PARTIAL: 3, Verdict.INCORRECT: 2}


def fixture_path(name: str) -> Path:
    return FIXTURE_DIR / name


def verify_fixture_integrity(root: str | Path = FIXTURE_DIR) -> list[Diagnostic]:
    """Check the fixture files in ``root`` against each other.

    Returns an empty list when the set is coherent.
    """
    root = Path(root)
    diags: list[Diagnostic] = []

    def err(kind: str, subject: str, message: str) -> None:
        diags.append(Diagnostic("error", kind, subject, message))

    tax = None
    try:
        tax = read_taxonomy(root / SEED_TAXONOMY)
        diags.extend(validate(tax))
    except (OSError, EASError) as exc:
        err("SeedTaxonomy", SEED_TAXONOMY, str(exc))

    chunks = []
    try:
        chunks = chunk_text((root / DIALOGUE16_INPUT).read_text(encoding="utf-8"))
    except OSError as exc:
        err("Input", DIALOGUE16_INPUT, str(exc))
    sentences = Counter(normalize_sentence(c.text) for c in chunks)

    try:
        responses = load_fixtures(root / DIALOGUE16_RESPONSES)
    except (OSError, EASError) as exc:
        err("Responses", DIALOGUE16_RESPONSES, str(exc))
        responses = {}
    else:
        keys = Counter(responses.keys())
        for s in sorted((sentences - keys).elements()):
            err("ResponseMissing", DIALOGUE16_RESPONSES, f"no response for chunk {s!r}")
        for s in sorted((keys - sentences).elements()):
            err("ResponseExtra", DIALOGUE16_RESPONSES, f"response for unknown sentence {s!r}")
        for key, raw in responses.items():
            try:
                records = parse_response(raw)
            except EASError as exc:
                err("ResponseUnparseable", DIALOGUE16_RESPONSES, f"{key!r}: {exc}")
                continue
            if [normalize_sentence(r.original_text) for r in records] != [key]:
                err("ResponseMismatch", DIALOGUE16_RESPONSES, f"{key!r}: OT lines do not echo the key")

    for name in (GOLDEN_OUTPUT, PUBLISHED_RAW):
        try:
            text = (root / name).read_text(encoding="utf-8")
            records = parse_response(text)
        except (OSError, EASError) as exc:
            err("Unparseable", name, str(exc))
            continue
        n_findings = sum(len(r.findings) for r in records)
        if len(records) != EXPECTED_RECORDS or n_findings != EXPECTED_FINDINGS:
            err(
                "RecordCount",
                name,
                f"{len(records)} records / {n_findings} findings, "
                f"expected {EXPECTED_RECORDS} / {EXPECTED_FINDINGS}",
            )
        if name == GOLDEN_OUTPUT and render_records(records) != text:
            err("RoundTrip", name, "re-rendering does not reproduce the file byte for byte")

    try:
        gold = load_gold(root / DIALOGUE16_GOLD)
    except (OSError, EASError) as exc:
        err("Gold", DIALOGUE16_GOLD, str(exc))
        return diags
    gold_sentences = Counter(g.sentence for g in gold)
    if gold_sentences != sentences:
        err("GoldSentences", DIALOGUE16_GOLD, "gold sentences differ from the chunked input")
    tally = Counter(v.verdict for g in gold for v in g.verdicts)
    if any(tally[v] != n for v, n in EXPECTED_VERDICTS.items()):
        found = ", ".join(f"{v.value}={tally[v]}" for v in Verdict)
        err("VerdictTally", DIALOGUE16_GOLD, f"verdicts tally {found}, expected 27/3/2")
    if tax is not None:
        for g in gold:
            for code in g.expected_codes:
                if tax.lookup(code) is None:
                    err("GoldCodeUnknown", DIALOGUE16_GOLD, f"{code} ({g.sentence!r}) is not in the seed")
    return diags
