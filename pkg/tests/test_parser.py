import pytest

from eas.corpus import DIALOGUE16_RESPONSES, PUBLISHED_RAW, GOLDEN_OUTPUT, fixture_path
from eas.backend import load_fixtures
from eas.errors import (
    EmptyRecord,
    GarbageLine,
    MissingCorrectedLine,
    NonConsecutiveOrdinals,
    OrdinalMismatch,
    TooFewFields,
)
from eas.parser import (
    SPAN_NOT_IN_OT,
    CodeStatus,
    ordinal_label,
    parse_finding_line,
    parse_response,
    render_finding,
    render_records,
)


def published():
    return fixture_path(PUBLISHED_RAW).read_text(encoding="utf-8")


def test_published_output_shape():
    records = parse_response(published())
    assert len(records) == 8
    assert sum(len(r.findings) for r in records) == 25
    first = records[0]
    assert first.original_text == "For to see the town."
    assert first.corrected_text == "To see the town."
    assert [str(f.code) for f in first.findings] == ["GW12A", "GS1D"]
    fourth = records[3]
    assert fourth.original_text == "Come with me, if you please."
    assert fourth.no_errors_declared and fourth.findings == []
    assert len(records[6].findings) == 6


def test_published_record_invariants():
    for r in parse_response(published()):
        assert r.no_errors_declared == (not r.findings)
        assert r.original_text and r.corrected_text
        assert [f.ordinal for f in r.findings] == list(range(1, len(r.findings) + 1))


def test_finding_lines_round_trip():
    lines = [ln.strip() for ln in published().splitlines() if "Error & Reason:" in ln]
    rendered = [render_finding(f) for r in parse_response(published()) for f in r.findings]
    assert rendered == lines


def test_every_fixture_response_parses():
    for key, raw in load_fixtures(fixture_path(DIALOGUE16_RESPONSES)).items():
        (record,) = parse_response(raw)
        assert record.original_text == key


def test_golden_output_round_trips():
    text = fixture_path(GOLDEN_OUTPUT).read_text(encoding="utf-8")
    records = parse_response(text)
    assert render_records(records) == text
    suppressed = [(f.code_text, f.suppressed_by) for r in records for f in r.findings if f.suppressed_by]
    assert suppressed == [("GW12A", 2), ("GW6A", 2), ("GW6A", 2)]


def test_minimal_records():
    (r,) = parse_response("OT: x.\nCorrected: x.\n[No errors]\n")
    assert r.no_errors_declared and r.findings == []
    with pytest.raises(MissingCorrectedLine):
        parse_response("OT: x.\n1st Error & Reason: SP1A, x, bad\n")
    assert parse_response("") == []


def test_preamble_and_blank_lines_ignored():
    raw = "Let me think about this.\nSure!\n\nOT: x.\n\nCorrected: y.\n\n1st Error & Reason: SP1A, x, bad spelling\n"
    (r,) = parse_response(raw)
    assert r.corrected_text == "y." and len(r.findings) == 1


@pytest.mark.parametrize(
    "raw, exc",
    [
        ("OT: x.\nCorrected: x.\n", EmptyRecord),
        ("OT:\nCorrected: x.\n[No errors]", EmptyRecord),
        ("OT: x.\nCorrected: x.\n1st Error & Reason: SP1A, x, a\n3rd Error & Reason: SP1A, x, b", NonConsecutiveOrdinals),
        ("OT: x.\nCorrected: x.\n2nd Error & Reason: SP1A, x, a", NonConsecutiveOrdinals),
        ("OT: x.\nCorrected: x.\nwhat is this", GarbageLine),
        ("OT: x.\nCorrected: x.\n[No errors]\n1st Error & Reason: SP1A, x, a", GarbageLine),
        ("OT: x.\nCorrected: x.\nCorrected: x.\n[No errors]", GarbageLine),
        ("OT: x.\nCorrected: x.\n1st Error & Reason: SP1A, x", TooFewFields),
    ],
)
def test_grammar_errors(raw, exc):
    with pytest.raises(exc):
        parse_response(raw)


def test_error_carries_line_number():
    with pytest.raises(GarbageLine) as info:
        parse_response("OT: x.\nCorrected: x.\n\nnonsense")
    assert info.value.line_no == 4


def test_parse_finding_line_examples():
    f = parse_finding_line(
        "1st Error & Reason: GW6A, won't, Confused word choice between 'won't' (will not) and 'want'", 1
    )
    assert (f.ordinal, str(f.code), f.span) == (1, "GW6A", "won't")
    assert f.explanation == "Confused word choice between 'won't' (will not) and 'want'"
    f = parse_finding_line("3rd Error & Reason: GW1D, there, Unnecessary demonstrative reference", 3)
    assert (f.ordinal, str(f.code), f.span) == (3, "GW1D", "there")
    f = parse_finding_line("1st Error & Reason: BADCODE, x, y", 1)
    assert f.code is None and f.code_status is CodeStatus.MALFORMED_CODE and f.code_text == "BADCODE"


def test_explanation_keeps_later_commas():
    f = parse_finding_line("1st Error & Reason: GS3, go, wrong tense, should be past, not present", 1)
    assert f.span == "go" and f.explanation == "wrong tense, should be past, not present"


def test_parse_finding_line_errors():
    with pytest.raises(OrdinalMismatch):
        parse_finding_line("2nd Error & Reason: GS3, go, x", 1)
    with pytest.raises(TooFewFields):
        parse_finding_line("1st Error & Reason: GS3 go x", 1)
    with pytest.raises(GarbageLine):
        parse_finding_line("Error: GS3, go, x", 1)


def test_span_not_in_ot_warning():
    (r,) = parse_response("OT: I go home.\nCorrected: I went home.\n1st Error & Reason: GS3, goes, wrong tense")
    assert r.findings[0].warnings == [SPAN_NOT_IN_OT]
    (r,) = parse_response("OT: For to see.\nCorrected: To see.\n1st Error & Reason: GW12A, for to see, odd")
    assert r.findings[0].warnings == []


def test_suppression_annotation_round_trips():
    line = "2nd Error & Reason: GW3E, architecture's, possessive misuse [suppressed by rule 4]"
    f = parse_finding_line(line, 2)
    assert f.suppressed_by == 4 and f.explanation == "possessive misuse"
    assert render_finding(f) == line
    assert render_finding(f, annotate=False) == line.replace(" [suppressed by rule 4]", "")


def test_analysis_failed_record():
    (r,) = parse_response("OT: x.\nCorrected: [ANALYSIS FAILED]\n")
    assert r.analysis_failed and not r.findings
    assert render_records([r]) == "OT: x.\nCorrected: [ANALYSIS FAILED]\n"


@pytest.mark.parametrize(
    "n, label", [(1, "1st"), (2, "2nd"), (3, "3rd"), (4, "4th"), (11, "11th"), (12, "12th"), (13, "13th"), (21, "21st"), (22, "22nd")]
)
def test_ordinal_labels(n, label):
    assert ordinal_label(n) == label


def test_long_record_ordinals():
    lines = ["OT: x.", "Corrected: x."]
    lines += [f"{ordinal_label(n)} Error & Reason: SP1A, x, bad {n}" for n in range(1, 24)]
    (r,) = parse_response("\n".join(lines))
    assert len(r.findings) == 23
