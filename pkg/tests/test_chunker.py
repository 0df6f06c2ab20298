import re

from hypothesis import given
from hypothesis import strategies as st

from eas.chunker import chunk_text, normalize_sentence
from eas.corpus import DIALOGUE16_FULL, DIALOGUE16_INPUT, PUBLISHED_RAW, fixture_path
from eas.parser import parse_response


def read(name):
    return fixture_path(name).read_text(encoding="utf-8")


def test_first_chunk_is_title():
    first = chunk_text(read(DIALOGUE16_FULL))[0]
    assert (first.index, first.speaker, first.text) == (0, "Title", "For to see the town.")
    assert first.source_line == 1


def test_speaker_turn_splits_into_sentences():
    texts = [c.text for c in chunk_text(read(DIALOGUE16_INPUT)) if c.speaker == "C"]
    assert texts[:2] == [
        "Come with me, if you please.",
        "I shall not folget nothing what can to merit your attention.",
    ]


def test_semicolon_does_not_split():
    chunks = chunk_text("Here we are near to cathedral; will you come in there?")
    assert [c.text for c in chunks] == ["Here we are near to cathedral; will you come in there?"]


def test_empty_document():
    assert chunk_text("") == []
    assert chunk_text("\n\n  \n") == []


def test_matches_published_ot_lines():
    records = parse_response(read(PUBLISHED_RAW))
    chunks = chunk_text(read(DIALOGUE16_INPUT))
    assert [normalize_sentence(c.text) for c in chunks] == [
        normalize_sentence(r.original_text) for r in records
    ]


def test_boundary_completeness_on_transcript():
    inner = re.compile(r"[.?!]\s+[A-Z]")
    chunks = chunk_text(read(DIALOGUE16_FULL))
    assert chunks
    for c in chunks:
        assert not inner.search(c.text), c.text


def test_indices_offsets_and_reconstruction():
    doc = read(DIALOGUE16_FULL)
    lines = doc.split("\n")
    chunks = chunk_text(doc)
    assert [c.index for c in chunks] == list(range(len(chunks)))
    by_line = {}
    for c in chunks:
        line = lines[c.source_line - 1]
        assert line[c.source_offset : c.source_offset + len(c.text)] == c.text
        assert c.text == c.text.strip() and c.text
        by_line.setdefault(c.source_line, []).append(c)
    # the gaps between a line's chunks hold only whitespace (and the label before the first)
    for n, group in by_line.items():
        line = lines[n - 1]
        end = group[0].source_offset + len(group[0].text)
        for c in group[1:]:
            assert line[end : c.source_offset].strip() == ""
            end = c.source_offset + len(c.text)
        assert line[group[-1].source_offset + len(group[-1].text) :].strip() == ""


def test_abbreviations_ellipses_and_lowercase_question():
    text = "Dr. Smith came. He said... nothing. Really? yes he did! Then e.g. this."
    assert [c.text for c in chunk_text(text)] == [
        "Dr. Smith came.",
        "He said... nothing.",
        "Really? yes he did!",
        "Then e.g. this.",
    ]


def test_crlf_and_labels():
    chunks = chunk_text("A: One. Two!\r\nB: Three?\r\n")
    assert [(c.speaker, c.text, c.source_line) for c in chunks] == [
        ("A", "One.", 1),
        ("A", "Two!", 1),
        ("B", "Three?", 2),
    ]


def test_unlabelled_line_has_no_speaker():
    (c,) = chunk_text("Note: this is text.")
    assert c.speaker is None and c.text == "Note: this is text."


def test_deterministic():
    doc = read(DIALOGUE16_FULL)
    assert chunk_text(doc) == chunk_text(doc)


def test_normalize_examples():
    assert normalize_sentence("For  to see\tthe town.") == "For to see the town."
    assert normalize_sentence("For to see the town.") == "For to see the town."
    assert normalize_sentence("  ") == ""


@given(st.text())
def test_normalize_idempotent(s):
    once = normalize_sentence(s)
    assert normalize_sentence(once) == once


@given(st.text(alphabet=st.sampled_from("ab .?!;:\n\tAB"), max_size=60))
def test_chunks_are_trimmed_and_nonempty(doc):
    for c in chunk_text(doc):
        assert c.text and c.text == c.text.strip()
