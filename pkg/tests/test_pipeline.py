import json

import pytest

from eas.backend import BackendConfig, FixtureBackend, load_fixtures
from eas.chunker import Chunk, chunk_text
from eas.corpus import (
    DIALOGUE16_INPUT,
    DIALOGUE16_RESPONSES,
    PUBLISHED_RAW,
    GOLDEN_OUTPUT,
    SEED_TAXONOMY,
    fixture_path,
)
from eas.errors import AuthError, BackendFatal, InputUnreadable, OutputUnwritable, TaxonomyInvalid
from eas.parser import AnalysisRecord, parse_response
from eas.pipeline import RunConfig, analyze_document, find_missing, write_output


def run_config(tmp_path, *, input_path=None, fixtures=None, **kw):
    return RunConfig(
        taxonomy_path=fixture_path(SEED_TAXONOMY),
        input_path=input_path or fixture_path(DIALOGUE16_INPUT),
        output_path=tmp_path / "out.txt",
        backend=BackendConfig(kind="fixture", fixture_path=fixtures or fixture_path(DIALOGUE16_RESPONSES)),
        **kw,
    )


def golden():
    return fixture_path(GOLDEN_OUTPUT).read_text(encoding="utf-8")


def test_end_to_end_matches_golden(tmp_path):
    config = run_config(tmp_path, report_path=tmp_path / "report.json")
    report = analyze_document(config)
    out = (tmp_path / "out.txt").read_text(encoding="utf-8")
    assert out == golden()
    records = parse_response(out)
    assert len(records) == 8 and sum(len(r.findings) for r in records) == 25
    assert report.abandoned == []
    data = json.loads((tmp_path / "report.json").read_text())
    assert list(data) == [
        "chunk_count", "abandoned_count", "chunks", "code_status_counts",
        "suppressed", "label_drift", "unknown_codes", "duration_seconds",
    ]
    assert data["chunk_count"] == 8 and data["abandoned_count"] == 0
    assert data["code_status_counts"] == {"Known": 25, "UnknownCode": 0, "MalformedCode": 0}
    assert [s["rule"] for s in data["suppressed"]] == [2, 2, 2]


@pytest.mark.parametrize("parallelism", [1, 4])
def test_deterministic_under_parallelism(tmp_path, parallelism):
    for _ in range(2):
        analyze_document(run_config(tmp_path, parallelism=parallelism))
        assert (tmp_path / "out.txt").read_bytes() == fixture_path(GOLDEN_OUTPUT).read_bytes()


def test_empty_input(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    report = analyze_document(run_config(tmp_path, input_path=empty))
    assert report.chunks == []
    assert (tmp_path / "out.txt").read_text() == ""


def test_missing_fixture_is_abandoned_after_retries(tmp_path):
    entries = json.loads(fixture_path(DIALOGUE16_RESPONSES).read_text(encoding="utf-8"))
    dropped = entries.pop(3)
    partial = tmp_path / "partial.json"
    partial.write_text(json.dumps(entries))
    report = analyze_document(run_config(tmp_path, fixtures=partial, max_sentence_retries=2))
    (lost,) = report.abandoned
    assert lost.text == dropped["ot"] and lost.retries == 2
    assert lost.last_error.startswith("FixtureMiss")
    assert all(c.retries == 0 for c in report.chunks if c is not lost)
    records = parse_response((tmp_path / "out.txt").read_text(encoding="utf-8"))
    assert len(records) == 8
    assert records[3].analysis_failed and records[3].original_text == dropped["ot"]


class Flaky:
    """Fails each sentence's first request with garbage, then answers properly."""

    def __init__(self, responses):
        self.inner = FixtureBackend(responses)
        self.seen = set()

    def complete(self, request):
        if request.chunk_index not in self.seen:
            self.seen.add(request.chunk_index)
            result = self.inner.complete(request)
            return type(result)("this is not the response grammar", "flaky", 1)
        return self.inner.complete(request)


def test_unparseable_response_is_retried(tmp_path):
    backend = Flaky(load_fixtures(fixture_path(DIALOGUE16_RESPONSES)))
    report = analyze_document(run_config(tmp_path), backend=backend)
    assert report.abandoned == [] and all(c.retries == 1 for c in report.chunks)
    assert (tmp_path / "out.txt").read_text(encoding="utf-8") == golden()


def test_wrong_sentence_echo_is_retried(tmp_path):
    class Echo:
        def complete(self, request):
            from eas.backend import CompletionResult
            return CompletionResult("OT: Something else.\nCorrected: x.\n[No errors]", "echo")

    report = analyze_document(run_config(tmp_path, max_sentence_retries=1), backend=Echo())
    assert len(report.abandoned) == 8
    assert report.chunks[0].last_error == "response does not echo the sentence"


def test_auth_failure_is_fatal(tmp_path):
    class Denied:
        def complete(self, request):
            raise AuthError("HTTP 401")

    with pytest.raises(BackendFatal):
        analyze_document(run_config(tmp_path), backend=Denied())


def test_missing_api_key_is_fatal(tmp_path, monkeypatch):
    monkeypatch.delenv("EAS_UNSET_KEY", raising=False)
    config = RunConfig(
        taxonomy_path=fixture_path(SEED_TAXONOMY),
        input_path=fixture_path(DIALOGUE16_INPUT),
        output_path=tmp_path / "out.txt",
        backend=BackendConfig(kind="http", base_url="http://127.0.0.1:9", model="m", api_key_env="EAS_UNSET_KEY"),
    )
    with pytest.raises(BackendFatal):
        analyze_document(config)


def test_bad_paths(tmp_path):
    with pytest.raises(InputUnreadable):
        analyze_document(run_config(tmp_path, input_path=tmp_path / "nope.txt"))
    bad_tax = tmp_path / "tax.json"
    bad_tax.write_text("{}")
    config = run_config(tmp_path)
    with pytest.raises(TaxonomyInvalid):
        analyze_document(RunConfig(bad_tax, config.input_path, config.output_path, config.backend))
    with pytest.raises(OutputUnwritable):
        analyze_document(RunConfig(config.taxonomy_path, config.input_path, tmp_path / "no" / "out.txt", config.backend))


def test_unknown_code_reported(tmp_path):
    text = tmp_path / "in.txt"
    text.write_text("Me go.\n")
    fx = tmp_path / "fx.json"
    fx.write_text(json.dumps([{
        "ot": "Me go.",
        "response": "OT: Me go.\nCorrected: I go.\n1st Error & Reason: GW14A, Me, Invented pronoun category\n"
                    "2nd Error & Reason: ZZ9, go, whatever",
    }]))
    report = analyze_document(run_config(tmp_path, input_path=text, fixtures=fx))
    assert report.unknown_codes == [{"chunk": 0, "ordinal": 1, "code": "GW14A", "nearest_known": None}]
    assert report.code_status_counts == {"Known": 0, "UnknownCode": 1, "MalformedCode": 1}


def test_find_missing():
    chunks = chunk_text(fixture_path(DIALOGUE16_INPUT).read_text(encoding="utf-8"))
    records = parse_response(fixture_path(PUBLISHED_RAW).read_text(encoding="utf-8"))
    assert find_missing(chunks, records) == []
    assert find_missing(chunks, records[:7]) == [chunks[7]]
    twice = [Chunk(0, "Hi there.", None, 1, 0), Chunk(1, "Hi  there.", None, 2, 0)]
    assert find_missing(twice, [AnalysisRecord("Hi there.", "x")]) == [twice[1]]


def test_write_output(tmp_path):
    path = tmp_path / "o.txt"
    write_output([], path)
    assert path.read_text() == ""
    write_output([AnalysisRecord("Come with me.", "Come with me.", no_errors_declared=True)], path)
    assert path.read_text().splitlines() == ["OT: Come with me.", "Corrected: Come with me.", "[No errors]"]
    records = parse_response(golden())
    write_output(records, path)
    assert path.read_bytes() == fixture_path(GOLDEN_OUTPUT).read_bytes()


@pytest.mark.parametrize("kw", [{"max_sentence_retries": -1}, {"parallelism": 0}])
def test_run_config_validation(tmp_path, kw):
    with pytest.raises(ValueError):
        run_config(tmp_path, **kw)
