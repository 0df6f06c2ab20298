"""Command-line entry point: ``eas validate|chunk|analyze|score``.

Exit status is 0 on success, 1 on domain failures (diagnostics, abandoned
chunks, scoring mismatches) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .backend import DEFAULT_API_KEY_ENV, BackendConfig
from .chunker import chunk_text
from .errors import EASError
from .parser import parse_response
from .pipeline import RunConfig, analyze_document
from .scorer import load_gold, score_run
from .taxonomy import read_taxonomy, validate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eas", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a taxonomy file")
    p.add_argument("taxonomy")

    p = sub.add_parser("chunk", help="print the sentence chunks of a text file")
    p.add_argument("input")

    p = sub.add_parser("analyze", help="run the analysis pipeline")
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--backend", required=True, choices=["http", "fixture"])
    p.add_argument("--fixtures", help="fixture response file (fixture backend)")
    p.add_argument("--base-url", help="chat-completion endpoint (http backend)")
    p.add_argument("--model", help="model identifier (http backend)")
    p.add_argument(
        "--api-key-env",
        default=DEFAULT_API_KEY_ENV,
        help=f"name of the environment variable holding the API key (default {DEFAULT_API_KEY_ENV})",
    )
    p.add_argument("--max-retries", type=int, default=3, help="re-sends per missing sentence")
    p.add_argument("--max-attempts", type=int, default=3, help="HTTP attempts per request")
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--timeout", type=float, default=60.0, help="HTTP request timeout, seconds")
    p.add_argument(
        "--temperature",
        type=float,
        default=0.0,
        help="sampling temperature; 0.0 keeps responses deterministic (the published setting)",
    )
    p.add_argument("--report", help="write a JSON run report here")

    p = sub.add_parser("score", help="score predictions against a gold file")
    p.add_argument("--pred", required=True, help="analysis output file")
    p.add_argument("--gold", required=True)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument(
        "--three-class",
        action="store_true",
        help="report exact / T2 / outlier only (T1 matches count as outliers)",
    )
    return parser


def _validate(args) -> int:
    try:
        tax = read_taxonomy(args.taxonomy)
    except (OSError, EASError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    diags = validate(tax)
    for d in diags:
        print(d)
    return 1 if diags else 0


def _chunk(args) -> int:
    try:
        text = Path(args.input).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for c in chunk_text(text):
        print(f"{c.index}\t{c.speaker or '-'}\t{c.text}")
    return 0


def _analyze(args, parser: argparse.ArgumentParser) -> int:
    try:
        backend = BackendConfig(
            kind=args.backend,
            base_url=args.base_url,
            model=args.model,
            api_key_env=args.api_key_env,
            max_attempts=args.max_attempts,
            fixture_path=args.fixtures,
        )
        config = RunConfig(
            taxonomy_path=args.taxonomy,
            input_path=args.input,
            output_path=args.out,
            report_path=args.report,
            backend=backend,
            max_sentence_retries=args.max_retries,
            parallelism=args.parallelism,
            temperature=args.temperature,
            request_timeout=args.timeout,
        )
    except ValueError as exc:
        parser.error(str(exc))
    try:
        report = analyze_document(config)
    except EASError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    abandoned = len(report.abandoned)
    print(
        f"analyzed {len(report.chunks) - abandoned} of {len(report.chunks)} chunks; "
        f"{abandoned} abandoned; {len(report.suppressed)} suppressed; "
        f"{len(report.label_drift)} label drift; {len(report.unknown_codes)} unknown codes"
    )
    return 1 if abandoned else 0


def _score(args) -> int:
    try:
        predictions = parse_response(Path(args.pred).read_text(encoding="utf-8"))
        gold = load_gold(args.gold)
        report = score_run(predictions, gold)
    except (OSError, EASError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.format == "json":
        print(json.dumps(report.to_dict(args.three_class), indent=2, ensure_ascii=False))
    else:
        sys.stdout.write(report.render_text(args.three_class))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        if args.command == "validate":
            return _validate(args)
        if args.command == "chunk":
            return _chunk(args)
        if args.command == "analyze":
            return _analyze(args, parser)
        return _score(args)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
