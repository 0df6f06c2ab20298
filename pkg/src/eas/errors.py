"""Exception hierarchy shared across the analysis pipeline."""

from __future__ import annotations


class EASError(Exception):
    """Base class for every domain error raised by this package."""


# taxonomy


class MalformedCode(EASError, ValueError):
    pass


class TaxonomyError(EASError):
    pass


class ParseError(TaxonomyError):
    """Structured input could not be decoded at all."""


class SchemaError(TaxonomyError):
    pass


class DuplicateCode(TaxonomyError):
    pass


class DanglingRuleReference(TaxonomyError):
    pass


class UnknownCode(EASError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


# response parsing


class ResponseParseError(EASError):
    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class MissingCorrectedLine(ResponseParseError):
    pass


class NonConsecutiveOrdinals(ResponseParseError):
    pass


class EmptyRecord(ResponseParseError):
    pass


class GarbageLine(ResponseParseError):
    pass


class OrdinalMismatch(ResponseParseError):
    pass


class TooFewFields(ResponseParseError):
    pass


# backend


class BackendError(EASError):
    pass


class AuthError(BackendError):
    pass


class MissingApiKey(BackendError):
    pass


class TransientExhausted(BackendError):
    pass


class FixtureMiss(BackendError):
    pass


class DuplicateFixtureKey(BackendError):
    pass


class FixtureParseError(BackendError):
    pass


# pipeline


class PipelineError(EASError):
    pass


class TaxonomyInvalid(PipelineError):
    pass


class InputUnreadable(PipelineError):
    pass


class BackendFatal(PipelineError):
    pass


class OutputUnwritable(PipelineError):
    pass


# scoring


class ScoringError(EASError):
    pass


class MalformedGold(ScoringError):
    pass


class DuplicateSentence(ScoringError):
    pass


class SentenceMismatch(ScoringError):
    pass
