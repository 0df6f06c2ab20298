"""Two-part prompt construction: taxonomy-bearing system message plus per-sentence user message."""

from __future__ import annotations

from dataclasses import dataclass

from .chunker import Chunk
from .taxonomy import Taxonomy

TEMPLATE_VERSION = "1"

SYSTEM_TEMPLATE = """\
You are a strict error correction tool for English writing.
Identify every spelling, grammar and punctuation error in the text you are given, \
correct it, and classify each error with exactly one code from the error taxonomy below.
Use only codes that appear in the taxonomy. Do not invent codes or rename categories.
Follow the hierarchy rules in the taxonomy metadata when an error could take more than one code.

ERROR TAXONOMY (JSON):
{codes_text}
"""

FORMAT_EXAMPLE = """\
OT: She go to school yesterday.
Corrected: She went to school yesterday.
1st Error & Reason: GS3, go, Present-tense verb where 'yesterday' requires the past tense"""

USER_TEMPLATE = """\
Analyze the following text.

TEXT:
{text}

Respond in exactly this format and nothing else:
OT: <the original text, copied exactly>
Corrected: <the fully corrected text>
1st Error & Reason: <code>, <the erroneous words>, <brief explanation>
2nd Error & Reason: <code>, <the erroneous words>, <brief explanation>
(continue with 3rd, 4th, ... for every further error)

If the text contains no errors, write the line {no_errors} directly after the \
Corrected: line instead of any Error & Reason lines.

Example:
{example}
"""


@dataclass(frozen=True)
class PromptPair:
    system_text: str
    user_text: str
    temperature: float = 0.0
    model_hint: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError(f"temperature must be within [0, 1], got {self.temperature}")


def build_system_prompt(tax: Taxonomy, codes_text: str | None = None) -> str:
    """System message embedding the serialized taxonomy once.

    Pass ``codes_text`` to reuse a serialization computed earlier.
    """
    if codes_text is None:
        codes_text = tax.dumps()
    return SYSTEM_TEMPLATE.format(codes_text=codes_text)


def build_user_prompt(chunk: Chunk) -> str:
    if not chunk.text.strip():
        raise ValueError("cannot build a prompt for an empty chunk")
    return USER_TEMPLATE.format(text=chunk.text, no_errors="[No errors]", example=FORMAT_EXAMPLE)


class PromptBuilder:
    """Serializes the taxonomy once and reuses it for every chunk of a run."""

    def __init__(self, tax: Taxonomy, *, temperature: float = 0.0, model_hint: str | None = None):
        self.codes_text = tax.dumps()
        self.system_text = build_system_prompt(tax, self.codes_text)
        self.temperature = temperature
        self.model_hint = model_hint

    def build(self, chunk: Chunk) -> PromptPair:
        return PromptPair(
            self.system_text, build_user_prompt(chunk), self.temperature, self.model_hint
        )
