"""Three-tier error taxonomy: codes, tree nodes, metadata and hierarchy rules.

A taxonomy document is JSON shaped like::

    {"taxonomy": {
        "metadata": {"version": ..., "focus": ..., "revision_date": ...,
                     "hierarchy_rules": [...], "exclusion_criteria": {...}},
        "error categories": {
            "GW": {"GW1": {"name": ..., "description": ...,
                           "subcategories": {"GW1A": {"name": ..., "description": ...,
                                                      "example": ...}}}}}}}

Tier-1 categories carry no fields of their own in the file; their display
names are fixed (see ``TIER1_NAMES``).
"""

from __future__ import annotations

import enum
import json
import re
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import (
    DanglingRuleReference,
    DuplicateCode,
    MalformedCode,
    ParseError,
    SchemaError,
    UnknownCode,
)

TIER1_CODES = ("GW", "GS", "SP")
TIER1_NAMES = {
    "GW": "Grammar Words",
    "GS": "Grammar Sentences",
    "SP": "Spelling",
}

_CODE_RE = re.compile(r"(GW|GS|SP)(?:([0-9]+)([A-Z])?)?")


@dataclass(frozen=True, order=True)
class ErrorCode:
    """Structured error code such as ``GW1A``.

    ``tier2`` is ``None`` only for the three tier-1 roots; codes read from
    model output always carry a tier-2 index.
    """

    tier1: str
    tier2: int | None = None
    tier3: str | None = None

    def __post_init__(self) -> None:
        if self.tier1 not in TIER1_CODES:
            raise MalformedCode(f"unknown tier-1 prefix {self.tier1!r}")
        if self.tier2 is None:
            if self.tier3 is not None:
                raise MalformedCode("tier-3 letter requires a tier-2 index")
        elif isinstance(self.tier2, bool) or not isinstance(self.tier2, int) or self.tier2 < 1:
            raise MalformedCode(f"tier-2 index must be a positive integer, got {self.tier2!r}")
        if self.tier3 is not None and not (
            len(self.tier3) == 1 and "A" <= self.tier3 <= "Z"
        ):
            raise MalformedCode(f"tier-3 must be one uppercase letter, got {self.tier3!r}")

    @property
    def depth(self) -> int:
        if self.tier2 is None:
            return 1
        return 2 if self.tier3 is None else 3

    @property
    def parent(self) -> ErrorCode | None:
        if self.tier3 is not None:
            return ErrorCode(self.tier1, self.tier2)
        if self.tier2 is not None:
            return ErrorCode(self.tier1)
        return None

    def covers(self, other: ErrorCode) -> bool:
        """True when ``other`` is this code or one of its descendants."""
        if self.tier1 != other.tier1:
            return False
        if self.tier2 is None:
            return True
        if self.tier2 != other.tier2:
            return False
        return self.tier3 is None or self.tier3 == other.tier3

    def render(self) -> str:
        text = self.tier1
        if self.tier2 is not None:
            text += str(self.tier2)
        if self.tier3 is not None:
            text += self.tier3
        return text

    def __str__(self) -> str:
        return self.render()


def parse_code(text: str, *, allow_tier1: bool = False) -> ErrorCode:
    """Parse ``(GW|GS|SP) digits [A-Z]`` into an :class:`ErrorCode`.

    Bare tier-1 prefixes are rejected unless ``allow_tier1`` is set.
    """
    if not isinstance(text, str):
        raise MalformedCode(f"code must be text, got {type(text).__name__}")
    m = _CODE_RE.fullmatch(text)
    if m is None:
        raise MalformedCode(f"malformed error code {text!r}")
    tier1, digits, letter = m.groups()
    if digits is None:
        if not allow_tier1:
            raise MalformedCode(f"error code {text!r} lacks a tier-2 index")
        return ErrorCode(tier1)
    if digits.startswith("0"):
        # keeps render(parse(s)) == s
        raise MalformedCode(f"tier-2 index in {text!r} has a leading zero")
    return ErrorCode(tier1, int(digits), letter)


class RuleKind(enum.Enum):
    SPELLING_FIRST = "SpellingFirst"
    SYNTAX_OVERRIDES_WORD = "SyntaxOverridesWord"
    SPECIFIC_OVERRIDES_PARENT = "SpecificOverridesParent"
    CODE_SUPERSEDES_CODE = "CodeSupersedesCode"
    UNRECOGNIZED = "Unrecognized"


@dataclass(frozen=True)
class HierarchyRule:
    ordinal: int
    raw_text: str
    kind: RuleKind
    winner: ErrorCode | None = None
    loser: ErrorCode | None = None


_RULE_ORDINAL_RE = re.compile(r"\s*(\d+)\.\s*(.*)", re.DOTALL)
_SPECIFIC_CODE = r"\(((?:GW|GS|SP)[0-9]+[A-Z]?)\)"
_CODE_SUPERSEDES_RE = re.compile(
    _SPECIFIC_CODE
    + r"[^()]*?\b(?:supersedes?|overrides?|takes? precedence over)\b[^()]*?"
    + _SPECIFIC_CODE
)
_SYNTAX_OVER_WORD_RE = re.compile(r"\(GS\).*\b(?:overrides?|supersedes?)\b.*\(GW\)")
_SPECIFIC_OVER_PARENT_RE = re.compile(
    r"\bspecific\b.*\b(?:overrides?|supersedes?)\b.*\bparent", re.IGNORECASE
)
# The published rule reads "Process spelling (GM) first"; only the wording matters.
_SPELLING_FIRST_RE = re.compile(r"\bspelling\b.*\bfirst\b", re.IGNORECASE)


def parse_rule(raw_text: str, position: int) -> HierarchyRule:
    """Recognize a hierarchy-rule sentence.

    ``position`` is the 1-based list position, used as the ordinal when the
    sentence has no ``"N."`` prefix.
    """
    m = _RULE_ORDINAL_RE.fullmatch(raw_text)
    ordinal = int(m.group(1)) if m else position
    body = m.group(2) if m else raw_text

    cm = _CODE_SUPERSEDES_RE.search(body)
    if cm:
        return HierarchyRule(
            ordinal,
            raw_text,
            RuleKind.CODE_SUPERSEDES_CODE,
            winner=parse_code(cm.group(1)),
            loser=parse_code(cm.group(2)),
        )
    if _SYNTAX_OVER_WORD_RE.search(body):
        return HierarchyRule(ordinal, raw_text, RuleKind.SYNTAX_OVERRIDES_WORD)
    if _SPECIFIC_OVER_PARENT_RE.search(body):
        return HierarchyRule(ordinal, raw_text, RuleKind.SPECIFIC_OVERRIDES_PARENT)
    if _SPELLING_FIRST_RE.search(body):
        return HierarchyRule(ordinal, raw_text, RuleKind.SPELLING_FIRST)
    return HierarchyRule(ordinal, raw_text, RuleKind.UNRECOGNIZED)


@dataclass(frozen=True)
class TaxonomyNode:
    code: ErrorCode
    name: str
    description: str
    example: str | None = None
    children: tuple[TaxonomyNode, ...] = ()
    reconstructed: bool = False
    # unknown keys from the file, kept for round-tripping
    extra: dict[str, Any] = field(default_factory=dict)

    def walk(self) -> Iterator[TaxonomyNode]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class TaxonomyMetadata:
    version: str = ""
    focus: str = ""
    revision_date: str = ""  # opaque; the published sample holds "284-01-2025"
    hierarchy_rules: tuple[HierarchyRule, ...] = ()
    exclusion_criteria: dict[str, str] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    kind: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.kind}: {self.subject}: {self.message}"


@dataclass(frozen=True)
class Taxonomy:
    metadata: TaxonomyMetadata
    roots: tuple[TaxonomyNode, ...]
    index: dict[str, TaxonomyNode] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        index: dict[str, TaxonomyNode] = {}
        for root in self.roots:
            for node in root.walk():
                index.setdefault(node.code.render(), node)
        object.__setattr__(self, "index", index)

    def nodes(self) -> Iterator[TaxonomyNode]:
        for root in self.roots:
            yield from root.walk()

    def lookup(self, code: ErrorCode) -> TaxonomyNode | None:
        return self.index.get(code.render())

    def ancestors(self, code: ErrorCode) -> list[ErrorCode]:
        """Codes from the immediate parent up to the tier-1 root."""
        if code.render() not in self.index:
            raise UnknownCode(f"{code} is not defined in the taxonomy")
        out = []
        parent = code.parent
        while parent is not None:
            out.append(parent)
            parent = parent.parent
        return out

    @property
    def rules(self) -> tuple[HierarchyRule, ...]:
        return self.metadata.hierarchy_rules

    def to_dict(self) -> dict[str, Any]:
        meta = self.metadata
        metadata: dict[str, Any] = {
            "version": meta.version,
            "focus": meta.focus,
            "revision_date": meta.revision_date,
            "hierarchy_rules": [r.raw_text for r in meta.hierarchy_rules],
            "exclusion_criteria": dict(meta.exclusion_criteria),
        }
        metadata.update(meta.extra)
        categories: dict[str, Any] = {}
        for root in self.roots:
            categories[root.code.render()] = {
                child.code.render(): _node_to_dict(child) for child in root.children
            }
        return {"taxonomy": {"metadata": metadata, "error categories": categories}}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)


def _node_to_dict(node: TaxonomyNode) -> dict[str, Any]:
    out: dict[str, Any] = {"name": node.name, "description": node.description}
    if node.code.depth == 3:
        out["example"] = node.example
    if node.reconstructed:
        out["reconstructed"] = True
    out.update(node.extra)
    if node.code.depth == 2:
        out["subcategories"] = {c.code.render(): _node_to_dict(c) for c in node.children}
    return out


# --- loading -----------------------------------------------------------------


class _DuplicateKey(Exception):
    def __init__(self, key: str):
        self.key = key


def _reject_duplicate_keys(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in pairs:
        if key in out:
            raise _DuplicateKey(key)
        out[key] = value
    return out


def _require_object(value: Any, where: str) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise SchemaError(f"{where} must be an object")
    return value


def _require_text(obj: dict[str, Any], key: str, where: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value.strip():
        raise SchemaError(f"{where} is missing a non-empty {key!r}")
    return value


def _optional_text(obj: dict[str, Any], key: str, where: str) -> str:
    value = obj.get(key, "")
    if not isinstance(value, str):
        raise SchemaError(f"{where}: {key!r} must be text")
    return value


def _child_code(key: str, parent: ErrorCode, where: str) -> ErrorCode:
    try:
        code = parse_code(key)
    except MalformedCode as exc:
        raise SchemaError(f"{where}: {exc}") from None
    if code.parent != parent:
        raise SchemaError(f"{where}: {key} does not extend its parent {parent}")
    return code


_NODE_KEYS = {"name", "description", "example", "reconstructed", "subcategories"}


def _load_node(key: str, raw: Any, parent: ErrorCode) -> TaxonomyNode:
    code = _child_code(key, parent, f"category {key}")
    obj = _require_object(raw, f"category {key}")
    where = f"category {key}"
    name = _require_text(obj, "name", where)
    description = _require_text(obj, "description", where)
    reconstructed = obj.get("reconstructed", False)
    if not isinstance(reconstructed, bool):
        raise SchemaError(f"{where}: 'reconstructed' must be a boolean")
    extra = {k: v for k, v in obj.items() if k not in _NODE_KEYS}

    if code.depth == 3:
        if "subcategories" in obj:
            raise SchemaError(f"{where}: tier-3 categories cannot have subcategories")
        example = _require_text(obj, "example", where)
        return TaxonomyNode(code, name, description, example, (), reconstructed, extra)

    example = obj.get("example")
    if example is not None:
        # tier-2 examples are not part of the layout; keep them verbatim
        extra["example"] = example
    subs = _require_object(obj.get("subcategories", {}), f"{where} subcategories")
    children = tuple(_load_node(k, v, code) for k, v in subs.items())
    return TaxonomyNode(code, name, description, None, children, reconstructed, extra)


_META_KEYS = {"version", "focus", "revision_date", "hierarchy_rules", "exclusion_criteria"}


def _load_metadata(raw: Any) -> TaxonomyMetadata:
    obj = _require_object(raw, "metadata")
    rules_raw = obj.get("hierarchy_rules", [])
    if not isinstance(rules_raw, list) or not all(isinstance(r, str) for r in rules_raw):
        raise SchemaError("metadata.hierarchy_rules must be an array of strings")
    exclusions = _require_object(obj.get("exclusion_criteria", {}), "metadata.exclusion_criteria")
    if not all(isinstance(v, str) for v in exclusions.values()):
        raise SchemaError("metadata.exclusion_criteria values must be text")
    return TaxonomyMetadata(
        version=_optional_text(obj, "version", "metadata"),
        focus=_optional_text(obj, "focus", "metadata"),
        revision_date=_optional_text(obj, "revision_date", "metadata"),
        hierarchy_rules=tuple(parse_rule(r, i) for i, r in enumerate(rules_raw, start=1)),
        exclusion_criteria=dict(exclusions),
        extra={k: v for k, v in obj.items() if k not in _META_KEYS},
    )


def load_taxonomy(text: str) -> Taxonomy:
    """Parse and index a taxonomy document.

    Raises:
        ParseError: the text is not valid JSON.
        SchemaError: required keys are missing or mis-shaped.
        DuplicateCode: a category key appears twice in one block.
        DanglingRuleReference: a hierarchy rule names an undefined code.
    """
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except _DuplicateKey as dup:
        try:
            parse_code(dup.key, allow_tier1=True)
        except MalformedCode:
            raise ParseError(f"duplicate key {dup.key!r}") from None
        raise DuplicateCode(f"category {dup.key} is defined more than once") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"taxonomy is not valid JSON: {exc}") from None

    top = _require_object(doc, "document")
    if "taxonomy" not in top:
        raise SchemaError("missing top-level 'taxonomy' key")
    body = _require_object(top["taxonomy"], "taxonomy")
    for key in ("metadata", "error categories"):
        if key not in body:
            raise SchemaError(f"taxonomy is missing {key!r}")

    metadata = _load_metadata(body["metadata"])
    categories = _require_object(body["error categories"], "error categories")
    roots = []
    for key, raw in categories.items():
        try:
            code = parse_code(key, allow_tier1=True)
        except MalformedCode:
            raise SchemaError(f"unknown tier-1 category {key!r}") from None
        if code.depth != 1:
            raise SchemaError(f"'error categories' keys must be tier-1 codes, got {key!r}")
        block = _require_object(raw, f"category {key}")
        children = tuple(_load_node(k, v, code) for k, v in block.items())
        roots.append(TaxonomyNode(code, TIER1_NAMES[key], "", None, children))

    tax = Taxonomy(metadata, tuple(roots))
    for diag in validate(tax):
        if diag.kind == "DuplicateCode":
            raise DuplicateCode(diag.message)
        if diag.kind == "DanglingRuleReference":
            raise DanglingRuleReference(diag.message)
    return tax


def read_taxonomy(path: str | Path) -> Taxonomy:
    return load_taxonomy(Path(path).read_text(encoding="utf-8"))


# --- validation --------------------------------------------------------------


def validate(tax: Taxonomy) -> list[Diagnostic]:
    """Check every structural invariant; an empty list means the taxonomy is sound.

    Unrecognized hierarchy rules are reported as warnings, everything else
    as errors.
    """
    diags: list[Diagnostic] = []
    seen: set[str] = set()

    def err(kind: str, subject: str, message: str) -> None:
        diags.append(Diagnostic("error", kind, subject, message))

    for root in tax.roots:
        if root.code.depth != 1:
            err("BadRoot", root.code.render(), "roots must be tier-1 categories")

    for node in tax.nodes():
        key = node.code.render()
        if key in seen:
            err("DuplicateCode", key, f"category {key} is defined more than once")
        seen.add(key)
        for child in node.children:
            if child.code.parent != node.code:
                err(
                    "BadParentage",
                    child.code.render(),
                    f"{child.code} does not extend its parent {key}",
                )
        if node.code.depth == 1:
            continue
        if not node.name.strip():
            err("MissingName", key, "category has an empty name")
        if not node.description.strip():
            err("MissingDescription", key, "category has an empty description")
        if node.code.depth == 3:
            if node.children:
                err("Tier3HasChildren", key, "tier-3 categories cannot have children")
            if not (node.example and node.example.strip()):
                err("MissingExample", key, "tier-3 category has no example")

    for rule in tax.rules:
        if rule.kind is RuleKind.UNRECOGNIZED:
            diags.append(
                Diagnostic(
                    "warning",
                    "UnrecognizedRule",
                    f"rule {rule.ordinal}",
                    f"hierarchy rule not understood, kept verbatim: {rule.raw_text!r}",
                )
            )
        for ref in (rule.winner, rule.loser):
            if ref is not None and ref.render() not in tax.index:
                err(
                    "DanglingRuleReference",
                    f"rule {rule.ordinal}",
                    f"rule {rule.ordinal} references undefined category {ref}",
                )
    return diags


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diags)
