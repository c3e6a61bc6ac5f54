"""Rendered-page data model and snapshot document ingestion.

A page snapshot is the unit of input for the whole pipeline: a set of
positioned, styled text fields captured from a rendered page (by the
browser capturer or by the synthetic layout engine). Snapshot documents
are JSON, one document per page; see ``parse_snapshot`` for the schema.

All types here are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field

from .errors import SnapshotParseError

SNAPSHOT_SCHEMA_VERSION = 1

FONT_WEIGHTS = ("normal", "bold")
FONT_STYLES = ("normal", "italic")
TEXT_ALIGNMENTS = ("left", "right", "center", "justify")


def normalize_text(text: str) -> str:
    """Normalize a string for storage and frequency lookups.

    Unicode NFC, internal whitespace runs collapsed to single spaces,
    leading/trailing whitespace dropped. Case is preserved.
    """
    return " ".join(unicodedata.normalize("NFC", text).split())


@dataclass(frozen=True, slots=True)
class BoundingBox:
    """Pixel-space rectangle; x/y is the top-left corner."""

    x: float
    y: float
    width: float
    height: float

    @property
    def x2(self) -> float:
        return self.x + self.width

    @property
    def y2(self) -> float:
        return self.y + self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.width / 2.0, self.y + self.height / 2.0)

    def translated(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.x + dx, self.y + dy, self.width, self.height)


@dataclass(frozen=True, slots=True)
class VisualAttributes:
    """Computed style of a text field as captured at render time."""

    font_size: float
    typeface: str
    font_weight: str  # "normal" | "bold"
    font_style: str  # "normal" | "italic"
    color: tuple[int, int, int]  # 24-bit RGB
    text_alignment: str  # "left" | "right" | "center" | "justify"


@dataclass(frozen=True, slots=True)
class TextField:
    """A contiguous rendered text run: the atomic unit of extraction.

    ``dom_path`` is the absolute element path as (tag, 1-based index)
    steps, always with an explicit index (``div[1]``, never bare ``div``).
    """

    field_id: str
    text: str
    bbox: BoundingBox
    visual: VisualAttributes
    dom_path: tuple[tuple[str, int], ...]


@dataclass(frozen=True, slots=True)
class PageSnapshot:
    """One rendered detail page: topic entity plus its text fields."""

    page_id: str
    site_id: str
    vertical_id: str
    topic_entity: str
    page_width: float
    page_height: float
    fields: tuple[TextField, ...]

    def field_by_id(self, field_id: str) -> TextField:
        for f in self.fields:
            if f.field_id == field_id:
                return f
        raise KeyError(field_id)


@dataclass(frozen=True)
class SiteCorpus:
    """All pages of one site plus the per-site string frequency table.

    ``string_frequency`` maps normalized field text to the fraction of
    the site's pages on which that string occurs (presence counted at
    most once per page), so every value lies in (0, 1].
    """

    site_id: str
    vertical_id: str
    pages: tuple[PageSnapshot, ...]
    string_frequency: dict[str, float] = field(default_factory=dict)


def parse_dom_path(path: str) -> tuple[tuple[str, int], ...]:
    """Parse ``/html[1]/body[1]/div[2]/span[1]`` into ((tag, index), ...)."""
    if not path.startswith("/"):
        raise SnapshotParseError(f"dom_path must be absolute, got {path!r}")
    steps = []
    for step in path.strip("/").split("/"):
        if not step or "[" not in step or not step.endswith("]"):
            raise SnapshotParseError(
                f"dom_path step {step!r} must be tag[index]", context=path
            )
        tag, _, idx_part = step.partition("[")
        try:
            index = int(idx_part[:-1])
        except ValueError:
            raise SnapshotParseError(
                f"dom_path step {step!r} has a non-integer index", context=path
            ) from None
        if not tag or index < 1:
            raise SnapshotParseError(
                f"dom_path step {step!r} needs a tag and an index >= 1", context=path
            )
        steps.append((tag, index))
    if not steps:
        raise SnapshotParseError(f"dom_path {path!r} has no steps")
    return tuple(steps)


def format_dom_path(steps: tuple[tuple[str, int], ...]) -> str:
    return "/" + "/".join(f"{tag}[{idx}]" for tag, idx in steps)


def parse_color(value: str) -> tuple[int, int, int]:
    if not (isinstance(value, str) and len(value) == 7 and value.startswith("#")):
        raise SnapshotParseError(f"color must be #RRGGBB, got {value!r}")
    try:
        return (int(value[1:3], 16), int(value[3:5], 16), int(value[5:7], 16))
    except ValueError:
        raise SnapshotParseError(f"color must be #RRGGBB, got {value!r}") from None


def format_color(rgb: tuple[int, int, int]) -> str:
    return "#{:02X}{:02X}{:02X}".format(*rgb)


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise SnapshotParseError(f"missing required key {key!r}", context=context)
    return obj[key]


def _number(obj: dict, key: str, context: str) -> float:
    value = _require(obj, key, context)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SnapshotParseError(f"{key} must be a number, got {value!r}", context=context)
    return float(value)


def _parse_field(raw: dict, page_id: str) -> TextField:
    ctx = f"page {page_id}, field {raw.get('field_id', '?')}"
    field_id = str(_require(raw, "field_id", ctx))
    text = normalize_text(str(_require(raw, "text", ctx)))
    if not text:
        raise SnapshotParseError("text is empty after whitespace normalization", context=ctx)

    raw_bbox = _require(raw, "bbox", ctx)
    bbox = BoundingBox(
        x=_number(raw_bbox, "x", ctx),
        y=_number(raw_bbox, "y", ctx),
        width=_number(raw_bbox, "width", ctx),
        height=_number(raw_bbox, "height", ctx),
    )
    if bbox.width <= 0 or bbox.height <= 0:
        raise SnapshotParseError("bbox width and height must be positive", context=ctx)
    if bbox.x < 0 or bbox.y < 0:
        raise SnapshotParseError("bbox x and y must be non-negative", context=ctx)

    raw_vis = _require(raw, "visual", ctx)
    font_size = _number(raw_vis, "font_size", ctx)
    if font_size <= 0:
        raise SnapshotParseError("font_size must be positive", context=ctx)
    weight = str(_require(raw_vis, "font_weight", ctx))
    if weight not in FONT_WEIGHTS:
        raise SnapshotParseError(f"font_weight must be one of {FONT_WEIGHTS}", context=ctx)
    style = str(_require(raw_vis, "font_style", ctx))
    if style not in FONT_STYLES:
        raise SnapshotParseError(f"font_style must be one of {FONT_STYLES}", context=ctx)
    alignment = str(_require(raw_vis, "text_alignment", ctx))
    if alignment not in TEXT_ALIGNMENTS:
        raise SnapshotParseError(f"text_alignment must be one of {TEXT_ALIGNMENTS}", context=ctx)
    visual = VisualAttributes(
        font_size=font_size,
        typeface=str(_require(raw_vis, "typeface", ctx)),
        font_weight=weight,
        font_style=style,
        color=parse_color(str(_require(raw_vis, "color", ctx))),
        text_alignment=alignment,
    )

    dom_path = parse_dom_path(str(_require(raw, "dom_path", ctx)))
    return TextField(field_id=field_id, text=text, bbox=bbox, visual=visual, dom_path=dom_path)


def parse_snapshot(document: str | dict) -> PageSnapshot:
    """Parse and validate one snapshot document (JSON text or parsed dict).

    Raises SnapshotParseError with line/field context on malformed input
    or on any type-invariant violation.
    """
    if isinstance(document, str):
        try:
            raw = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SnapshotParseError(
                f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from None
    else:
        raw = document
    if not isinstance(raw, dict):
        raise SnapshotParseError("snapshot document must be a JSON object")

    version = raw.get("schema_version")
    if version != SNAPSHOT_SCHEMA_VERSION:
        raise SnapshotParseError(
            f"unsupported schema_version {version!r} (expected {SNAPSHOT_SCHEMA_VERSION})"
        )

    page_id = str(_require(raw, "page_id", "snapshot"))
    ctx = f"page {page_id}"
    topic = normalize_text(str(_require(raw, "topic_entity", ctx)))
    if not topic:
        raise SnapshotParseError("topic_entity must be non-empty", context=ctx)
    page_width = _number(raw, "page_width", ctx)
    page_height = _number(raw, "page_height", ctx)
    if page_width <= 0 or page_height <= 0:
        raise SnapshotParseError("page dimensions must be positive", context=ctx)

    raw_fields = _require(raw, "fields", ctx)
    if not isinstance(raw_fields, list):
        raise SnapshotParseError("fields must be a list", context=ctx)
    fields = tuple(_parse_field(f, page_id) for f in raw_fields)

    seen: set[str] = set()
    for f in fields:
        if f.field_id in seen:
            raise SnapshotParseError(f"duplicate field_id {f.field_id!r}", context=ctx)
        seen.add(f.field_id)
        if f.bbox.x2 > page_width or f.bbox.y2 > page_height:
            raise SnapshotParseError(
                f"field {f.field_id} bbox exceeds page bounds", context=ctx
            )

    return PageSnapshot(
        page_id=page_id,
        site_id=str(_require(raw, "site_id", ctx)),
        vertical_id=str(_require(raw, "vertical_id", ctx)),
        topic_entity=topic,
        page_width=page_width,
        page_height=page_height,
        fields=fields,
    )


def serialize_snapshot(page: PageSnapshot) -> str:
    """Serialize a page back to its JSON document form (round-trips)."""
    doc = {
        "schema_version": SNAPSHOT_SCHEMA_VERSION,
        "page_id": page.page_id,
        "site_id": page.site_id,
        "vertical_id": page.vertical_id,
        "topic_entity": page.topic_entity,
        "page_width": page.page_width,
        "page_height": page.page_height,
        "fields": [
            {
                "field_id": f.field_id,
                "text": f.text,
                "bbox": {
                    "x": f.bbox.x,
                    "y": f.bbox.y,
                    "width": f.bbox.width,
                    "height": f.bbox.height,
                },
                "visual": {
                    "font_size": f.visual.font_size,
                    "typeface": f.visual.typeface,
                    "font_weight": f.visual.font_weight,
                    "font_style": f.visual.font_style,
                    "color": format_color(f.visual.color),
                    "text_alignment": f.visual.text_alignment,
                },
                "dom_path": format_dom_path(f.dom_path),
            }
            for f in page.fields
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=False)


def compute_site_frequencies(pages: list[PageSnapshot]) -> SiteCorpus:
    """Build a SiteCorpus with the per-site string frequency table.

    Frequency of a string is the fraction of pages on which it appears at
    least once; a string repeated on one page still counts that page once.
    """
    if not pages:
        raise ValueError("compute_site_frequencies requires at least one page")
    site_ids = {p.site_id for p in pages}
    if len(site_ids) != 1:
        raise ValueError(f"pages span multiple sites: {sorted(site_ids)}")

    counts: dict[str, int] = {}
    for page in pages:
        for text in sorted({f.text for f in page.fields}):
            counts[text] = counts.get(text, 0) + 1
    n = len(pages)
    freq = {text: counts[text] / n for text in sorted(counts)}
    return SiteCorpus(
        site_id=pages[0].site_id,
        vertical_id=pages[0].vertical_id,
        pages=tuple(pages),
        string_frequency=freq,
    )


@dataclass(frozen=True, slots=True)
class Violation:
    """One invariant violation found by validate_corpus."""

    page_id: str
    field_id: str | None
    message: str


def validate_page(page: PageSnapshot) -> list[Violation]:
    violations: list[Violation] = []
    if not page.topic_entity.strip():
        violations.append(Violation(page.page_id, None, "topic_entity is empty"))
    if page.page_width <= 0 or page.page_height <= 0:
        violations.append(Violation(page.page_id, None, "non-positive page dimensions"))
    seen: set[str] = set()
    for f in page.fields:
        if f.field_id in seen:
            violations.append(Violation(page.page_id, f.field_id, "duplicate field_id"))
        seen.add(f.field_id)
        if not f.text.strip():
            violations.append(Violation(page.page_id, f.field_id, "empty text"))
        if f.bbox.width <= 0 or f.bbox.height <= 0:
            violations.append(Violation(page.page_id, f.field_id, "non-positive bbox size"))
        if f.bbox.x < 0 or f.bbox.y < 0:
            violations.append(Violation(page.page_id, f.field_id, "negative bbox origin"))
        if f.bbox.x2 > page.page_width or f.bbox.y2 > page.page_height:
            violations.append(Violation(page.page_id, f.field_id, "bbox exceeds page bounds"))
        if f.visual.font_size <= 0:
            violations.append(Violation(page.page_id, f.field_id, "non-positive font_size"))
        if not f.dom_path or any(idx < 1 for _, idx in f.dom_path):
            violations.append(Violation(page.page_id, f.field_id, "invalid dom_path"))
    return violations


def validate_corpus(corpus: SiteCorpus) -> list[Violation]:
    """Check every type invariant on every page; violations are data, not errors."""
    violations: list[Violation] = []
    for page in corpus.pages:
        violations.extend(validate_page(page))
    for text, freq in corpus.string_frequency.items():
        if not (0.0 < freq <= 1.0):
            violations.append(Violation("<site>", None, f"frequency of {text!r} out of (0,1]"))
    return violations
