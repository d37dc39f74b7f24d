"""Page/span document model: labeled PDF text fragments plus paired reference Markdown.

One page per JSON file:

    {"page_id": str, "width": num, "height": num,
     "spans": [{"id": int, "text": str, "bbox": [x0, y0, x1, y1],
                "order": int, "gold_label": "KEEP"|"DELETE"|null}],
     "reference_markdown": str|null}

Coordinates are in points, origin at the top-left corner of the page.
Serialization is canonical (sorted keys, 2-space indent, trailing newline)
so golden-file comparisons are byte-stable. A corpus is a directory of page
files, discovered in lexicographic filename order.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path


class PageSchemaError(ValueError):
    """A page file failed parsing, schema checks, or invariant validation."""


class Label(enum.Enum):
    KEEP = "KEEP"
    DELETE = "DELETE"


@dataclass
class BBox:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def center_y(self) -> float:
        return (self.y0 + self.y1) / 2.0


@dataclass
class Span:
    id: int
    text: str
    bbox: BBox
    order: int
    gold_label: Label | None = None


@dataclass
class Page:
    page_id: str
    width: float
    height: float
    spans: list[Span] = field(default_factory=list)
    reference_markdown: str | None = None


# Corpus is just a list of validated pages; benchmark entry points check
# the reference_markdown-present requirement themselves.
Corpus = list[Page]


def validate_page(page: Page) -> list[str]:
    """Check every page invariant; return one message per violation.

    Violations are data, not errors: an empty list means the page is valid.
    Each message names the offending span id (or the page-level rule).
    """
    violations: list[str] = []
    if not page.page_id:
        violations.append("page: page_id must be non-empty")
    for name, value in (("width", page.width), ("height", page.height)):
        if not math.isfinite(value) or value <= 0:
            violations.append(f"page: {name} must be finite and positive")

    seen_ids: set[int] = set()
    seen_orders: set[int] = set()
    prev_order: int | None = None
    for span in page.spans:
        if span.id in seen_ids:
            violations.append(f"span {span.id}: duplicate id")
        seen_ids.add(span.id)
        if span.order in seen_orders:
            violations.append(f"span {span.id}: duplicate order {span.order}")
        seen_orders.add(span.order)
        if prev_order is not None and span.order <= prev_order:
            violations.append(f"span {span.id}: spans not sorted ascending by order")
        prev_order = span.order

        if not span.text or not span.text.strip():
            violations.append(f"span {span.id}: text is empty or whitespace-only")
        b = span.bbox
        coords = (b.x0, b.y0, b.x1, b.y1)
        if not all(math.isfinite(c) for c in coords):
            violations.append(f"span {span.id}: bbox has non-finite coordinates")
        elif any(c < 0 for c in coords):
            violations.append(f"span {span.id}: bbox has negative coordinates")
        else:
            if b.x0 > b.x1:
                violations.append(f"span {span.id}: bbox x0 > x1")
            if b.y0 > b.y1:
                violations.append(f"span {span.id}: bbox y0 > y1")
            if b.x1 > page.width or b.y1 > page.height:
                violations.append(f"span {span.id}: bbox exceeds page bounds")
    return violations


def _expect(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise PageSchemaError(f"{path}: {message}")


def _as_number(value, path: str) -> float:
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool), path, "expected a number")
    _expect(math.isfinite(float(value)), path, "expected a finite number")
    return float(value)


def _as_int(value, path: str) -> int:
    _expect(isinstance(value, int) and not isinstance(value, bool), path, "expected an integer")
    return value


def _as_str(value, path: str) -> str:
    _expect(isinstance(value, str), path, "expected a string")
    return value


def _span_from_dict(raw, path: str) -> Span:
    _expect(isinstance(raw, dict), path, "expected an object")
    unknown = set(raw) - {"id", "text", "bbox", "order", "gold_label"}
    _expect(not unknown, path, f"unknown keys {sorted(unknown)}")
    for key in ("id", "text", "bbox", "order"):
        _expect(key in raw, path, f"missing key '{key}'")
    span_id = _as_int(raw["id"], f"{path}.id")
    bbox_raw = raw["bbox"]
    _expect(isinstance(bbox_raw, list) and len(bbox_raw) == 4, f"{path}.bbox", "expected [x0, y0, x1, y1]")
    coords = [_as_number(v, f"{path}.bbox[{i}]") for i, v in enumerate(bbox_raw)]
    label_raw = raw.get("gold_label")
    if label_raw is None:
        label = None
    else:
        _expect(
            isinstance(label_raw, str) and label_raw in (Label.KEEP.value, Label.DELETE.value),
            f"{path}.gold_label",
            f"expected \"KEEP\", \"DELETE\" or null (span id {span_id})",
        )
        label = Label(label_raw)
    return Span(
        id=span_id,
        text=_as_str(raw["text"], f"{path}.text"),
        bbox=BBox(*coords),
        order=_as_int(raw["order"], f"{path}.order"),
        gold_label=label,
    )


def page_from_dict(raw: dict) -> Page:
    """Build and validate a Page from parsed JSON; spans are re-sorted by order."""
    _expect(isinstance(raw, dict), "page", "expected a JSON object")
    unknown = set(raw) - {"page_id", "width", "height", "spans", "reference_markdown"}
    _expect(not unknown, "page", f"unknown keys {sorted(unknown)}")
    for key in ("page_id", "width", "height", "spans"):
        _expect(key in raw, "page", f"missing key '{key}'")
    _expect(isinstance(raw["spans"], list), "spans", "expected a list")
    spans = [_span_from_dict(s, f"spans[{i}]") for i, s in enumerate(raw["spans"])]
    spans.sort(key=lambda s: s.order)
    reference = raw.get("reference_markdown")
    if reference is not None:
        reference = _as_str(reference, "reference_markdown")
    page = Page(
        page_id=_as_str(raw["page_id"], "page_id"),
        width=_as_number(raw["width"], "width"),
        height=_as_number(raw["height"], "height"),
        spans=spans,
        reference_markdown=reference,
    )
    violations = validate_page(page)
    if violations:
        raise PageSchemaError("; ".join(violations))
    return page


def page_to_dict(page: Page) -> dict:
    return {
        "page_id": page.page_id,
        "width": float(page.width),
        "height": float(page.height),
        "spans": [
            {
                "id": span.id,
                "text": span.text,
                "bbox": [float(span.bbox.x0), float(span.bbox.y0), float(span.bbox.x1), float(span.bbox.y1)],
                "order": span.order,
                "gold_label": span.gold_label.value if span.gold_label is not None else None,
            }
            for span in page.spans
        ],
        "reference_markdown": page.reference_markdown,
    }


def canonical_dumps(data) -> str:
    """Canonical JSON: sorted keys, 2-space indent, UTF-8, trailing newline."""
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def load_page(path: str | Path) -> Page:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise PageSchemaError(f"{path}: cannot read page file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PageSchemaError(f"{path}: invalid JSON: {exc}") from exc
    return page_from_dict(raw)


def save_page(page: Page, path: str | Path) -> None:
    violations = validate_page(page)
    if violations:
        raise PageSchemaError("; ".join(violations))
    Path(path).write_text(canonical_dumps(page_to_dict(page)), encoding="utf-8")


def load_corpus(directory: str | Path) -> Corpus:
    """Load every *.json page in lexicographic filename order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise PageSchemaError(f"{directory}: not a directory")
    return [load_page(p) for p in sorted(directory.glob("*.json"))]
