"""Shared builders for tests: compact field/page/corpus construction."""

from __future__ import annotations

import zlib

from layoutie.snapshot import (
    BoundingBox,
    PageSnapshot,
    SiteCorpus,
    TextField,
    VisualAttributes,
    compute_site_frequencies,
    parse_dom_path,
)

DEFAULT_VISUAL = VisualAttributes(
    font_size=14.0,
    typeface="arial",
    font_weight="normal",
    font_style="normal",
    color=(0, 0, 0),
    text_alignment="left",
)


def make_field(
    field_id: str,
    x: float,
    y: float,
    w: float,
    h: float,
    text: str = "text",
    dom_path: str = None,
    **visual_overrides,
) -> TextField:
    visual = DEFAULT_VISUAL
    if visual_overrides:
        base = {
            "font_size": visual.font_size,
            "typeface": visual.typeface,
            "font_weight": visual.font_weight,
            "font_style": visual.font_style,
            "color": visual.color,
            "text_alignment": visual.text_alignment,
        }
        base.update(visual_overrides)
        visual = VisualAttributes(**base)
    if dom_path is None:
        # default paths differ in two index positions (or zero, on crc
        # collision), so they never add DOM edges between distinct fields
        k = zlib.crc32(field_id.encode()) % 997 + 1
        dom_path = f"/html[1]/body[1]/p[{k}]/i[{k}]"
    return TextField(
        field_id=field_id,
        text=text,
        bbox=BoundingBox(x=x, y=y, width=w, height=h),
        visual=visual,
        dom_path=parse_dom_path(dom_path),
    )


def make_page(
    fields,
    page_id: str = "p1",
    site_id: str = "site-a",
    vertical_id: str = "vert-a",
    topic_entity: str = "Topic",
    page_width: float = 1000.0,
    page_height: float = 1000.0,
) -> PageSnapshot:
    return PageSnapshot(
        page_id=page_id,
        site_id=site_id,
        vertical_id=vertical_id,
        topic_entity=topic_entity,
        page_width=page_width,
        page_height=page_height,
        fields=tuple(fields),
    )


def make_corpus(pages) -> SiteCorpus:
    return compute_site_frequencies(list(pages))


def random_boxes(rng, n, page_w=1000.0, page_h=1000.0, max_side=120.0):
    """n random boxes inside the page, as (x, y, w, h) tuples."""
    boxes = []
    for _ in range(n):
        w = float(rng.uniform(5.0, max_side))
        h = float(rng.uniform(5.0, max_side))
        x = float(rng.uniform(0.0, page_w - w))
        y = float(rng.uniform(0.0, page_h - h))
        boxes.append((x, y, w, h))
    return boxes
