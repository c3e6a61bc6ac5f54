import json

import pytest

from layoutie.errors import SnapshotParseError
from layoutie.snapshot import (
    compute_site_frequencies,
    format_color,
    format_dom_path,
    normalize_text,
    parse_color,
    parse_dom_path,
    parse_snapshot,
    serialize_snapshot,
    validate_corpus,
)

from helpers import make_corpus, make_field, make_page

VALID_DOC = {
    "schema_version": 1,
    "page_id": "p1",
    "site_id": "imdb",
    "vertical_id": "movie",
    "topic_entity": "The Matrix",
    "page_width": 1280,
    "page_height": 2000,
    "fields": [
        {
            "field_id": "f1",
            "text": "Director:",
            "bbox": {"x": 40, "y": 120, "width": 80, "height": 18},
            "visual": {
                "font_size": 14,
                "typeface": "Arial",
                "font_weight": "bold",
                "font_style": "normal",
                "color": "#000000",
                "text_alignment": "left",
            },
            "dom_path": "/html[1]/body[1]/div[2]/span[1]",
        },
        {
            "field_id": "f2",
            "text": "Lana Wachowski",
            "bbox": {"x": 140, "y": 120, "width": 120, "height": 18},
            "visual": {
                "font_size": 14,
                "typeface": "Arial",
                "font_weight": "normal",
                "font_style": "normal",
                "color": "#333333",
                "text_alignment": "left",
            },
            "dom_path": "/html[1]/body[1]/div[2]/span[2]",
        },
    ],
}


def test_parse_valid_document():
    page = parse_snapshot(json.dumps(VALID_DOC))
    assert page.page_id == "p1"
    assert page.topic_entity == "The Matrix"
    assert len(page.fields) == 2
    f1 = page.field_by_id("f1")
    assert f1.text == "Director:"
    assert f1.bbox.x2 == 120
    assert f1.visual.font_weight == "bold"
    assert f1.visual.color == (0, 0, 0)
    assert f1.dom_path == (("html", 1), ("body", 1), ("div", 2), ("span", 1))


def test_round_trip():
    page = parse_snapshot(json.dumps(VALID_DOC))
    again = parse_snapshot(serialize_snapshot(page))
    assert again == page
    # and serialization itself is stable
    assert serialize_snapshot(again) == serialize_snapshot(page)


def _broken(mutate):
    doc = json.loads(json.dumps(VALID_DOC))
    mutate(doc)
    return doc


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("page_id"),
        lambda d: d.pop("schema_version"),
        lambda d: d.update(schema_version=99),
        lambda d: d.update(topic_entity="   "),
        lambda d: d.update(page_width=0),
        lambda d: d["fields"][0].pop("bbox"),
        lambda d: d["fields"][0]["bbox"].update(width=0),
        lambda d: d["fields"][0]["bbox"].update(x=-4),
        lambda d: d["fields"][0]["bbox"].update(x=1270),  # x2 > page_width
        lambda d: d["fields"][0]["visual"].update(font_weight="heavy"),
        lambda d: d["fields"][0]["visual"].update(color="red"),
        lambda d: d["fields"][0]["visual"].update(color="#12345"),
        lambda d: d["fields"][0].update(dom_path="div[1]/span[1]"),
        lambda d: d["fields"][0].update(dom_path="/html[1]/span"),
        lambda d: d["fields"][0].update(text=" \n "),
        lambda d: d["fields"][1].update(field_id="f1"),
    ],
)
def test_parse_rejects_malformed(mutate):
    with pytest.raises(SnapshotParseError):
        parse_snapshot(_broken(mutate))


def test_parse_reports_json_line():
    with pytest.raises(SnapshotParseError, match="line"):
        parse_snapshot('{"page_id": "p1",\n  broken\n}')


def test_normalize_text():
    assert normalize_text("  a \n  b\tc ") == "a b c"
    assert normalize_text("Café") == "Café"  # NFC composition
    assert normalize_text("UPPER") == "UPPER"  # case preserved


def test_dom_path_round_trip():
    path = "/html[1]/body[1]/div[12]/span[3]"
    assert format_dom_path(parse_dom_path(path)) == path


def test_color_round_trip():
    assert parse_color("#A1B2C3") == (0xA1, 0xB2, 0xC3)
    assert format_color((0xA1, 0xB2, 0xC3)) == "#A1B2C3"
    assert parse_color("#a1b2c3") == (0xA1, 0xB2, 0xC3)


def test_frequency_string_on_every_page():
    pages = [
        make_page([make_field(f"f{i}", 0, 0, 10, 10, text="Director:")], page_id=f"p{i}")
        for i in range(5)
    ]
    corpus = compute_site_frequencies(pages)
    assert corpus.string_frequency["Director:"] == 1.0


def test_frequency_unique_string():
    pages = []
    for i in range(20):
        fields = [make_field("label", 0, 0, 10, 10, text="Title:")]
        if i == 7:
            fields.append(make_field("obj", 50, 0, 10, 10, text="Rare Value"))
        pages.append(make_page(fields, page_id=f"p{i}"))
    corpus = compute_site_frequencies(pages)
    assert corpus.string_frequency["Rare Value"] == 0.05
    assert corpus.string_frequency["Title:"] == 1.0


def test_frequency_counts_page_presence_once():
    # same string twice on one page still counts that page once
    page_a = make_page(
        [
            make_field("a", 0, 0, 10, 10, text="dup"),
            make_field("b", 50, 0, 10, 10, text="dup"),
        ],
        page_id="pa",
    )
    page_b = make_page([make_field("c", 0, 0, 10, 10, text="other")], page_id="pb")
    corpus = compute_site_frequencies([page_a, page_b])
    assert corpus.string_frequency["dup"] == 0.5


def test_frequency_matches_recount():
    import numpy as np

    rng = np.random.default_rng(7)
    vocab = [f"s{k}" for k in range(12)]
    pages = []
    for i in range(15):
        texts = rng.choice(vocab, size=rng.integers(1, 6), replace=True)
        fields = [
            make_field(f"p{i}f{j}", 60.0 * j, 0, 50, 10, text=str(t))
            for j, t in enumerate(texts)
        ]
        pages.append(make_page(fields, page_id=f"p{i}"))
    corpus = compute_site_frequencies(pages)
    for s in vocab:
        expected = sum(any(f.text == s for f in p.fields) for p in pages) / len(pages)
        assert corpus.string_frequency.get(s, 0.0) == expected or expected == 0.0
    assert all(0.0 < v <= 1.0 for v in corpus.string_frequency.values())


def test_validate_corpus_clean():
    corpus = make_corpus(
        [make_page([make_field("a", 0, 0, 10, 10), make_field("b", 20, 0, 10, 10)])]
    )
    assert validate_corpus(corpus) == []


def test_validate_corpus_duplicate_field_id():
    # bypass parse-time checks by constructing fields directly
    page = make_page([make_field("dup", 0, 0, 10, 10), make_field("dup", 20, 0, 10, 10)])
    corpus = make_corpus([page])
    violations = [v for v in validate_corpus(corpus) if "duplicate" in v.message]
    assert len(violations) == 1
    assert violations[0].page_id == "p1"
    assert violations[0].field_id == "dup"


def test_validate_corpus_bbox_out_of_bounds():
    page = make_page([make_field("tall", 0, 950, 10, 100)], page_height=1000.0)
    corpus = make_corpus([page])
    violations = [v for v in validate_corpus(corpus) if "bounds" in v.message]
    assert len(violations) == 1
