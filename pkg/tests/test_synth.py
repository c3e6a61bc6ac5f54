"""Generator invariants: frequencies, geometry, gold resolution, determinism."""

import collections

import numpy as np
import pytest

from layoutie.layout_graph import EdgeType, build_layout_graph
from layoutie.snapshot import validate_corpus
from layoutie.synth import (
    CONVENTIONS,
    COLON_SITES,
    CellSpec,
    PageComposer,
    align_labels,
    default_templates,
    generate_site,
    read_corpus,
    relation_schema,
    write_corpus,
)

from helpers import make_field, make_page


@pytest.fixture(scope="module")
def movie_site0():
    return generate_site(default_templates("movie", 0)[0])


def test_default_corpus_shape(default_corpus):
    corpora, gold = default_corpus
    assert sorted(corpora) == ["movie", "player", "university"]
    for vertical in corpora:
        assert len(corpora[vertical]) == 6
        for site_id, corpus in corpora[vertical].items():
            assert len(corpus.pages) == 40
            assert gold[vertical][site_id]


def test_relation_strings_on_every_page(movie_site0):
    corpus, gold = movie_site0
    for g in gold:
        assert corpus.string_frequency[g.relation_surfaces[0]] == 1.0


def test_object_strings_rare(movie_site0):
    corpus, gold = movie_site0
    for g in gold:
        assert corpus.string_frequency[g.object_string] <= 2 / 40


def test_half_the_sites_use_colons():
    assert sum(COLON_SITES) == 3
    assert len(COLON_SITES) == 6


def test_convention_mix():
    counts = collections.Counter(CONVENTIONS)
    assert counts["relation-left"] == 3
    assert counts["relation-above"] == 2
    assert counts["mixed"] == 1


def test_colon_sites_append_colons(movie_site0):
    corpus, gold = movie_site0
    assert default_templates("movie", 0)[0].colon
    for g in gold:
        assert g.relation_surfaces[0].endswith(":")
        assert g.relation_surfaces[1] == g.relation_surfaces[0][:-1]


def test_gold_resolves_to_fields(movie_site0):
    corpus, gold = movie_site0
    pages = {p.page_id: p for p in corpus.pages}
    for g in gold:
        page = pages[g.page_id]
        assert page.field_by_id(g.relation_field_id).text == g.relation_surfaces[0]
        assert page.field_by_id(g.object_field_id).text == g.object_string


def test_no_overlapping_boxes(movie_site0):
    corpus, _ = movie_site0
    for page in corpus.pages[:8]:
        boxes = [(f.bbox.x, f.bbox.y, f.bbox.x2, f.bbox.y2) for f in page.fields]
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                a, b = boxes[i], boxes[j]
                overlapping = a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]
                assert not overlapping, (page.fields[i].text, page.fields[j].text)


def test_generated_pages_validate(movie_site0):
    corpus, _ = movie_site0
    assert validate_corpus(corpus) == []


def test_gold_pairs_within_three_spatial_hops(default_corpus):
    # bullet layouts route label -> bullet -> value, so a second value line
    # sits one hop further out; anything past three hops is a layout bug.
    # DOM edges are excluded: gold pairs must connect through geometry alone
    corpora, gold = default_corpus
    for vertical in corpora:
        for site_id, corpus in corpora[vertical].items():
            by_page = collections.defaultdict(list)
            for g in gold[vertical][site_id]:
                by_page[g.page_id].append(g)
            for page in corpus.pages[:2]:
                graph = build_layout_graph(page)
                spatial = collections.defaultdict(set)
                for u, v, t in graph.edges:
                    if t is not EdgeType.DOM:
                        spatial[u].add(v)
                        spatial[v].add(u)
                for g in by_page[page.page_id]:
                    frontier = {g.relation_field_id}
                    for _ in range(3):
                        frontier |= {n for f in frontier for n in spatial[f]}
                    assert g.object_field_id in frontier


def test_related_rail_mimics_values_without_a_label(default_corpus):
    # rail entries share the gold values' style and string pools; what sets
    # them apart is purely relational: no bold cell beside or above them
    corpora, _ = default_corpus
    for vertical in corpora:
        for corpus in corpora[vertical].values():
            for page in corpus.pages[:2]:
                rail = [f for f in page.fields if any(t == "samp" for t, _ in f.dom_path)]
                assert len(rail) == 6
                assert all(f.visual.font_weight == "normal" for f in rail)
                heading, *decoys = sorted(rail, key=lambda f: f.dom_path)
                assert corpus.string_frequency[heading.text] == 1.0
                for f in decoys:
                    assert corpus.string_frequency[f.text] <= 2 / len(corpus.pages)
                graph = build_layout_graph(page)
                fields = {f.field_id: f for f in page.fields}
                for u, v, t in graph.edges:
                    if t is EdgeType.DOM:
                        continue
                    for cell, other in ((u, v), (v, u)):
                        if fields[cell] in rail:
                            n = fields[other]
                            above_or_beside = n.bbox.y <= fields[cell].bbox.y
                            assert not (n.visual.font_weight == "bold" and above_or_beside)


def test_regeneration_is_identical(movie_site0):
    corpus, gold = movie_site0
    corpus2, gold2 = generate_site(default_templates("movie", 0)[0])
    assert corpus.pages == corpus2.pages
    assert gold == gold2
    assert corpus.string_frequency == corpus2.string_frequency


def test_different_seeds_differ():
    a, _ = generate_site(default_templates("movie", 0)[0])
    b, _ = generate_site(default_templates("movie", 1)[0])
    assert a.pages != b.pages


def test_relation_vocab_disjoint_across_verticals(default_corpus):
    _, gold = default_corpus
    vocab = {}
    for vertical, sites in gold.items():
        vocab[vertical] = {s for labels in sites.values() for g in labels for s in g.relation_surfaces}
    assert not vocab["movie"] & vocab["player"]
    assert not vocab["movie"] & vocab["university"]
    assert not vocab["player"] & vocab["university"]


def test_topic_entity_matches_heading(movie_site0):
    corpus, _ = movie_site0
    for page in corpus.pages[:5]:
        assert any(f.text == page.topic_entity for f in page.fields)


def test_composer_wraps_overflowing_cell():
    composer = PageComposer()
    wide = CellSpec(text="x" * 200, x=1100.0, dom_path="/html[1]/body[1]/p[1]")
    narrow = CellSpec(text="ok", x=40.0, dom_path="/html[1]/body[1]/p[2]")
    composer.place_row([narrow, wide])
    page = composer.build("p", "s", "v", "t")
    a, b = page.fields
    assert a.bbox.y < b.bbox.y  # the wide cell dropped to the next row
    assert b.bbox.x2 <= page.page_width


def test_schema_puts_no_relation_first():
    schema = relation_schema("movie")
    assert schema[0] == "NO_RELATION"
    assert "movie.directed_by" in schema
    assert len(schema) == len(set(schema))


class TestAlignLabels:
    def _page(self):
        fields = [
            make_field("rel", 100, 100, 80, 18, text="Director"),
            make_field("obj-near", 200, 100, 80, 18, text="Ava Hartley"),
            make_field("obj-far", 200, 400, 80, 18, text="Ava Hartley"),
        ]
        return make_page(fields)

    def test_picks_nearest_pair(self):
        labels = align_labels(self._page(), [("Director", "Ava Hartley")])
        assert len(labels) == 1
        assert labels[0].relation_field_id == "rel"
        assert labels[0].object_field_id == "obj-near"

    def test_tie_breaks_lexicographically(self):
        fields = [
            make_field("rel", 100, 100, 80, 18, text="Director"),
            make_field("obj-a", 100, 200, 80, 18, text="Ava Hartley"),
            make_field("obj-b", 100, 0, 80, 18, text="Ava Hartley"),
        ]
        labels = align_labels(make_page(fields), [("Director", "Ava Hartley")])
        assert labels[0].object_field_id == "obj-a"

    def test_missing_string_warns_and_skips(self):
        with pytest.warns(UserWarning, match="not found"):
            labels = align_labels(self._page(), [("Director", "Nobody Here")])
        assert labels == []

    def test_colon_predicate_gets_both_surfaces(self):
        fields = [
            make_field("rel", 100, 100, 80, 18, text="Director:"),
            make_field("obj", 200, 100, 80, 18, text="Ava Hartley"),
        ]
        labels = align_labels(make_page(fields), [("Director:", "Ava Hartley")])
        assert labels[0].relation_surfaces == ("Director:", "Director")


def test_corpus_disk_round_trip(tmp_path, movie_site0):
    corpus, gold = movie_site0
    slim_corpora = {"movie": {"movie-site-0": corpus}}
    slim_gold = {"movie": {"movie-site-0": gold}}
    write_corpus(tmp_path, slim_corpora, slim_gold)
    corpora2, gold2 = read_corpus(tmp_path)
    assert corpora2["movie"]["movie-site-0"].pages == corpus.pages
    assert gold2["movie"]["movie-site-0"] == gold
    assert corpora2["movie"]["movie-site-0"].string_frequency == corpus.string_frequency
