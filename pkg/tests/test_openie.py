"""Candidate gating, pair head training, extraction, and postprocessing."""

import numpy as np
import pytest

from layoutie.errors import TrainingError
from layoutie.features import Task, build_feature_config
from layoutie.openie import (
    CandidatePair,
    Extraction,
    build_pair_data,
    candidate_pairs,
    detect_table_headers,
    downsample_negatives,
    extract_open,
    head_input_dim,
    postprocess,
    score_pairs,
    train_openie,
)
from layoutie.pretrain import TrainSettings, prepare_page, prepare_site, pretrain_encoder
from layoutie.snapshot import compute_site_frequencies

from helpers import make_corpus, make_field, make_page


def corpus_with_freq(field_lists):
    """Each entry becomes one page; frequencies follow from repetition."""
    pages = [make_page(fields, page_id=f"p{i}") for i, fields in enumerate(field_lists)]
    return compute_site_frequencies(pages)


class TestCandidateGates:
    def test_frequency_gate_is_inclusive_at_threshold(self):
        # "label" on 2/10 pages = 0.2 exactly; "rare" on 1/10 = 0.1
        lists = []
        for i in range(10):
            fields = [make_field(f"filler{i}", 0, 0, 40, 10, text=f"filler {i}")]
            if i < 2:
                fields.append(make_field("lab", 0, 50, 40, 10, text="label"))
            if i == 0:
                fields.append(make_field("rare", 0, 100, 40, 10, text="rare"))
                fields.append(make_field("obj", 100, 100, 40, 10, text="thing"))
            lists.append(fields)
        corpus = corpus_with_freq(lists)
        cands = candidate_pairs(corpus.pages[0], corpus)
        rels = {c.rel_id for c in cands}
        assert "lab" in rels
        assert "rare" not in rels

    def test_direction_gate(self):
        page = make_page([
            make_field("rel", 500, 500, 40, 10),
            make_field("right", 600, 500, 40, 10),
            make_field("below", 500, 600, 40, 10),
            make_field("upleft", 300, 300, 40, 10),
        ])
        corpus = make_corpus([page])
        pairs = {(c.rel_id, c.obj_id) for c in candidate_pairs(page, corpus)}
        assert ("rel", "right") in pairs
        assert ("rel", "below") in pairs
        assert ("rel", "upleft") not in pairs

    def test_distance_gate(self):
        # page 1000x1000, diagonal ~1414, cutoff ~424
        page = make_page([
            make_field("rel", 10, 10, 20, 20),
            make_field("near", 300, 10, 20, 20),
            make_field("far", 10 + 500, 10, 20, 20),
        ])
        corpus = make_corpus([page])
        pairs = {(c.rel_id, c.obj_id) for c in candidate_pairs(page, corpus)}
        assert ("rel", "near") in pairs
        assert ("rel", "far") not in pairs

    def test_k_nearest_cap(self):
        fields = [make_field("rel", 0, 500, 20, 20)]
        for i in range(14):
            fields.append(make_field(f"o{i:02d}", 40 + 25 * i, 500, 20, 20))
        page = make_page(fields)
        corpus = make_corpus([page])
        cands = [c for c in candidate_pairs(page, corpus) if c.rel_id == "rel"]
        assert len(cands) == 10
        assert [c.obj_id for c in cands] == [f"o{i:02d}" for i in range(10)]

    def test_order_is_deterministic(self):
        fields = [
            make_field("b-rel", 0, 500, 20, 20),
            make_field("a-rel", 0, 100, 20, 20),
            make_field("obj1", 60, 100, 20, 20),
            make_field("obj2", 60, 500, 20, 20),
        ]
        page = make_page(fields)
        corpus = make_corpus([page])
        cands = candidate_pairs(page, corpus)
        assert cands == candidate_pairs(page, corpus)
        assert [c.rel_id for c in cands] == sorted(c.rel_id for c in cands)

    def test_translation_invariance(self):
        fields = [
            make_field("rel", 100, 100, 40, 10),
            make_field("obj", 200, 100, 40, 10),
        ]
        moved = [
            make_field("rel", 400, 600, 40, 10),
            make_field("obj", 500, 600, 40, 10),
        ]
        a = candidate_pairs(make_page(fields), make_corpus([make_page(fields)]))
        b = candidate_pairs(make_page(moved), make_corpus([make_page(moved)]))
        assert [(c.rel_id, c.obj_id, c.delta) for c in a] == [
            (c.rel_id, c.obj_id, c.delta) for c in b
        ]

    def test_recall_on_generated_corpus(self, default_corpus):
        corpora, gold_all = default_corpus
        total = hit = 0
        for vertical in corpora:
            for site_id, corpus in corpora[vertical].items():
                by_page = {}
                for g in gold_all[vertical][site_id]:
                    by_page.setdefault(g.page_id, set()).add(
                        (g.relation_field_id, g.object_field_id)
                    )
                for page in corpus.pages[::4]:
                    cands = {(c.rel_id, c.obj_id) for c in candidate_pairs(page, corpus)}
                    gp = by_page.get(page.page_id, set())
                    total += len(gp)
                    hit += len(gp & cands)
        assert hit / total >= 0.95


class TestPairData:
    def test_feature_layout_with_encoder(self, movie_sites):
        corpora, gold = movie_sites
        corpus = corpora["movie-site-0"]
        cfg = build_feature_config([corpus])
        prep = prepare_site(corpus, cfg, Task.OPENIE, labels=gold["movie-site-0"])[:4]
        enc = pretrain_encoder(prep, hidden_dim=6, seed=0, settings=TrainSettings(epochs=1)).encoder
        p = prep[0]
        cands = candidate_pairs(p.page, corpus)
        data = build_pair_data(p, cands, enc)
        d0 = p.h0.shape[1]
        assert data.x.shape == (len(cands), head_input_dim(d0, 6))
        hl = enc.encode(p.h0, p.graph)
        c = cands[0]
        row = data.x[0]
        assert np.array_equal(row[:d0], p.h0[c.rel_index])
        assert np.array_equal(row[d0 : 2 * d0], p.h0[c.obj_index])
        assert np.allclose(row[2 * d0 : 2 * d0 + 6], hl[c.rel_index])
        assert np.allclose(row[2 * d0 + 6 : 2 * d0 + 12], hl[c.obj_index])
        assert tuple(row[-2:]) == c.delta

    def test_feature_layout_without_encoder(self):
        page = make_page([
            make_field("rel", 100, 100, 40, 10),
            make_field("obj", 200, 100, 40, 10),
        ])
        corpus = make_corpus([page])
        cfg = build_feature_config([corpus])
        prep = prepare_page(page, corpus, cfg, Task.OPENIE)
        cands = candidate_pairs(page, corpus)
        data = build_pair_data(prep, cands, encoder=None)
        d0 = prep.h0.shape[1]
        assert data.x.shape[1] == 2 * d0 + 2

    def test_labels_from_gold_pairs(self):
        page = make_page([
            make_field("rel", 100, 100, 40, 10),
            make_field("a", 200, 100, 40, 10),
            make_field("b", 100, 200, 40, 10),
        ])
        corpus = make_corpus([page])
        cfg = build_feature_config([corpus])
        prep = prepare_page(page, corpus, cfg, Task.OPENIE)
        cands = candidate_pairs(page, corpus)
        data = build_pair_data(prep, cands, None, gold_pairs={("rel", "a")})
        by_pair = {(c.rel_id, c.obj_id): y for c, y in zip(data.candidates, data.y)}
        assert by_pair[("rel", "a")] == 1.0
        assert by_pair[("rel", "b")] == 0.0


def _toy_data(rng, n_pages=30, per_page=20, pos_per_page=None):
    """Pairs separable on the second-to-last slot; sign decides the label.

    With pos_per_page set, labels are forced instead (first k rows positive)
    to get a known class imbalance for the downsampling tests.
    """
    from layoutie.openie import PagePairData

    data = []
    for p in range(n_pages):
        x = rng.normal(size=(per_page, 6)) * 0.3
        x[:, -2] = rng.choice([-1.0, 1.0], size=per_page)
        if pos_per_page is None:
            y = (x[:, -2] > 0).astype(float)
        else:
            y = np.zeros(per_page)
            y[:pos_per_page] = 1.0
        data.append(PagePairData(page_id=f"p{p}", x=x, y=y, candidates=()))
    return data


class TestTraining:
    def test_requires_positives(self):
        rng = np.random.default_rng(0)
        data = _toy_data(rng)
        flat = [d.__class__(d.page_id, d.x, np.zeros_like(d.y), d.candidates) for d in data]
        with pytest.raises(TrainingError, match="positive"):
            train_openie(flat, seed=0)

    def test_learns_separable_pairs(self):
        rng = np.random.default_rng(1)
        data = _toy_data(rng)
        settings = TrainSettings(epochs=80, learning_rate=0.05, dropout_rate=0.0, patience=5)
        head, losses = train_openie(data, seed=0, settings=settings, hidden_dim=16)
        assert losses[-1] < losses[0]
        x = np.vstack([d.x for d in data])
        y = np.concatenate([d.y for d in data])
        scores = score_pairs(head, x)
        assert scores[y == 1].mean() > 0.8
        assert scores[y == 0].mean() < 0.2

    def test_downsampling_caps_negatives(self):
        rng = np.random.default_rng(2)
        data = _toy_data(rng, n_pages=10, pos_per_page=1)
        out = downsample_negatives(data, ratio=2, rng=np.random.default_rng(0))
        pos = sum(int(d.y.sum()) for d in out)
        neg = sum(int((d.y == 0).sum()) for d in out)
        assert pos == 10
        assert neg == 2 * pos

    def test_downsampling_is_seeded(self):
        rng = np.random.default_rng(3)
        data = _toy_data(rng, n_pages=10)
        a = downsample_negatives(data, 2, np.random.default_rng(5))
        b = downsample_negatives(data, 2, np.random.default_rng(5))
        assert all(np.array_equal(x.x, y.x) for x, y in zip(a, b))

    def test_downsampling_noop_when_under_budget(self):
        rng = np.random.default_rng(4)
        data = _toy_data(rng, n_pages=3)
        out = downsample_negatives(data, ratio=100, rng=np.random.default_rng(0))
        assert out is data

    def test_same_seed_same_head(self):
        rng = np.random.default_rng(5)
        data = _toy_data(rng, n_pages=8)
        h1, l1 = train_openie(data, seed=3, settings=TrainSettings(epochs=3))
        h2, l2 = train_openie(data, seed=3, settings=TrainSettings(epochs=3))
        assert np.array_equal(h1.w1.data, h2.w1.data)
        assert l1 == l2


def _extraction(rel_id, obj_id, conf, relation="Rel", obj="Obj"):
    return Extraction(
        page_id="p1", subject="Topic", relation=relation, object=obj,
        confidence=conf, relation_field_id=rel_id, object_field_id=obj_id,
    )


class TestPostprocess:
    def _plain_page(self, ids):
        fields = [make_field(i, 100 * k, 37 * ((k * 7) % 13), 40 + 3 * k, 10)
                  for k, i in enumerate(ids)]
        return make_page(fields)

    def test_dual_role_keeps_higher_confidence(self):
        page = self._plain_page(["a", "b", "c"])
        ex = [_extraction("a", "b", 0.9), _extraction("b", "c", 0.8)]
        kept = postprocess(ex, page)
        assert kept == [ex[0]]

    def test_dual_role_lower_first_still_resolved(self):
        page = self._plain_page(["a", "b", "c"])
        ex = [_extraction("a", "b", 0.7), _extraction("b", "c", 0.95)]
        kept = postprocess(ex, page)
        assert kept == [ex[1]]

    def test_object_keeps_best_relation(self):
        page = self._plain_page(["a", "b", "o"])
        ex = [_extraction("a", "o", 0.6), _extraction("b", "o", 0.9)]
        kept = postprocess(ex, page)
        assert kept == [ex[1]]

    def test_relation_may_keep_multiple_objects(self):
        page = self._plain_page(["a", "o1", "o2"])
        ex = [_extraction("a", "o1", 0.8), _extraction("a", "o2", 0.7)]
        assert len(postprocess(ex, page)) == 2

    def test_tie_broken_by_field_ids(self):
        page = self._plain_page(["a", "b", "c"])
        ex = [_extraction("b", "c", 0.5), _extraction("a", "b", 0.5)]
        kept = postprocess(ex, page)
        assert kept == [ex[1]]  # ("a","b") sorts before ("b","c")

    def test_idempotent_and_no_dual_role_randomized(self):
        rng = np.random.default_rng(11)
        ids = [f"f{i}" for i in range(8)]
        page = self._plain_page(ids)
        for _ in range(200):
            n = int(rng.integers(1, 12))
            ex = []
            for _ in range(n):
                rel, obj = rng.choice(len(ids), size=2, replace=False)
                ex.append(_extraction(ids[rel], ids[obj], round(float(rng.random()), 2)))
            kept = postprocess(ex, page)
            assert postprocess(kept, page) == kept
            rels = {e.relation_field_id for e in kept}
            objs = {e.object_field_id for e in kept}
            assert not rels & objs
            assert len(objs) == len(kept)

    def test_self_pair_dropped(self):
        # a field cannot be its own relation; keeping one would let a single
        # extraction break the no-dual-role guarantee
        page = self._plain_page(["a", "b"])
        ex = [_extraction("a", "a", 0.99), _extraction("a", "b", 0.4)]
        assert postprocess(ex, page) == [ex[1]]

    def test_table_header_extractions_dropped(self):
        fields = []
        # 3x4 aligned grid plus a key-value row elsewhere
        for r in range(4):
            for c in range(3):
                fields.append(
                    make_field(f"t{r}{c}", 100 + 150 * c, 500 + 30 * r, 120, 20,
                               text=f"cell {r}{c}")
                )
        fields.append(make_field("rel", 100, 100, 80, 20, text="Director"))
        fields.append(make_field("obj", 250, 100, 90, 20, text="Someone"))
        page = make_page(fields)
        ex = [
            _extraction("t00", "t10", 0.99),  # header cell as relation
            _extraction("rel", "obj", 0.5),
        ]
        kept = postprocess(ex, page)
        assert [e.relation_field_id for e in kept] == ["rel"]


class TestTableDetection:
    def _grid(self, rows, cols, x0=100, y0=100, w=120, dx=150, dy=30):
        fields = []
        for r in range(rows):
            for c in range(cols):
                fields.append(
                    make_field(f"g{r}{c}", x0 + dx * c, y0 + dy * r, w, 20,
                               text=f"g {r}{c}")
                )
        return fields

    def test_grid_header_found(self):
        page = make_page(self._grid(4, 3))
        headers = detect_table_headers(page)
        assert headers == {"g00", "g01", "g02"}

    def test_two_rows_not_a_table(self):
        page = make_page(self._grid(2, 3))
        assert detect_table_headers(page) == set()

    def test_single_column_not_a_table(self):
        fields = [make_field(f"r{r}", 100, 100 + 30 * r, 120, 20) for r in range(5)]
        assert detect_table_headers(make_page(fields)) == set()

    def test_misaligned_columns_break_the_grid(self):
        fields = self._grid(4, 3)
        bad = fields[7]  # row 2, col 1 shifted
        fields[7] = make_field(bad.field_id, bad.bbox.x + 15, bad.bbox.y, bad.bbox.width, 20)
        assert detect_table_headers(make_page(fields)) == set()

    def test_varying_widths_not_a_table(self):
        fields = []
        for r in range(4):
            fields.append(make_field(f"l{r}", 100, 100 + 30 * r, 80 + 11 * r, 20))
            fields.append(make_field(f"v{r}", 300, 100 + 30 * r, 60 + 13 * r, 20))
        assert detect_table_headers(make_page(fields)) == set()

    def test_generated_table_site_detected(self, movie_sites):
        corpora, _ = movie_sites
        corpus = corpora["movie-site-1"]  # ships a stats table
        page = corpus.pages[0]
        headers = detect_table_headers(page)
        texts = {page.field_by_id(f).text for f in headers}
        assert texts == {"Top Billed", "Character Played", "Scenes"}

    def test_plain_sections_not_detected(self, movie_sites):
        corpora, _ = movie_sites
        corpus = corpora["movie-site-0"]  # no table on this site
        for page in corpus.pages[:6]:
            assert detect_table_headers(page) == set()


class TestExtraction:
    def test_threshold_respected(self):
        page = make_page([
            make_field("rel", 100, 100, 40, 10, text="Director"),
            make_field("obj", 200, 100, 40, 10, text="Someone"),
        ])
        corpus = make_corpus([page])
        cfg = build_feature_config([corpus])
        prep = prepare_page(page, corpus, cfg, Task.OPENIE)
        cands = candidate_pairs(page, corpus)
        data = build_pair_data(prep, cands, None)
        rng = np.random.default_rng(0)
        from layoutie.nn import FeedForward

        head = FeedForward.init(rng, data.x.shape[1], 4, 1)
        scores = score_pairs(head, data.x)
        got_low = extract_open(head, prep, data, threshold=scores.min())
        got_high = extract_open(head, prep, data, threshold=scores.max() + 1e-9)
        assert len(got_low) >= 1
        assert got_high == []
        assert all(e.subject == page.topic_entity for e in got_low)
