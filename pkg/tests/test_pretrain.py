"""Field-class derivation, page preparation, and pretraining behavior."""

import numpy as np
import pytest

from layoutie.errors import TrainingError
from layoutie.features import Task, build_feature_config
from layoutie.nn import compile_graph
from layoutie.layout_graph import build_layout_graph
from layoutie.pretrain import (
    AblationFlags,
    FieldClass,
    TrainSettings,
    derive_field_classes,
    prepare_page,
    prepare_site,
    pretrain_encoder,
)
from layoutie.synth import GoldLabel

from helpers import make_corpus, make_field, make_page


def _gold(page_id, rel_id, obj_id):
    return GoldLabel(
        page_id=page_id,
        relation_surfaces=("Director",),
        object_string="x",
        closed_name="movie.directed_by",
        relation_field_id=rel_id,
        object_field_id=obj_id,
    )


class TestFieldClasses:
    def test_class_indices_are_stable(self):
        assert FieldClass.RELATION == 0
        assert FieldClass.OBJECT == 1
        assert FieldClass.OTHER == 2

    def test_roles_assigned_from_gold(self):
        page = make_page([
            make_field("a", 0, 0, 50, 10),
            make_field("b", 100, 0, 50, 10),
            make_field("c", 0, 100, 50, 10),
        ])
        classes = derive_field_classes(page, [_gold("p1", "a", "b")])
        assert classes.tolist() == [0, 1, 2]

    def test_dual_role_field_counts_as_relation(self):
        page = make_page([
            make_field("a", 0, 0, 50, 10),
            make_field("b", 100, 0, 50, 10),
            make_field("c", 0, 100, 50, 10),
        ])
        labels = [_gold("p1", "a", "b"), _gold("p1", "c", "a")]
        classes = derive_field_classes(page, labels)
        assert classes[0] == FieldClass.RELATION

    def test_other_pages_ignored(self):
        page = make_page([make_field("a", 0, 0, 50, 10)])
        classes = derive_field_classes(page, [_gold("other-page", "a", "a")])
        assert classes.tolist() == [2]


class TestPreparePage:
    def _page(self):
        # b and c in one row, a above them
        return make_page([
            make_field("b", 0, 100, 50, 10),
            make_field("a", 0, 0, 50, 10),
            make_field("c", 100, 100, 50, 10),
        ])

    def test_rows_follow_sorted_field_ids(self, movie_sites):
        corpora, _ = movie_sites
        corpus = corpora["movie-site-0"]
        cfg = build_feature_config([corpus])
        page = corpus.pages[0]
        prep = prepare_page(page, corpus, cfg, Task.OPENIE)
        ids = sorted(f.field_id for f in page.fields)
        # the frequency slot is last for OpenIE
        for row, fid in zip(prep.h0, ids):
            assert row[-1] == corpus.string_frequency[page.field_by_id(fid).text]

    def test_visual_ablation_zeroes_visual_block(self):
        page = self._page()
        corpus = make_corpus([page])
        cfg = build_feature_config([corpus])
        prep = prepare_page(page, corpus, cfg, Task.OPENIE, AblationFlags(no_visual_features=True))
        assert np.all(prep.h0[:, : cfg.visual_dim] == 0)
        assert np.any(prep.h0[:, cfg.visual_dim :] != 0)
        assert prep.h0.shape[1] == cfg.node_dim(Task.OPENIE)

    def test_text_ablation_zeroes_text_block(self):
        page = self._page()
        corpus = make_corpus([page])
        cfg = build_feature_config([corpus])
        prep = prepare_page(page, corpus, cfg, Task.CLOSEDIE, AblationFlags(no_text_features=True))
        assert np.all(prep.h0[:, cfg.visual_dim :] == 0)
        assert np.any(prep.h0[:, : cfg.visual_dim] != 0)

    def test_spatial_ablation_leaves_only_self_loops_here(self):
        page = self._page()
        corpus = make_corpus([page])
        cfg = build_feature_config([corpus])
        full = prepare_page(page, corpus, cfg, Task.OPENIE)
        bare = prepare_page(page, corpus, cfg, Task.OPENIE, AblationFlags(no_spatial_edges=True))
        # helper dom paths never align, so dropping spatial edges leaves none
        assert len(bare.graph.src) == 3
        assert len(full.graph.src) > 3

    def test_dom_ablation_drops_dom_edges(self, movie_sites):
        corpora, _ = movie_sites
        corpus = corpora["movie-site-0"]
        cfg = build_feature_config([corpus])
        page = corpus.pages[0]
        graph = build_layout_graph(page)
        n_dom = sum(1 for *_, t in graph.edges if t.value == "dom")
        assert n_dom > 0
        full = prepare_page(page, corpus, cfg, Task.OPENIE)
        nodom = prepare_page(page, corpus, cfg, Task.OPENIE, AblationFlags(no_dom_edges=True))
        assert len(nodom.graph.src) < len(full.graph.src)

    def test_classes_follow_row_order(self, movie_sites):
        corpora, gold = movie_sites
        corpus = corpora["movie-site-0"]
        cfg = build_feature_config([corpus])
        prep = prepare_site(corpus, cfg, Task.OPENIE, labels=gold["movie-site-0"])[0]
        page = corpus.pages[0]
        ids = sorted(f.field_id for f in page.fields)
        rel_ids = {g.relation_field_id for g in gold["movie-site-0"] if g.page_id == page.page_id}
        for fid, cls in zip(ids, prep.classes):
            assert (cls == FieldClass.RELATION) == (fid in rel_ids)


class TestAblationFlags:
    def test_from_names_round_trip(self):
        flags = AblationFlags.from_names(["no_gnn", "no_dom_edges"])
        assert flags.no_gnn and flags.no_dom_edges and not flags.no_pretrain
        assert flags.names() == ["no_dom_edges", "no_gnn"]

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError, match="unknown ablation"):
            AblationFlags.from_names(["no_magic"])


@pytest.fixture(scope="module")
def prepared_movie(movie_sites):
    corpora, gold = movie_sites
    sites = ["movie-site-0", "movie-site-1"]
    cfg = build_feature_config([corpora[s] for s in sites])
    prep = []
    for s in sites:
        prep.extend(prepare_site(corpora[s], cfg, Task.OPENIE, labels=gold[s]))
    return prep


class TestPretraining:
    def test_fits_separable_data(self, prepared_movie):
        # same learning rate the pipeline pretrains with; the default 1e-3 is
        # tuned for the smaller closed-vocabulary task and fits this data slowly
        result = pretrain_encoder(
            prepared_movie, hidden_dim=25, seed=0,
            settings=TrainSettings(epochs=60, learning_rate=3e-3),
        )
        assert result.accuracy > 0.95
        assert result.epoch_losses[-1] < result.epoch_losses[0]

    def test_encoder_comes_back_frozen(self, prepared_movie):
        result = pretrain_encoder(prepared_movie[:20], hidden_dim=8, seed=1,
                                  settings=TrainSettings(epochs=2))
        assert result.encoder.frozen
        for p in result.encoder.params().values():
            assert not p.requires_grad

    def test_same_seed_same_weights(self, prepared_movie):
        a = pretrain_encoder(prepared_movie[:20], hidden_dim=8, seed=7,
                             settings=TrainSettings(epochs=3))
        b = pretrain_encoder(prepared_movie[:20], hidden_dim=8, seed=7,
                             settings=TrainSettings(epochs=3))
        for name in a.encoder.params():
            assert np.array_equal(a.encoder.params()[name].data, b.encoder.params()[name].data)
        assert a.epoch_losses == b.epoch_losses

    def test_flat_loss_stops_early(self, prepared_movie):
        settings = TrainSettings(epochs=20, patience=3, learning_rate=0.0, dropout_rate=0.0)
        result = pretrain_encoder(prepared_movie[:20], hidden_dim=8, seed=0, settings=settings)
        assert len(result.epoch_losses) == 4  # 1 baseline + 3 non-improving

    def test_requires_pages(self):
        with pytest.raises(TrainingError, match="no pages"):
            pretrain_encoder([], hidden_dim=8, seed=0)

    def test_requires_classes(self, movie_sites):
        corpora, _ = movie_sites
        corpus = corpora["movie-site-0"]
        cfg = build_feature_config([corpus])
        prep = prepare_site(corpus, cfg, Task.OPENIE)[:5]
        with pytest.raises(TrainingError, match="classes"):
            pretrain_encoder(prep, hidden_dim=8, seed=0)
