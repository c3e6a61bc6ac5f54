import numpy as np
import pytest

from layoutie.errors import UnknownStringError
from layoutie.features import (
    WEB_SAFE_PALETTE,
    FeatureConfig,
    Task,
    build_feature_config,
    embed_text,
    node_input_features,
    openie_text_feature,
    pair_features,
    quantize_color,
    slot_map,
    visual_features,
)

from helpers import make_corpus, make_field, make_page

CFG = FeatureConfig(typeface_vocab=("arial", "georgia", "times new roman"))


def test_full_page_bbox_normalizes_to_unit():
    page = make_page([make_field("f", 0, 0, 800, 600)], page_width=800, page_height=600)
    v = visual_features(page.fields[0], page, CFG)
    assert v[0] == 0 and v[1] == 0 and v[2] == 1 and v[3] == 1


def test_font_size_scaled_by_100():
    page = make_page([make_field("f", 0, 0, 10, 10, font_size=20.0)])
    assert visual_features(page.fields[0], page, CFG)[4] == pytest.approx(0.2)


def test_bold_weight_one_hot():
    page = make_page([make_field("f", 0, 0, 10, 10, font_weight="bold")])
    v = visual_features(page.fields[0], page, CFG)
    start = 5 + len(CFG.typeface_vocab) + 1
    assert v[start] == 0 and v[start + 1] == 1  # (normal, bold)


def test_unknown_typeface_hits_other_slot():
    page = make_page([make_field("f", 0, 0, 10, 10, typeface="Comic Sans MS")])
    v = visual_features(page.fields[0], page, CFG)
    tf_block = v[5 : 5 + len(CFG.typeface_vocab) + 1]
    assert tf_block[-1] == 1 and tf_block.sum() == 1


def test_typeface_lookup_casefolds():
    page = make_page([make_field("f", 0, 0, 10, 10, typeface="ARIAL")])
    v = visual_features(page.fields[0], page, CFG)
    assert v[5] == 1  # "arial" is vocab slot 0


def test_color_quantization_nearest():
    assert quantize_color((0xFE, 0, 0), ((0xFF, 0, 0), (0, 0, 0))) == 0


def test_color_quantization_tie_goes_first():
    # equidistant from both anchors
    assert quantize_color((5, 0, 0), ((0, 0, 0), (10, 0, 0))) == 0


def test_color_quantization_matches_euclidean_oracle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        rgb = tuple(int(c) for c in rng.integers(0, 256, size=3))
        got = quantize_color(rgb, WEB_SAFE_PALETTE)
        dists = [sum((a - b) ** 2 for a, b in zip(rgb, anchor)) for anchor in WEB_SAFE_PALETTE]
        assert dists[got] == min(dists)
        assert got == dists.index(min(dists))  # tie rule: first anchor


def test_every_one_hot_block_has_one_active_slot():
    rng = np.random.default_rng(12)
    weights = ("normal", "bold")
    styles = ("normal", "italic")
    aligns = ("left", "right", "center", "justify")
    for k in range(30):
        page = make_page(
            [
                make_field(
                    "f",
                    float(rng.uniform(0, 900)),
                    float(rng.uniform(0, 900)),
                    10,
                    10,
                    typeface=str(rng.choice(["arial", "weird", "georgia"])),
                    font_weight=str(rng.choice(weights)),
                    font_style=str(rng.choice(styles)),
                    text_alignment=str(rng.choice(aligns)),
                    color=tuple(int(c) for c in rng.integers(0, 256, size=3)),
                )
            ]
        )
        v = visual_features(page.fields[0], page, CFG)
        i = 5
        for size in (len(CFG.typeface_vocab) + 1, 2, 2, len(CFG.color_palette) + 1, 4):
            block = v[i : i + size]
            assert block.sum() == 1 and set(block) <= {0.0, 1.0}
            i += size
        assert i == CFG.visual_dim == len(v)


def test_openie_text_feature_is_site_frequency():
    pages = []
    for i in range(4):
        fields = [make_field("lbl", 0, 0, 10, 10, text="Genre:")]
        if i < 2:
            fields.append(make_field("val", 50, 0, 10, 10, text="Drama"))
        pages.append(make_page(fields, page_id=f"p{i}"))
    corpus = make_corpus(pages)
    assert openie_text_feature(corpus.pages[0].field_by_id("lbl"), corpus) == 1.0
    assert openie_text_feature(corpus.pages[0].field_by_id("val"), corpus) == 0.5


def test_openie_text_feature_unknown_string():
    corpus = make_corpus([make_page([make_field("a", 0, 0, 10, 10, text="here")])])
    stranger = make_field("b", 0, 50, 10, 10, text="not in corpus")
    with pytest.raises(UnknownStringError):
        openie_text_feature(stranger, corpus)


def test_embed_text_deterministic_and_unit_norm():
    a = embed_text("Directed by", CFG)
    b = embed_text("Directed by", CFG)
    assert np.array_equal(a, b)
    assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-9)
    assert len(a) == CFG.embed_dim


def test_embed_text_lowercases():
    assert np.array_equal(embed_text("directed by", CFG), embed_text("Directed By", CFG))


def test_embed_text_distinguishes_most_strings():
    a = embed_text("Director", CFG)
    b = embed_text("Producer", CFG)
    assert not np.array_equal(a, b)


def test_embed_text_handles_punctuation_only():
    v = embed_text("::", CFG)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-9)


def test_node_feature_lengths_and_shared_visual_block():
    corpus = make_corpus([make_page([make_field("a", 0, 0, 10, 10, text="x")])])
    page = corpus.pages[0]
    f = page.fields[0]
    open_vec = node_input_features(f, page, corpus, CFG, Task.OPENIE)
    closed_vec = node_input_features(f, page, corpus, CFG, Task.CLOSEDIE)
    assert len(open_vec) == CFG.visual_dim + 1 == CFG.node_dim(Task.OPENIE)
    assert len(closed_vec) == CFG.visual_dim + CFG.embed_dim + 1 == CFG.node_dim(Task.CLOSEDIE)
    assert np.array_equal(open_vec[: CFG.visual_dim], closed_vec[: CFG.visual_dim])
    # frequency occupies the final slot in both layouts
    assert open_vec[-1] == closed_vec[-1] == 1.0


def test_slot_map_matches_dims():
    assert len(slot_map(CFG, Task.OPENIE)) == CFG.node_dim(Task.OPENIE)
    assert len(slot_map(CFG, Task.CLOSEDIE)) == CFG.node_dim(Task.CLOSEDIE)
    assert slot_map(CFG, Task.OPENIE)[-1] == "site_frequency"


def test_pair_features_right_and_below():
    page = make_page(
        [
            make_field("rel", 0, 0, 40, 20),
            make_field("right", 60, 0, 40, 20),
            make_field("below", 0, 50, 40, 20),
        ]
    )
    rel = page.field_by_id("rel")
    dx, dy = pair_features(rel, page.field_by_id("right"), page)
    assert dy == 0 and dx > 0
    dx, dy = pair_features(rel, page.field_by_id("below"), page)
    assert dx == 0 and dy > 0


def test_pair_features_hand_value():
    # centers (100,50) and (160,50) on a 1280x800 page
    page = make_page(
        [make_field("r", 80, 40, 40, 20), make_field("o", 140, 40, 40, 20)],
        page_width=1280,
        page_height=800,
    )
    dx, dy = pair_features(page.field_by_id("r"), page.field_by_id("o"), page)
    assert dx == pytest.approx(60 / 1280)
    assert dx == pytest.approx(0.0469, abs=1e-4)
    assert dy == 0


def test_pair_features_translation_invariant():
    fields = [make_field("r", 10, 10, 40, 20), make_field("o", 80, 10, 40, 20)]
    moved = [make_field("r", 110, 210, 40, 20), make_field("o", 180, 210, 40, 20)]
    p1, p2 = make_page(fields), make_page(moved)
    assert np.array_equal(
        pair_features(p1.fields[0], p1.fields[1], p1),
        pair_features(p2.fields[0], p2.fields[1], p2),
    )


def test_translation_changes_only_coordinate_slots():
    page_a = make_page([make_field("f", 10, 10, 40, 20)])
    page_b = make_page([make_field("f", 110, 60, 40, 20)])
    va = visual_features(page_a.fields[0], page_a, CFG)
    vb = visual_features(page_b.fields[0], page_b, CFG)
    assert not np.array_equal(va[:2], vb[:2])
    assert np.array_equal(va[2:], vb[2:])


def test_build_feature_config_top_typefaces():
    pages = []
    # georgia on 3 fields, arial on 2, courier on 1
    faces = ["georgia"] * 3 + ["Arial"] * 2 + ["courier"]
    fields = [
        make_field(f"f{i}", 60.0 * i, 0, 50, 10, typeface=face)
        for i, face in enumerate(faces)
    ]
    pages.append(make_page(fields))
    cfg = build_feature_config([make_corpus(pages)], max_typefaces=2)
    assert cfg.typeface_vocab == ("arial", "georgia")


def test_build_feature_config_tie_breaks_lexicographic():
    fields = [
        make_field("f1", 0, 0, 10, 10, typeface="zeta"),
        make_field("f2", 20, 0, 10, 10, typeface="alpha"),
        make_field("f3", 40, 0, 10, 10, typeface="zeta"),
        make_field("f4", 60, 0, 10, 10, typeface="alpha"),
    ]
    cfg = build_feature_config([make_corpus([make_page(fields)])], max_typefaces=1)
    assert cfg.typeface_vocab == ("alpha",)
