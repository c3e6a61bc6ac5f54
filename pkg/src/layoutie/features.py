"""Initial node features: visual style block plus task-specific text block.

Every node starts as the concatenation [V(i); T(i)] of a visual block
(coordinates, size, font, one-hot style attributes) and a textual block.
For OpenIE the textual block is the single site-frequency slot; for
ClosedIE it is a hashed bag-of-words embedding followed by the frequency
slot. Pair features for candidate scoring are the center-to-center
offsets normalized by page size.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import UnknownStringError
from .snapshot import (
    FONT_STYLES,
    FONT_WEIGHTS,
    TEXT_ALIGNMENTS,
    PageSnapshot,
    SiteCorpus,
    TextField,
    normalize_text,
)


class Task(str, Enum):
    OPENIE = "openie"
    CLOSEDIE = "closedie"


# the sixteen classic named HTML colors, used as quantization anchors
WEB_SAFE_PALETTE: tuple[tuple[int, int, int], ...] = (
    (0x00, 0x00, 0x00),  # black
    (0xC0, 0xC0, 0xC0),  # silver
    (0x80, 0x80, 0x80),  # gray
    (0xFF, 0xFF, 0xFF),  # white
    (0x80, 0x00, 0x00),  # maroon
    (0xFF, 0x00, 0x00),  # red
    (0x80, 0x00, 0x80),  # purple
    (0xFF, 0x00, 0xFF),  # fuchsia
    (0x00, 0x80, 0x00),  # green
    (0x00, 0xFF, 0x00),  # lime
    (0x80, 0x80, 0x00),  # olive
    (0xFF, 0xFF, 0x00),  # yellow
    (0x00, 0x00, 0x80),  # navy
    (0x00, 0x00, 0xFF),  # blue
    (0x00, 0x80, 0x80),  # teal
    (0x00, 0xFF, 0xFF),  # aqua
)

DEFAULT_EMBED_DIM = 32
MAX_TYPEFACES = 15

_WORD_RE = re.compile(r"\w+", re.UNICODE)


@dataclass(frozen=True)
class FeatureConfig:
    """Frozen feature vocabulary; serialized with the trained model.

    ``typeface_vocab`` holds casefolded typeface names; anything outside
    it maps to the trailing OTHER slot. The color OTHER slot is reserved
    for schema stability: nearest-RGB quantization always picks a palette
    anchor, so it stays inactive for valid colors.
    """

    typeface_vocab: tuple[str, ...]
    color_palette: tuple[tuple[int, int, int], ...] = WEB_SAFE_PALETTE
    embed_dim: int = DEFAULT_EMBED_DIM
    normalize_coords: bool = True

    @property
    def visual_dim(self) -> int:
        return (
            5
            + len(self.typeface_vocab) + 1
            + len(FONT_WEIGHTS)
            + len(FONT_STYLES)
            + len(self.color_palette) + 1
            + len(TEXT_ALIGNMENTS)
        )

    def node_dim(self, task: Task) -> int:
        if task is Task.OPENIE:
            return self.visual_dim + 1
        return self.visual_dim + self.embed_dim + 1


def build_feature_config(
    corpora: list[SiteCorpus],
    embed_dim: int = DEFAULT_EMBED_DIM,
    max_typefaces: int = MAX_TYPEFACES,
) -> FeatureConfig:
    """Derive the typeface vocabulary from training pages.

    Keeps the ``max_typefaces`` most frequent casefolded typefaces by
    field count; ties break lexicographically, so the result does not
    depend on iteration order.
    """
    counts: dict[str, int] = {}
    for corpus in corpora:
        for page in corpus.pages:
            for f in page.fields:
                name = f.visual.typeface.casefold()
                counts[name] = counts.get(name, 0) + 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    vocab = tuple(sorted(name for name, _ in ranked[:max_typefaces]))
    return FeatureConfig(typeface_vocab=vocab, embed_dim=embed_dim)


def quantize_color(
    rgb: tuple[int, int, int], palette: tuple[tuple[int, int, int], ...]
) -> int:
    """Index of the nearest palette anchor by RGB Euclidean distance.

    Ties go to the earliest palette entry.
    """
    anchors = np.asarray(palette, dtype=float)
    d2 = ((anchors - np.asarray(rgb, dtype=float)) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def _one_hot(size: int, index: int) -> np.ndarray:
    v = np.zeros(size)
    v[index] = 1.0
    return v


def visual_features(field: TextField, page: PageSnapshot, cfg: FeatureConfig) -> np.ndarray:
    """The visual block V(i): numeric slots followed by style one-hots."""
    b = field.bbox
    if cfg.normalize_coords:
        numeric = [
            b.x / page.page_width,
            b.y / page.page_height,
            b.width / page.page_width,
            b.height / page.page_height,
        ]
    else:
        numeric = [b.x, b.y, b.width, b.height]
    numeric.append(field.visual.font_size / 100.0)

    typeface = field.visual.typeface.casefold()
    try:
        tf_index = cfg.typeface_vocab.index(typeface)
    except ValueError:
        tf_index = len(cfg.typeface_vocab)  # OTHER

    return np.concatenate(
        [
            np.asarray(numeric),
            _one_hot(len(cfg.typeface_vocab) + 1, tf_index),
            _one_hot(len(FONT_WEIGHTS), FONT_WEIGHTS.index(field.visual.font_weight)),
            _one_hot(len(FONT_STYLES), FONT_STYLES.index(field.visual.font_style)),
            _one_hot(len(cfg.color_palette) + 1, quantize_color(field.visual.color, cfg.color_palette)),
            _one_hot(len(TEXT_ALIGNMENTS), TEXT_ALIGNMENTS.index(field.visual.text_alignment)),
        ]
    )


def openie_text_feature(field: TextField, corpus: SiteCorpus) -> float:
    """Fraction of the site's pages carrying this field's exact text."""
    freq = corpus.string_frequency.get(normalize_text(field.text))
    if freq is None:
        raise UnknownStringError(
            f"text of field {field.field_id!r} is missing from the site frequency table"
        )
    return freq


def embed_text(text: str, cfg: FeatureConfig) -> np.ndarray:
    """Deterministic text embedding: hashed bag of lowercased word unigrams.

    Tokens hash into embed_dim buckets (stable crc32, not the process
    hash) and the counts are L2-normalized. Texts without word characters
    hash as a single whole-string token so any nonempty text embeds to a
    unit vector.
    """
    v = np.zeros(cfg.embed_dim)
    tokens = _WORD_RE.findall(normalize_text(text).lower())
    if not tokens:
        tokens = [normalize_text(text).lower()]
    for tok in tokens:
        v[zlib.crc32(tok.encode("utf-8")) % cfg.embed_dim] += 1.0
    norm = float(np.linalg.norm(v))
    return v / norm if norm > 0 else v


def node_input_features(
    field: TextField,
    page: PageSnapshot,
    corpus: SiteCorpus,
    cfg: FeatureConfig,
    task: Task,
) -> np.ndarray:
    """The full initial node vector [V(i); T(i)] for one task."""
    visual = visual_features(field, page, cfg)
    freq = openie_text_feature(field, corpus)
    if task is Task.OPENIE:
        textual = np.asarray([freq])
    else:
        textual = np.concatenate([embed_text(field.text, cfg), [freq]])
    return np.concatenate([visual, textual])


def pair_features(rel: TextField, obj: TextField, page: PageSnapshot) -> np.ndarray:
    """[Δx, Δy] between bbox centers (object minus relation), normalized."""
    rcx, rcy = rel.bbox.center
    ocx, ocy = obj.bbox.center
    return np.asarray([(ocx - rcx) / page.page_width, (ocy - rcy) / page.page_height])


def slot_map(cfg: FeatureConfig, task: Task) -> list[str]:
    """Human-readable name of every slot, in vector order."""
    names = ["x", "y", "width", "height", "font_size"]
    names += [f"typeface:{t}" for t in cfg.typeface_vocab] + ["typeface:OTHER"]
    names += [f"font_weight:{w}" for w in FONT_WEIGHTS]
    names += [f"font_style:{s}" for s in FONT_STYLES]
    names += [f"color:#{r:02X}{g:02X}{b:02X}" for r, g, b in cfg.color_palette]
    names += ["color:OTHER"]
    names += [f"text_alignment:{a}" for a in TEXT_ALIGNMENTS]
    if task is Task.CLOSEDIE:
        names += [f"embed:{k}" for k in range(cfg.embed_dim)]
    names += ["site_frequency"]
    return names
