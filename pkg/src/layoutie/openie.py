"""Open extraction: candidate pairs, pair scoring head, and postprocessing.

Candidate relation fields are gated on site frequency; candidate objects
must sit to the right of or below the relation (by centers), within a
fraction of the page diagonal, and among the k nearest. The head scores
[h0_rel; h0_obj; hl_rel; hl_obj; dx; dy] through one hidden layer and a
sigmoid; without an encoder the hl blocks are omitted entirely.

Postprocessing enforces, in confidence order: no field plays both roles,
each object field keeps one relation, and extractions whose relation
field belongs to a detected relational-table header are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TrainingError
from .features import pair_features
from .nn import Adam, FeedForward, GATEncoder, binary_cross_entropy, zero_grads
from .pretrain import (
    PreparedPage,
    TrainSettings,
    _batches,
    _early_stop,
    _restore_best,
    _track_best,
)
from .snapshot import PageSnapshot, SiteCorpus

FREQUENCY_GATE = 0.2
DISTANCE_FRACTION = 0.3
MAX_OBJECTS_PER_RELATION = 10
NEGATIVE_RATIO = 5
HEAD_HIDDEN_DIM = 100


@dataclass(frozen=True)
class CandidatePair:
    """One (relation, object) field pair with row indices into PreparedPage."""

    rel_id: str
    obj_id: str
    rel_index: int
    obj_index: int
    delta: tuple[float, float]
    distance: float


def candidate_pairs(
    page: PageSnapshot,
    corpus: SiteCorpus,
    max_objects: int = MAX_OBJECTS_PER_RELATION,
    frequency_gate: float = FREQUENCY_GATE,
    distance_fraction: float = DISTANCE_FRACTION,
) -> list[CandidatePair]:
    """Gated pairs in deterministic (rel_id, distance, obj_id) order."""
    fields = sorted(page.fields, key=lambda f: f.field_id)
    index = {f.field_id: i for i, f in enumerate(fields)}
    centers = {f.field_id: f.bbox.center for f in fields}
    max_dist = distance_fraction * float(np.hypot(page.page_width, page.page_height))

    out: list[CandidatePair] = []
    for rel in fields:
        if corpus.string_frequency.get(rel.text, 0.0) < frequency_gate:
            continue
        rcx, rcy = centers[rel.field_id]
        reachable = []
        for obj in fields:
            if obj.field_id == rel.field_id:
                continue
            ocx, ocy = centers[obj.field_id]
            if not (rcx < ocx or rcy < ocy):
                continue
            dist = float(np.hypot(ocx - rcx, ocy - rcy))
            if dist > max_dist:
                continue
            reachable.append((dist, obj.field_id))
        reachable.sort()
        for dist, obj_id in reachable[:max_objects]:
            delta = pair_features(rel, page.field_by_id(obj_id), page)
            out.append(
                CandidatePair(
                    rel_id=rel.field_id,
                    obj_id=obj_id,
                    rel_index=index[rel.field_id],
                    obj_index=index[obj_id],
                    delta=(float(delta[0]), float(delta[1])),
                    distance=dist,
                )
            )
    return out


# -- head inputs ----------------------------------------------------------------


@dataclass(frozen=True)
class PagePairData:
    """Assembled head inputs and labels for one page's candidates."""

    page_id: str
    x: np.ndarray
    y: np.ndarray
    candidates: tuple[CandidatePair, ...]


def head_input_dim(h0_dim: int, hidden_dim: int | None) -> int:
    if hidden_dim is None:
        return 2 * h0_dim + 2
    return 2 * h0_dim + 2 * hidden_dim + 2


def build_pair_data(
    prep: PreparedPage,
    candidates: list[CandidatePair],
    encoder: GATEncoder | None,
    gold_pairs: set[tuple[str, str]] | None = None,
) -> PagePairData:
    hl = encoder.encode(prep.h0, prep.graph) if encoder is not None else None
    n = len(candidates)
    d = head_input_dim(prep.h0.shape[1], None if hl is None else hl.shape[1])
    x = np.empty((n, d))
    y = np.zeros(n)
    for k, c in enumerate(candidates):
        parts = [prep.h0[c.rel_index], prep.h0[c.obj_index]]
        if hl is not None:
            parts += [hl[c.rel_index], hl[c.obj_index]]
        parts.append(np.asarray(c.delta))
        x[k] = np.concatenate(parts)
        if gold_pairs is not None and (c.rel_id, c.obj_id) in gold_pairs:
            y[k] = 1.0
    return PagePairData(page_id=prep.page.page_id, x=x, y=y, candidates=tuple(candidates))


def downsample_negatives(
    data: list[PagePairData], ratio: int, rng: np.random.Generator
) -> list[PagePairData]:
    """Keep every positive and at most ratio x positives negatives overall.

    Selection is a seeded global draw without replacement; surviving rows
    stay grouped by page so batches remain page-contiguous.
    """
    sizes = [len(d.y) for d in data]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    y_all = np.concatenate([d.y for d in data]) if data else np.zeros(0)
    pos = int(y_all.sum())
    neg_idx = np.flatnonzero(y_all == 0)
    budget = ratio * pos
    if len(neg_idx) <= budget:
        return data
    chosen = rng.choice(neg_idx, size=budget, replace=False)
    keep = np.zeros(len(y_all), dtype=bool)
    keep[y_all == 1] = True
    keep[chosen] = True
    out = []
    for i, d in enumerate(data):
        mask = keep[offsets[i] : offsets[i + 1]]
        if not mask.any():
            continue
        out.append(
            PagePairData(
                page_id=d.page_id,
                x=d.x[mask],
                y=d.y[mask],
                candidates=tuple(c for c, m in zip(d.candidates, mask) if m),
            )
        )
    return out


# -- training -------------------------------------------------------------------


def train_openie(
    data: list[PagePairData],
    seed: int,
    settings: TrainSettings = TrainSettings(),
    hidden_dim: int = HEAD_HIDDEN_DIM,
    negative_ratio: int = NEGATIVE_RATIO,
) -> tuple[FeedForward, list[float]]:
    """Fit the pair-scoring head on downsampled candidates.

    The encoder is frozen upstream, so its outputs enter through the
    already-assembled feature rows; only the head trains here.
    """
    if not data:
        raise TrainingError("no candidate data to train on")
    if sum(int(d.y.sum()) for d in data) == 0:
        raise TrainingError("no positive pairs among the candidates")
    rng = np.random.default_rng(np.random.PCG64(seed))
    data = downsample_negatives(data, negative_ratio, rng)
    head = FeedForward.init(
        rng, in_dim=data[0].x.shape[1], hidden_dim=hidden_dim, out_dim=1,
        dropout_rate=settings.dropout_rate,
    )
    params = head.params("head")
    opt = Adam(lr=settings.learning_rate)

    losses: list[float] = []
    best: dict | None = None
    for _ in range(settings.epochs):
        total, count = 0.0, 0
        for batch in _batches(len(data), settings.batch_pages, rng):
            x = np.vstack([data[i].x for i in batch])
            y = np.concatenate([data[i].y for i in batch])
            logits = head.forward(x, rng=rng, training=True).reshape((-1,))
            loss = binary_cross_entropy(logits.sigmoid(), y)
            zero_grads(params)
            loss.backward()
            opt.step(params)
            total += float(loss.data) * len(y)
            count += len(y)
        losses.append(total / count)
        best = _track_best(params, losses, best)
        if _early_stop(losses, settings.patience, settings.min_delta):
            break
    _restore_best(params, best)
    return head, losses


def score_pairs(head: FeedForward, x: np.ndarray) -> np.ndarray:
    if len(x) == 0:
        return np.zeros(0)
    logits = head.forward(x, rng=None, training=False).data.reshape(-1)
    return 1.0 / (1.0 + np.exp(-logits))


# -- extraction -------------------------------------------------------------------


@dataclass(frozen=True)
class Extraction:
    page_id: str
    subject: str
    relation: str
    object: str
    confidence: float
    relation_field_id: str
    object_field_id: str


def score_extractions(
    head: FeedForward, prep: PreparedPage, data: PagePairData
) -> list[Extraction]:
    """Every candidate as an extraction with its model confidence.

    No threshold and no postprocessing, so threshold sweeps can reuse one
    scoring pass.
    """
    scores = score_pairs(head, data.x)
    page = prep.page
    return [
        Extraction(
            page_id=page.page_id,
            subject=page.topic_entity,
            relation=page.field_by_id(c.rel_id).text,
            object=page.field_by_id(c.obj_id).text,
            confidence=float(s),
            relation_field_id=c.rel_id,
            object_field_id=c.obj_id,
        )
        for c, s in zip(data.candidates, scores)
    ]


def extract_open(
    head: FeedForward,
    prep: PreparedPage,
    data: PagePairData,
    threshold: float,
    table_tolerance: float = 2.0,
) -> list[Extraction]:
    """Score a page's candidates and keep postprocessed pairs >= threshold."""
    raw = [e for e in score_extractions(head, prep, data) if e.confidence >= threshold]
    return postprocess(raw, prep.page, table_tolerance)


# -- postprocessing ---------------------------------------------------------------


def detect_table_headers(page: PageSnapshot, tol: float = 2.0) -> set[str]:
    """Field ids in the first rows of maximal aligned grids (>=2 x >=3).

    A grid is a run of consecutive rows with the same column count whose
    per-column x-intervals agree within tol; rows share a y-interval.
    """
    rows: dict[tuple[float, float], list] = {}
    for f in page.fields:
        key = (round(f.bbox.y / tol) * tol, round(f.bbox.height / tol) * tol)
        rows.setdefault(key, []).append(f)
    candidate_rows = []
    for key in sorted(rows):
        fields = sorted(rows[key], key=lambda f: f.bbox.x)
        if len(fields) >= 2:
            candidate_rows.append(fields)

    headers: set[str] = set()
    i = 0
    while i < len(candidate_rows):
        first = candidate_rows[i]
        signature = [(f.bbox.x, f.bbox.x2) for f in first]
        j = i + 1
        while j < len(candidate_rows):
            row = candidate_rows[j]
            if len(row) != len(signature):
                break
            aligned = all(
                abs(f.bbox.x - x1) <= tol and abs(f.bbox.x2 - x2) <= tol
                for f, (x1, x2) in zip(row, signature)
            )
            if not aligned:
                break
            j += 1
        if j - i >= 3:
            headers.update(f.field_id for f in first)
        i = j if j > i + 1 else i + 1
    return headers


def postprocess(
    extractions: list[Extraction], page: PageSnapshot, table_tolerance: float = 2.0
) -> list[Extraction]:
    """Greedy conflict resolution by confidence; deterministic and idempotent."""
    headers = detect_table_headers(page, table_tolerance)
    order = sorted(
        (e for e in extractions
         if e.relation_field_id not in headers
         and e.relation_field_id != e.object_field_id),
        key=lambda e: (-e.confidence, e.relation_field_id, e.object_field_id),
    )
    kept: list[Extraction] = []
    rel_fields: set[str] = set()
    obj_fields: set[str] = set()
    for e in order:
        if e.object_field_id in obj_fields:  # one relation per object field
            continue
        if e.relation_field_id in obj_fields or e.object_field_id in rel_fields:
            continue  # a field may not play both roles
        kept.append(e)
        rel_fields.add(e.relation_field_id)
        obj_fields.add(e.object_field_id)
    return kept
