"""Fixed-schema field classification with a No-Relation default class.

Every text field on a page is assigned one relation type from an ordered
schema; index 0 is always NO_RELATION and is never emitted. Fields without
a gold annotation train as NO_RELATION examples.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import TrainingError
from .nn import Adam, FeedForward, GATEncoder, softmax_cross_entropy, zero_grads
from .pretrain import (
    PreparedPage,
    TrainSettings,
    _batches,
    _early_stop,
    _restore_best,
    _track_best,
)
from .synth import GoldLabel

NO_RELATION = "NO_RELATION"
CLOSED_HIDDEN_DIM = 200


@dataclass(frozen=True)
class RelationSchema:
    """Ordered relation inventory; NO_RELATION sits at index 0."""

    names: tuple[str, ...]

    def __post_init__(self):
        if not self.names or self.names[0] != NO_RELATION:
            raise ValueError("schema must start with NO_RELATION")
        if len(set(self.names)) != len(self.names):
            raise ValueError("schema names must be unique")

    @classmethod
    def from_names(cls, names) -> "RelationSchema":
        names = list(names)
        if NO_RELATION in names:
            names.remove(NO_RELATION)
        return cls(tuple([NO_RELATION] + names))

    @property
    def num_classes(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"relation {name!r} not in schema") from None


def write_schema(path: str | Path, schema: RelationSchema) -> None:
    Path(path).write_text("".join(f"{n}\n" for n in schema.names))


def read_schema(path: str | Path) -> RelationSchema:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    return RelationSchema(tuple(lines))


# -- per-field inputs and labels --------------------------------------------------


@dataclass(frozen=True)
class ClosedPageData:
    """Classifier inputs for one page, rows aligned to sorted field ids."""

    page_id: str
    x: np.ndarray
    y: np.ndarray | None
    field_ids: tuple[str, ...]


def closed_input_dim(h0_dim: int, hidden_dim: int | None) -> int:
    if hidden_dim is None:
        return h0_dim
    return h0_dim + hidden_dim


def build_closed_data(
    prep: PreparedPage,
    schema: RelationSchema,
    encoder: GATEncoder | None,
    labels: list[GoldLabel] | None = None,
) -> ClosedPageData:
    """Rows are [h0; hl] per field ([h0] alone when the encoder is ablated)."""
    ids = tuple(sorted(f.field_id for f in prep.page.fields))
    if encoder is not None:
        hl = encoder.encode(prep.h0, prep.graph)
        x = np.hstack([prep.h0, hl])
    else:
        x = prep.h0.copy()
    y = None
    if labels is not None:
        y = np.zeros(len(ids), dtype=np.int64)
        row = {fid: i for i, fid in enumerate(ids)}
        for g in labels:
            if g.object_field_id not in row:
                raise TrainingError(
                    f"gold object field {g.object_field_id!r} missing from page {prep.page.page_id!r}"
                )
            try:
                cls = schema.index_of(g.closed_name)
            except KeyError:
                raise TrainingError(
                    f"gold relation {g.closed_name!r} is not in the schema"
                ) from None
            y[row[g.object_field_id]] = cls
    return ClosedPageData(page_id=prep.page.page_id, x=x, y=y, field_ids=ids)


# -- training ---------------------------------------------------------------------


def train_closedie(
    data: list[ClosedPageData],
    schema: RelationSchema,
    seed: int,
    settings: TrainSettings = TrainSettings(),
    hidden_dim: int = CLOSED_HIDDEN_DIM,
) -> tuple[FeedForward, list[float]]:
    """Fit the per-field softmax head; the encoder stays frozen upstream."""
    if not data:
        raise TrainingError("no pages to train on")
    if any(d.y is None for d in data):
        raise TrainingError("closed training requires labeled pages")
    if sum(int((d.y > 0).sum()) for d in data) == 0:
        raise TrainingError("no labeled relation fields among the pages")
    rng = np.random.default_rng(np.random.PCG64(seed))
    head = FeedForward.init(
        rng, in_dim=data[0].x.shape[1], hidden_dim=hidden_dim,
        out_dim=schema.num_classes, dropout_rate=settings.dropout_rate,
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
            logits = head.forward(x, rng=rng, training=True)
            loss, _ = softmax_cross_entropy(logits, y)
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


# -- inference --------------------------------------------------------------------


def score_fields(head: FeedForward, x: np.ndarray) -> np.ndarray:
    """Per-field probability rows (softmax over the schema)."""
    if len(x) == 0:
        return np.zeros((0, head.w2.data.shape[0]))
    logits = head.forward(x, rng=None, training=False).data
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class ClosedExtraction:
    page_id: str
    subject: str
    relation: str
    object: str
    confidence: float
    field_id: str


def extract_closed(
    head: FeedForward,
    prep: PreparedPage,
    data: ClosedPageData,
    schema: RelationSchema,
    min_confidence: float = 0.0,
) -> list[ClosedExtraction]:
    """Argmax class per field; ties resolve to the lowest class index."""
    probs = score_fields(head, data.x)
    classes = probs.argmax(axis=1)
    page = prep.page
    out = []
    for fid, cls, row in zip(data.field_ids, classes, probs):
        if cls == 0:
            continue
        conf = float(row[cls])
        if conf < min_confidence:
            continue
        out.append(
            ClosedExtraction(
                page_id=page.page_id,
                subject=page.topic_entity,
                relation=schema.names[cls],
                object=page.field_by_id(fid).text,
                confidence=conf,
                field_id=fid,
            )
        )
    return out
