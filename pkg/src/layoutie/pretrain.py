"""Encoder pretraining on the auxiliary field-classification objective.

Every text field is labeled Relation, Object, or Other from the gold
pairs (a field playing both roles counts as Relation). A linear softmax
readout is trained jointly with the graph encoder on mean cross entropy
over all fields of all training pages; afterwards the readout is thrown
away and the encoder is frozen for downstream task heads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import TrainingError
from .features import FeatureConfig, Task, node_input_features
from .layout_graph import EdgeType, build_layout_graph, filter_edges
from .nn import (
    Adam,
    CompiledGraph,
    GATEncoder,
    compile_graph,
    merge_graphs,
    softmax_cross_entropy,
    xavier_uniform,
    zero_grads,
)
from .snapshot import PageSnapshot, SiteCorpus
from .synth import GoldLabel
from .tensor import Tensor


class FieldClass(IntEnum):
    RELATION = 0
    OBJECT = 1
    OTHER = 2


def derive_field_classes(page: PageSnapshot, labels: list[GoldLabel]) -> np.ndarray:
    """Class index per field, aligned with page.fields order."""
    relation_ids = {g.relation_field_id for g in labels if g.page_id == page.page_id}
    object_ids = {g.object_field_id for g in labels if g.page_id == page.page_id}
    out = np.full(len(page.fields), int(FieldClass.OTHER), dtype=np.int64)
    for k, f in enumerate(page.fields):
        if f.field_id in relation_ids:
            out[k] = int(FieldClass.RELATION)
        elif f.field_id in object_ids:
            out[k] = int(FieldClass.OBJECT)
    return out


# -- page preparation ----------------------------------------------------------


@dataclass(frozen=True)
class AblationFlags:
    """Which parts of the model to disable for an experiment variant."""

    no_gnn: bool = False
    no_pretrain: bool = False
    no_dom_edges: bool = False
    no_spatial_edges: bool = False
    no_visual_features: bool = False
    no_text_features: bool = False

    @classmethod
    def from_names(cls, names: list[str] | tuple[str, ...]) -> "AblationFlags":
        known = {f for f in cls.__dataclass_fields__}
        bad = [n for n in names if n not in known]
        if bad:
            raise ValueError(f"unknown ablation flags: {bad}")
        return cls(**{n: True for n in names})

    def names(self) -> list[str]:
        return [n for n in sorted(self.__dataclass_fields__) if getattr(self, n)]


@dataclass(frozen=True)
class PreparedPage:
    """Everything a trainer needs for one page, computed once."""

    page: PageSnapshot
    h0: np.ndarray
    graph: CompiledGraph
    classes: np.ndarray | None = None


def prepare_page(
    page: PageSnapshot,
    corpus: SiteCorpus,
    cfg: FeatureConfig,
    task: Task,
    ablate: AblationFlags = AblationFlags(),
    labels: list[GoldLabel] | None = None,
) -> PreparedPage:
    h0 = np.stack([node_input_features(f, page, corpus, cfg, task) for f in page.fields])
    if ablate.no_visual_features:
        h0[:, : cfg.visual_dim] = 0.0
    if ablate.no_text_features:
        h0[:, cfg.visual_dim :] = 0.0
    graph = build_layout_graph(page)
    keep = set(EdgeType)
    if ablate.no_dom_edges:
        keep.discard(EdgeType.DOM)
    if ablate.no_spatial_edges:
        keep -= {EdgeType.HORIZONTAL, EdgeType.VERTICAL}
    if keep != set(EdgeType):
        graph = filter_edges(graph, keep)
    compiled = compile_graph(graph)
    # compile_graph indexes nodes by sorted field_id; remap h0 rows to match
    order = {f.field_id: i for i, f in enumerate(page.fields)}
    sort_index = [order[n] for n in sorted(order)]
    h0 = h0[sort_index]
    classes = None
    if labels is not None:
        classes = derive_field_classes(page, labels)[sort_index]
    return PreparedPage(page=page, h0=h0, graph=compiled, classes=classes)


def prepare_site(
    corpus: SiteCorpus,
    cfg: FeatureConfig,
    task: Task,
    ablate: AblationFlags = AblationFlags(),
    labels: list[GoldLabel] | None = None,
) -> list[PreparedPage]:
    by_page: dict[str, list[GoldLabel]] = {}
    for g in labels or []:
        by_page.setdefault(g.page_id, []).append(g)
    return [
        prepare_page(p, corpus, cfg, task, ablate, by_page.get(p.page_id, []) if labels is not None else None)
        for p in corpus.pages
    ]


def field_order(page: PageSnapshot) -> list[str]:
    """Node order used by PreparedPage rows: field ids sorted ascending."""
    return sorted(f.field_id for f in page.fields)


# -- training loop -------------------------------------------------------------


@dataclass(frozen=True)
class TrainSettings:
    """Shared optimizer and schedule knobs."""

    epochs: int = 20
    patience: int = 3
    min_delta: float = 1e-4
    learning_rate: float = 1e-3
    batch_pages: int = 20
    dropout_rate: float = 0.25


@dataclass
class PretrainResult:
    encoder: GATEncoder
    epoch_losses: list[float]
    accuracy: float


def _early_stop(losses: list[float], patience: int, min_delta: float) -> bool:
    """True when the last `patience` epochs failed to beat the prior best."""
    if len(losses) <= patience:
        return False
    best_before = min(losses[:-patience])
    recent = losses[-patience:]
    return all(l > best_before - min_delta for l in recent)


def _batches(n: int, size: int, rng: np.random.Generator) -> list[np.ndarray]:
    perm = rng.permutation(n)
    return [perm[i : i + size] for i in range(0, n, size)]


def _track_best(params: dict, losses: list[float], best: dict | None) -> dict:
    """Keep a copy of the weights from the lowest-loss epoch seen so far."""
    if best is None or losses[-1] == min(losses):
        return {k: p.data.copy() for k, p in params.items()}
    return best


def _restore_best(params: dict, best: dict) -> None:
    for k, p in params.items():
        p.data = best[k]


def pretrain_encoder(
    prepared: list[PreparedPage],
    hidden_dim: int,
    seed: int,
    settings: TrainSettings = TrainSettings(),
    num_layers: int = 2,
) -> PretrainResult:
    """Train encoder + linear readout, then freeze the encoder.

    Stops early when training loss has not improved by min_delta for
    `patience` consecutive epochs.
    """
    if not prepared:
        raise TrainingError("no pages to pretrain on")
    if any(p.classes is None for p in prepared):
        raise TrainingError("pretraining requires field classes on every page")
    rng = np.random.default_rng(np.random.PCG64(seed))
    in_dim = prepared[0].h0.shape[1]
    encoder = GATEncoder.init(rng, in_dim, hidden_dim, num_layers, settings.dropout_rate)
    w_pre = Tensor(xavier_uniform(rng, (len(FieldClass), hidden_dim)), requires_grad=True)
    params = encoder.params() | {"pre.w": w_pre}
    opt = Adam(lr=settings.learning_rate)

    losses: list[float] = []
    best: dict | None = None
    for _ in range(settings.epochs):
        total, count = 0.0, 0
        for batch in _batches(len(prepared), settings.batch_pages, rng):
            pages = [prepared[i] for i in batch]
            h0 = np.vstack([p.h0 for p in pages])
            graph = merge_graphs([p.graph for p in pages])
            labels = np.concatenate([p.classes for p in pages])
            h = encoder.forward(h0, graph, rng=rng, training=True)
            w_t = Tensor._node(w_pre.data.T, (w_pre,), lambda g: w_pre._accumulate(g.T))
            loss, _ = softmax_cross_entropy(h @ w_t, labels)
            zero_grads(params)
            loss.backward()
            opt.step(params)
            total += float(loss.data) * len(labels)
            count += len(labels)
        losses.append(total / count)
        best = _track_best(params, losses, best)
        if _early_stop(losses, settings.patience, settings.min_delta):
            break
    _restore_best(params, best)

    # final fit quality, dropout off
    correct, seen = 0, 0
    for p in prepared:
        h = encoder.encode(p.h0, p.graph)
        pred = np.argmax(h @ w_pre.data.T, axis=1)
        correct += int(np.sum(pred == p.classes))
        seen += len(p.classes)
    encoder.freeze()
    return PretrainResult(encoder=encoder, epoch_losses=losses, accuracy=correct / seen)
