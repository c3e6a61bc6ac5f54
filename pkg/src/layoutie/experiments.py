"""Zero-shot experiment protocols: plans, scoring, baselines, and reports.

A plan names training and held-out sites, seeds, and ablations. Running
it produces an evaluation report plus an access audit proving which
sites were read in which phase, so level isolation is checkable after
the fact rather than taken on faith.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .closedie import (
    ClosedExtraction,
    RelationSchema,
    build_closed_data,
    extract_closed,
    train_closedie,
)
from .errors import PlanError
from .features import FeatureConfig, Task, build_feature_config
from .nn import FeedForward, GATEncoder
from .openie import (
    Extraction,
    build_pair_data,
    candidate_pairs,
    postprocess,
    score_extractions,
    train_openie,
)
from .pretrain import (
    AblationFlags,
    PreparedPage,
    TrainSettings,
    prepare_site,
    pretrain_encoder,
)
from .snapshot import PageSnapshot, SiteCorpus, normalize_text
from .synth import GoldLabel, generate_corpus, read_corpus, relation_schema

# per-task widths: the pair head stays small, the field classifier is wide
GAT_HIDDEN = {Task.OPENIE: 25, Task.CLOSEDIE: 200}
HEAD_HIDDEN = {Task.OPENIE: 100, Task.CLOSEDIE: 200}

# pair scoring must resolve bullet rows from label rows, which only separates
# late in training, so the open task runs hotter and longer than the closed one
DEFAULT_PRETRAIN_SETTINGS = {
    Task.OPENIE: TrainSettings(epochs=100, learning_rate=3e-3, patience=15),
    Task.CLOSEDIE: TrainSettings(epochs=40),
}
DEFAULT_TASK_SETTINGS = {
    Task.OPENIE: TrainSettings(epochs=100, learning_rate=0.01, patience=12),
    Task.CLOSEDIE: TrainSettings(epochs=200, learning_rate=0.01, patience=15),
}

DEFAULT_SEEDS = tuple(range(10))
THRESHOLD_GRID = tuple(round(0.01 * k, 2) for k in range(1, 100))


# -- corpus store with access audit ---------------------------------------------


class Phase(str, Enum):
    TRAIN = "train"
    THRESHOLD = "threshold"
    TEST = "test"


@dataclass(frozen=True)
class AccessRecord:
    phase: Phase
    site_id: str
    vertical_id: str


class CorpusStore:
    """Site corpora and gold labels behind a phase-tagged access log."""

    def __init__(
        self,
        corpora: dict[str, dict[str, SiteCorpus]],
        gold: dict[str, dict[str, list[GoldLabel]]],
    ):
        self._sites: dict[str, SiteCorpus] = {}
        self._gold: dict[str, list[GoldLabel]] = {}
        self._vertical: dict[str, str] = {}
        for vertical_id, sites in corpora.items():
            for site_id, corpus in sites.items():
                self._sites[site_id] = corpus
                self._vertical[site_id] = vertical_id
                self._gold[site_id] = list(gold.get(vertical_id, {}).get(site_id, []))
        self._audit: list[AccessRecord] = []

    @classmethod
    def generate(cls, root_seed: int = 0, **kwargs) -> "CorpusStore":
        corpora, gold = generate_corpus(root_seed=root_seed, **kwargs)
        return cls(corpora, gold)

    @classmethod
    def load(cls, root: Path) -> "CorpusStore":
        corpora, gold = read_corpus(root)
        return cls(corpora, gold)

    def site_ids(self) -> list[str]:
        return sorted(self._sites)

    def vertical_of(self, site_id: str) -> str:
        if site_id not in self._vertical:
            raise PlanError(f"unknown site {site_id!r}")
        return self._vertical[site_id]

    def corpus(self, site_id: str, phase: Phase) -> SiteCorpus:
        self._log(site_id, phase)
        return self._sites[site_id]

    def gold(self, site_id: str, phase: Phase) -> list[GoldLabel]:
        self._log(site_id, phase)
        return self._gold[site_id]

    def _log(self, site_id: str, phase: Phase) -> None:
        vertical = self.vertical_of(site_id)
        self._audit.append(AccessRecord(phase=phase, site_id=site_id, vertical_id=vertical))

    @property
    def audit(self) -> tuple[AccessRecord, ...]:
        return tuple(self._audit)

    def reset_audit(self) -> None:
        self._audit.clear()


# -- plans ------------------------------------------------------------------------


class Level(str, Enum):
    UNSEEN_VERTICAL = "I"
    UNSEEN_WEBSITE = "II"


@dataclass(frozen=True)
class ExperimentPlan:
    level: Level
    task: Task
    train_sites: tuple[str, ...]
    test_sites: tuple[str, ...]
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    ablate: AblationFlags = field(default_factory=AblationFlags)
    threshold: float | None = None


def validate_plan(plan: ExperimentPlan, store: CorpusStore) -> None:
    """Reject ill-formed plans before anything trains."""
    if not plan.train_sites:
        raise PlanError("plan names no training sites")
    if not plan.test_sites:
        raise PlanError("plan names no held-out sites")
    if not plan.seeds:
        raise PlanError("plan names no seeds")
    for sites, role in ((plan.train_sites, "training"), (plan.test_sites, "held-out")):
        if len(set(sites)) != len(sites):
            raise PlanError(f"duplicate {role} sites in plan")
    overlap = set(plan.train_sites) & set(plan.test_sites)
    if overlap:
        raise PlanError(f"sites {sorted(overlap)} appear as both training and held-out")
    train_verticals = {store.vertical_of(s) for s in plan.train_sites}
    test_verticals = {store.vertical_of(s) for s in plan.test_sites}
    if plan.level is Level.UNSEEN_VERTICAL:
        if plan.task is not Task.OPENIE:
            raise PlanError("the unseen-vertical protocol applies to open extraction only")
        shared = train_verticals & test_verticals
        if shared:
            raise PlanError(
                f"unseen-vertical plan trains on held-out vertical(s) {sorted(shared)}"
            )
    if plan.task is Task.CLOSEDIE and len(train_verticals | test_verticals) != 1:
        raise PlanError("closed extraction plans must stay within one vertical")
    if plan.threshold is not None and not 0.0 <= plan.threshold <= 1.0:
        raise PlanError(f"threshold {plan.threshold} outside [0, 1]")


_PLAN_KEYS = ("level", "task", "train", "test", "seeds", "ablate", "threshold")


def read_plan(path: str | Path) -> ExperimentPlan:
    """Parse a `key: value` plan file; unknown keys are rejected."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise PlanError(f"line {lineno}: expected `key: value`, got {line!r}")
        key, _, value = line.partition(":")
        key = key.strip()
        if key not in _PLAN_KEYS:
            raise PlanError(f"line {lineno}: unknown plan key {key!r}")
        if key in values:
            raise PlanError(f"line {lineno}: duplicate plan key {key!r}")
        values[key] = value.strip()
    for required in ("level", "task", "train", "test"):
        if required not in values:
            raise PlanError(f"plan file is missing the {required!r} key")
    try:
        level = Level(values["level"])
    except ValueError:
        raise PlanError(f"unknown level {values['level']!r}, expected I or II") from None
    try:
        task = Task(values["task"])
    except ValueError:
        raise PlanError(f"unknown task {values['task']!r}") from None
    seeds = DEFAULT_SEEDS
    if "seeds" in values:
        try:
            seeds = tuple(int(s) for s in _split(values["seeds"]))
        except ValueError:
            raise PlanError(f"seeds must be integers, got {values['seeds']!r}") from None
    try:
        ablate = AblationFlags.from_names(_split(values.get("ablate", "")))
    except ValueError as exc:
        raise PlanError(str(exc)) from None
    threshold = None
    if "threshold" in values:
        try:
            threshold = float(values["threshold"])
        except ValueError:
            raise PlanError(f"threshold must be a number, got {values['threshold']!r}") from None
    return ExperimentPlan(
        level=level,
        task=task,
        train_sites=tuple(_split(values["train"])),
        test_sites=tuple(_split(values["test"])),
        seeds=seeds,
        ablate=ablate,
        threshold=threshold,
    )


def write_plan(path: str | Path, plan: ExperimentPlan) -> None:
    lines = [
        f"level: {plan.level.value}",
        f"task: {plan.task.value}",
        f"train: {', '.join(plan.train_sites)}",
        f"test: {', '.join(plan.test_sites)}",
        f"seeds: {', '.join(str(s) for s in plan.seeds)}",
    ]
    names = plan.ablate.names()
    if names:
        lines.append(f"ablate: {', '.join(names)}")
    if plan.threshold is not None:
        lines.append(f"threshold: {plan.threshold}")
    Path(path).write_text("\n".join(lines) + "\n")


def _split(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


# -- scoring ----------------------------------------------------------------------


@dataclass(frozen=True)
class Score:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def score_from_counts(tp: int, fp: int, fn: int) -> Score:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Score(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


def lenient_match(extraction: Extraction, gold: GoldLabel) -> bool:
    """Object strings equal and relation among the gold surface forms.

    Comparison is exact after whitespace normalization; no case folding.
    """
    if normalize_text(extraction.object) != normalize_text(gold.object_string):
        return False
    surfaces = {normalize_text(s) for s in gold.relation_surfaces}
    return normalize_text(extraction.relation) in surfaces


def closed_match(extraction: ClosedExtraction, gold: GoldLabel) -> bool:
    """The labeled object field got the labeled relation name."""
    return (
        extraction.field_id == gold.object_field_id
        and extraction.relation == gold.closed_name
    )


def _extraction_key(e) -> tuple:
    rel_field = getattr(e, "relation_field_id", "")
    obj_field = getattr(e, "object_field_id", getattr(e, "field_id", ""))
    return (-e.confidence, e.page_id, rel_field, obj_field, e.relation, e.object)


def prf1(extractions: list, gold: list[GoldLabel], matcher=lenient_match) -> Score:
    """Greedy matching by descending confidence; each gold entry used once."""
    gold_by_page: dict[str, list[tuple[int, GoldLabel]]] = {}
    ordered_gold = sorted(
        enumerate(gold),
        key=lambda ig: (ig[1].page_id, ig[1].object_field_id, ig[1].relation_field_id),
    )
    for i, g in ordered_gold:
        gold_by_page.setdefault(g.page_id, []).append((i, g))
    used: set[int] = set()
    tp = fp = 0
    for e in sorted(extractions, key=_extraction_key):
        hit = None
        for i, g in gold_by_page.get(e.page_id, []):
            if i not in used and matcher(e, g):
                hit = i
                break
        if hit is None:
            fp += 1
        else:
            used.add(hit)
            tp += 1
    return score_from_counts(tp, fp, len(gold) - tp)


# -- colon baseline -----------------------------------------------------------------


def colon_baseline(page: PageSnapshot) -> list[Extraction]:
    """Colon-terminated fields paired with the nearest field right or below."""
    out: list[Extraction] = []
    for f in sorted(page.fields, key=lambda f: f.field_id):
        text = f.text.rstrip()
        if not text.endswith(":"):
            continue
        relation = text[:-1].rstrip()
        if not relation:
            continue
        obj = _nearest_right_or_below(page, f)
        if obj is None:
            continue
        out.append(
            Extraction(
                page_id=page.page_id,
                subject=page.topic_entity,
                relation=relation,
                object=obj.text,
                confidence=1.0,
                relation_field_id=f.field_id,
                object_field_id=obj.field_id,
            )
        )
    return out


def _nearest_right_or_below(page: PageSnapshot, anchor):
    acx, acy = anchor.bbox.center
    best = None  # (distance, preference, field_id, field); right preferred on ties
    for g in page.fields:
        if g.field_id == anchor.field_id:
            continue
        cx, cy = g.bbox.center
        y_overlap = min(anchor.bbox.y2, g.bbox.y2) - max(anchor.bbox.y, g.bbox.y)
        x_overlap = min(anchor.bbox.x2, g.bbox.x2) - max(anchor.bbox.x, g.bbox.x)
        right = y_overlap > 0 and cx > acx
        below = x_overlap > 0 and cy > acy
        if not (right or below):
            continue
        dist = float(np.hypot(cx - acx, cy - acy))
        key = (dist, 0 if right else 1, g.field_id)
        if best is None or key < best[:3]:
            best = (*key, g)
    return None if best is None else best[3]


# -- threshold selection -------------------------------------------------------------


@dataclass(frozen=True)
class ScoredPage:
    """All of one page's scored extractions before thresholding."""

    page: PageSnapshot
    raw: tuple


@dataclass(frozen=True)
class SiblingRun:
    """Scored pages plus gold for one threshold-selection site."""

    pages: tuple[ScoredPage, ...]
    gold: tuple[GoldLabel, ...]


def _apply_threshold(run: SiblingRun, threshold: float, task: Task) -> list:
    kept: list = []
    for sp in run.pages:
        passing = [e for e in sp.raw if e.confidence >= threshold]
        if task is Task.OPENIE:
            passing = postprocess(passing, sp.page)
        kept.extend(passing)
    return kept


def select_threshold(
    runs: list[SiblingRun], task: Task = Task.OPENIE, matcher=None
) -> float:
    """Grid argmax of mean F1 across sibling runs; ties take the lowest value."""
    if not runs:
        raise PlanError("threshold selection needs at least one sibling run")
    if matcher is None:
        matcher = lenient_match if task is Task.OPENIE else closed_match
    best_t, best_f1 = THRESHOLD_GRID[0], -1.0
    for t in THRESHOLD_GRID:
        f1s = [
            prf1(_apply_threshold(run, t, task), list(run.gold), matcher).f1
            for run in runs
        ]
        mean = statistics.fmean(f1s)
        if mean > best_f1:
            best_t, best_f1 = t, mean
    return best_t


# -- reports ----------------------------------------------------------------------


@dataclass(frozen=True)
class SiteScore:
    site_id: str
    score: Score


@dataclass(frozen=True)
class SeedResult:
    seed: int
    threshold: float
    sites: tuple[SiteScore, ...]
    overall: Score


@dataclass(frozen=True)
class EvalReport:
    metadata: dict[str, str]
    seeds: tuple[SeedResult, ...]
    audit: tuple[AccessRecord, ...]

    @property
    def mean_precision(self) -> float:
        return statistics.fmean(s.overall.precision for s in self.seeds)

    @property
    def mean_recall(self) -> float:
        return statistics.fmean(s.overall.recall for s in self.seeds)

    @property
    def mean_f1(self) -> float:
        return statistics.fmean(s.overall.f1 for s in self.seeds)

    def to_tsv(self) -> str:
        lines = [f"# {k}\t{v}" for k, v in self.metadata.items()]
        lines.append("seed\tsite\tthreshold\ttp\tfp\tfn\tprecision\trecall\tf1")
        for sr in self.seeds:
            rows = [*sr.sites, SiteScore(site_id="ALL", score=sr.overall)]
            for row in rows:
                s = row.score
                lines.append(
                    f"{sr.seed}\t{row.site_id}\t{sr.threshold:.2f}\t{s.tp}\t{s.fp}\t{s.fn}"
                    f"\t{s.precision:.4f}\t{s.recall:.4f}\t{s.f1:.4f}"
                )
        lines.append(
            f"mean\tALL\t-\t-\t-\t-\t{self.mean_precision:.4f}"
            f"\t{self.mean_recall:.4f}\t{self.mean_f1:.4f}"
        )
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        head = ", ".join(f"{k}={v}" for k, v in self.metadata.items())
        lines = [head]
        for sr in self.seeds:
            s = sr.overall
            lines.append(
                f"seed {sr.seed}: threshold {sr.threshold:.2f}"
                f" P {s.precision:.3f} R {s.recall:.3f} F1 {s.f1:.3f}"
            )
        lines.append(
            f"mean over {len(self.seeds)} seed(s):"
            f" P {self.mean_precision:.3f} R {self.mean_recall:.3f} F1 {self.mean_f1:.3f}"
        )
        return "\n".join(lines) + "\n"

    def audit_tsv(self) -> str:
        lines = ["phase\tsite\tvertical"]
        lines += [f"{r.phase.value}\t{r.site_id}\t{r.vertical_id}" for r in self.audit]
        return "\n".join(lines) + "\n"


def isolation_violations(
    plan: ExperimentPlan, store: CorpusStore, audit: tuple[AccessRecord, ...]
) -> list[AccessRecord]:
    """Audit records that break the unseen-vertical isolation contract."""
    if plan.level is not Level.UNSEEN_VERTICAL:
        return []
    held = {store.vertical_of(s) for s in plan.test_sites}
    return [r for r in audit if r.vertical_id in held and r.phase is not Phase.TEST]


# -- experiment runner ----------------------------------------------------------------


def sibling_sites(plan: ExperimentPlan, store: CorpusStore) -> tuple[str, ...]:
    """One threshold-selection site per training vertical.

    The last site (by id) of each vertical is held out of model training
    and scored to pick the decision threshold, so the held-out test sites
    stay unread until extraction. Verticals with a single training site
    cannot spare one.
    """
    by_vertical: dict[str, list[str]] = {}
    for s in plan.train_sites:
        by_vertical.setdefault(store.vertical_of(s), []).append(s)
    picked = [sorted(sites)[-1] for _, sites in sorted(by_vertical.items()) if len(sites) > 1]
    if not picked:
        raise PlanError(
            "threshold selection needs a training vertical with at least two sites;"
            " set an explicit threshold instead"
        )
    return tuple(picked)


@dataclass(frozen=True)
class _SeedModel:
    cfg: FeatureConfig
    encoder: GATEncoder | None
    head: FeedForward
    schema: RelationSchema | None


def _build_encoder(
    plan: ExperimentPlan,
    prepared: list[PreparedPage],
    cfg: FeatureConfig,
    seed: int,
    settings: TrainSettings,
) -> GATEncoder | None:
    if plan.ablate.no_gnn:
        return None
    if plan.ablate.no_pretrain:
        # untrained but frozen: isolates the value of the pretraining stage
        rng = np.random.default_rng(np.random.PCG64(seed))
        encoder = GATEncoder.init(
            rng, in_dim=cfg.node_dim(plan.task), hidden_dim=GAT_HIDDEN[plan.task]
        )
        encoder.freeze()
        return encoder
    result = pretrain_encoder(
        prepared, hidden_dim=GAT_HIDDEN[plan.task], seed=seed, settings=settings
    )
    return result.encoder


def _openie_site_data(
    store: CorpusStore,
    site_id: str,
    cfg: FeatureConfig,
    plan: ExperimentPlan,
    encoder: GATEncoder | None,
    phase: Phase,
    labeled: bool,
) -> list[tuple[PreparedPage, object]]:
    corpus = store.corpus(site_id, phase)
    gold = store.gold(site_id, phase) if labeled else []
    prepared = prepare_site(corpus, cfg, Task.OPENIE, plan.ablate, gold if labeled else None)
    gold_by_page: dict[str, set[tuple[str, str]]] = {}
    for g in gold:
        gold_by_page.setdefault(g.page_id, set()).add(
            (g.relation_field_id, g.object_field_id)
        )
    out = []
    for prep in prepared:
        cands = candidate_pairs(prep.page, corpus)
        pairs = gold_by_page.get(prep.page.page_id) if labeled else None
        out.append((prep, build_pair_data(prep, cands, encoder, pairs)))
    return out


def _closed_site_data(
    store: CorpusStore,
    site_id: str,
    cfg: FeatureConfig,
    plan: ExperimentPlan,
    encoder: GATEncoder | None,
    schema: RelationSchema,
    phase: Phase,
    labeled: bool,
) -> list[tuple[PreparedPage, object]]:
    corpus = store.corpus(site_id, phase)
    gold = store.gold(site_id, phase) if labeled else []
    prepared = prepare_site(corpus, cfg, Task.CLOSEDIE, plan.ablate, gold if labeled else None)
    gold_by_page: dict[str, list[GoldLabel]] = {}
    for g in gold:
        gold_by_page.setdefault(g.page_id, []).append(g)
    return [
        (
            prep,
            build_closed_data(
                prep,
                schema,
                encoder,
                labels=gold_by_page.get(prep.page.page_id, []) if labeled else None,
            ),
        )
        for prep in prepared
    ]


def _train_seed_model(
    plan: ExperimentPlan,
    store: CorpusStore,
    model_sites: tuple[str, ...],
    seed: int,
    pretrain_settings: TrainSettings,
    task_settings: TrainSettings,
) -> _SeedModel:
    corpora = [store.corpus(s, Phase.TRAIN) for s in model_sites]
    cfg = build_feature_config(corpora)
    prepared: list[PreparedPage] = []
    for site_id, corpus in zip(model_sites, corpora):
        gold = store.gold(site_id, Phase.TRAIN)
        prepared.extend(prepare_site(corpus, cfg, plan.task, plan.ablate, gold))
    encoder = _build_encoder(plan, prepared, cfg, seed, pretrain_settings)
    schema = None
    if plan.task is Task.OPENIE:
        data = []
        for site_id in model_sites:
            data.extend(
                d
                for _, d in _openie_site_data(
                    store, site_id, cfg, plan, encoder, Phase.TRAIN, labeled=True
                )
            )
        head, _ = train_openie(
            data, seed=seed, settings=task_settings, hidden_dim=HEAD_HIDDEN[plan.task]
        )
    else:
        vertical = store.vertical_of(model_sites[0])
        schema = RelationSchema.from_names(relation_schema(vertical))
        data = []
        for site_id in model_sites:
            data.extend(
                d
                for _, d in _closed_site_data(
                    store, site_id, cfg, plan, encoder, schema, Phase.TRAIN, labeled=True
                )
            )
        head, _ = train_closedie(
            data, schema, seed=seed, settings=task_settings, hidden_dim=HEAD_HIDDEN[plan.task]
        )
    return _SeedModel(cfg=cfg, encoder=encoder, head=head, schema=schema)


def _scored_site(
    plan: ExperimentPlan, store: CorpusStore, model: _SeedModel, site_id: str, phase: Phase
) -> tuple[list[ScoredPage], list[GoldLabel]]:
    gold = store.gold(site_id, phase)
    pages: list[ScoredPage] = []
    if plan.task is Task.OPENIE:
        site_data = _openie_site_data(
            store, site_id, model.cfg, plan, model.encoder, phase, labeled=False
        )
        for prep, data in site_data:
            raw = score_extractions(model.head, prep, data)
            pages.append(ScoredPage(page=prep.page, raw=tuple(raw)))
    else:
        site_data = _closed_site_data(
            store, site_id, model.cfg, plan, model.encoder, model.schema, phase, labeled=False
        )
        for prep, data in site_data:
            raw = extract_closed(model.head, prep, data, model.schema, min_confidence=0.0)
            pages.append(ScoredPage(page=prep.page, raw=tuple(raw)))
    return pages, gold


def run_experiment(
    plan: ExperimentPlan,
    store: CorpusStore,
    pretrain_settings: TrainSettings | None = None,
    task_settings: TrainSettings | None = None,
) -> EvalReport:
    """Train, pick a threshold, extract, and score, once per seed."""
    validate_plan(plan, store)
    if pretrain_settings is None:
        pretrain_settings = DEFAULT_PRETRAIN_SETTINGS[plan.task]
    if task_settings is None:
        task_settings = DEFAULT_TASK_SETTINGS[plan.task]
    store.reset_audit()
    matcher = lenient_match if plan.task is Task.OPENIE else closed_match
    siblings = () if plan.threshold is not None else sibling_sites(plan, store)
    model_sites = tuple(s for s in plan.train_sites if s not in siblings)

    seed_results: list[SeedResult] = []
    for seed in plan.seeds:
        model = _train_seed_model(
            plan, store, model_sites, seed, pretrain_settings, task_settings
        )
        if plan.threshold is not None:
            threshold = plan.threshold
        else:
            runs = []
            for site_id in siblings:
                pages, gold = _scored_site(plan, store, model, site_id, Phase.THRESHOLD)
                runs.append(SiblingRun(pages=tuple(pages), gold=tuple(gold)))
            threshold = select_threshold(runs, plan.task, matcher)
        site_scores: list[SiteScore] = []
        tp = fp = fn = 0
        for site_id in plan.test_sites:
            pages, gold = _scored_site(plan, store, model, site_id, Phase.TEST)
            run = SiblingRun(pages=tuple(pages), gold=tuple(gold))
            kept = _apply_threshold(run, threshold, plan.task)
            score = prf1(kept, gold, matcher)
            site_scores.append(SiteScore(site_id=site_id, score=score))
            tp, fp, fn = tp + score.tp, fp + score.fp, fn + score.fn
        seed_results.append(
            SeedResult(
                seed=seed,
                threshold=threshold,
                sites=tuple(site_scores),
                overall=score_from_counts(tp, fp, fn),
            )
        )

    metadata = {
        "level": plan.level.value,
        "task": plan.task.value,
        "train_sites": ",".join(plan.train_sites),
        "test_sites": ",".join(plan.test_sites),
        "seeds": ",".join(str(s) for s in plan.seeds),
        "ablate": ",".join(plan.ablate.names()) or "none",
        "threshold": "selected" if plan.threshold is None else f"{plan.threshold:.2f}",
        "sibling_sites": ",".join(siblings) or "none",
    }
    return EvalReport(metadata=metadata, seeds=tuple(seed_results), audit=store.audit)


def run_colon_baseline(store: CorpusStore, test_sites: tuple[str, ...]) -> EvalReport:
    """Score the colon heuristic on the given sites; no training involved."""
    if not test_sites:
        raise PlanError("no sites to evaluate")
    store.reset_audit()
    site_scores: list[SiteScore] = []
    tp = fp = fn = 0
    for site_id in test_sites:
        corpus = store.corpus(site_id, Phase.TEST)
        gold = store.gold(site_id, Phase.TEST)
        extractions: list[Extraction] = []
        for page in corpus.pages:
            extractions.extend(colon_baseline(page))
        score = prf1(extractions, gold, lenient_match)
        site_scores.append(SiteScore(site_id=site_id, score=score))
        tp, fp, fn = tp + score.tp, fp + score.fp, fn + score.fn
    result = SeedResult(
        seed=0, threshold=1.0, sites=tuple(site_scores), overall=score_from_counts(tp, fp, fn)
    )
    metadata = {
        "level": "I",
        "task": "openie",
        "runner": "colon-baseline",
        "test_sites": ",".join(test_sites),
    }
    return EvalReport(metadata=metadata, seeds=(result,), audit=store.audit)
