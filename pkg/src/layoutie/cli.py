"""Command-line entry point tying the pipeline into reproducible runs.

Every artifact-writing command also writes a ``*.manifest.json`` next to
its output with the input hashes, seed, and effective settings, so any
artifact can be re-derived and compared byte for byte. A ``--config``
JSON file supplies per-command defaults; explicit flags win; unknown
keys are rejected. ``LAYOUTIE_LOG`` sets the log level.

Exit codes: 0 success, 1 data or pipeline error (message on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint, write_manifest
from .closedie import (
    ClosedExtraction,
    RelationSchema,
    build_closed_data,
    extract_closed,
    train_closedie,
)
from .errors import CheckpointError, LayoutIEError
from .experiments import (
    DEFAULT_PRETRAIN_SETTINGS,
    DEFAULT_TASK_SETTINGS,
    GAT_HIDDEN,
    HEAD_HIDDEN,
    CorpusStore,
    Phase,
    closed_match,
    lenient_match,
    prf1,
    read_plan,
    run_colon_baseline,
    run_experiment,
)
from .features import Task, build_feature_config
from .layout_graph import build_layout_graph
from .nn import GATEncoder
from .openie import (
    Extraction,
    build_pair_data,
    candidate_pairs,
    extract_open,
    train_openie,
)
from .pretrain import AblationFlags, TrainSettings, prepare_site, pretrain_encoder
from .snapshot import compute_site_frequencies, parse_color, parse_snapshot, validate_page
from .synth import generate_corpus, read_gold_tsv, relation_schema, write_corpus

log = logging.getLogger("layoutie")

OPEN_COLUMNS = ("page_id", "subject", "relation", "object", "confidence",
                "relation_field_id", "object_field_id")
CLOSED_COLUMNS = ("page_id", "subject", "relation", "object", "confidence", "field_id")


def _configure_logging() -> None:
    level = os.environ.get("LAYOUTIE_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _split(value: str) -> list[str]:
    return [t.strip() for t in value.split(",") if t.strip()]


def _require(args: argparse.Namespace, *names: str) -> None:
    # required-but-config-fillable flags: argparse's required= would reject a
    # value that only the config file supplies, so the check runs after merging
    for name in names:
        if getattr(args, name.replace("-", "_")) is None:
            args.sub.error(f"--{name} is required")


def _ablation(args: argparse.Namespace) -> AblationFlags:
    if not getattr(args, "ablate", None):
        return AblationFlags()
    try:
        return AblationFlags.from_names(_split(args.ablate))
    except ValueError as exc:
        raise LayoutIEError(str(exc)) from None


def _palette(value: str | None):
    if value is None:
        return None
    return tuple(parse_color(tok) for tok in _split(value))


def _settings(base: TrainSettings, args: argparse.Namespace) -> TrainSettings:
    updates = {}
    if args.epochs is not None:
        updates["epochs"] = args.epochs
    if args.lr is not None:
        updates["learning_rate"] = args.lr
    if args.patience is not None:
        updates["patience"] = args.patience
    return replace(base, **updates)


def _build_cfg(args: argparse.Namespace, corpora):
    cfg = build_feature_config(corpora, embed_dim=args.embed_dim)
    palette = _palette(getattr(args, "palette", None))
    return cfg if palette is None else replace(cfg, color_palette=palette)


def _write_text(path: str | Path | None, text: str) -> Path | None:
    if path is None:
        sys.stdout.write(text)
        return None
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    return out


def _clean(cell: str) -> str:
    # keep the TSV one row per record even for hostile field text
    return cell.replace("\t", " ").replace("\n", " ")


# -- subcommand handlers ------------------------------------------------------


def _cmd_synth(args: argparse.Namespace) -> int:
    _require(args, "out")
    seed = args.seed if args.seed is not None else 0
    verticals = tuple(_split(args.verticals))
    corpora, gold = generate_corpus(
        root_seed=seed, verticals=verticals,
        sites_per_vertical=args.sites, pages_per_site=args.pages,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_corpus(out, corpora, gold)
    write_manifest(out, seed=seed, config={
        "verticals": list(verticals), "sites": args.sites, "pages": args.pages,
    })
    n_sites = sum(len(s) for s in corpora.values())
    n_pages = sum(len(c.pages) for s in corpora.values() for c in s.values())
    print(f"wrote {n_sites} sites, {n_pages} pages under {out}")
    return 0


def _cmd_ingest(args: argparse.Namespace) -> int:
    if not args.snapshots:
        args.sub.error("no snapshot files given")
    bad = 0
    for raw in args.snapshots:
        path = Path(raw)
        try:
            page = parse_snapshot(path.read_text())
        except LayoutIEError as exc:
            print(f"{path}: {exc}")
            bad += 1
            continue
        violations = validate_page(page)
        for v in violations:
            where = v.field_id or "page"
            print(f"{path}: {where}: {v.message}")
        bad += len(violations)
        if not violations:
            print(f"{path}: ok ({len(page.fields)} fields)")
    return 1 if bad else 0


def _cmd_graph(args: argparse.Namespace) -> int:
    page = parse_snapshot(Path(args.snapshot).read_text())
    graph = build_layout_graph(page)
    lines = ["src\tdst\ttype"]
    lines += [f"{u}\t{v}\t{t.value}" for u, v, t in
              sorted(graph.edges, key=lambda e: (e[0], e[1], e[2].value))]
    out = _write_text(args.out, "\n".join(lines) + "\n")
    if out is not None:
        write_manifest(out, inputs=[args.snapshot], config={"command": "graph"})
        print(f"{len(graph.edges)} edges -> {out}")
    return 0


def _load_store(args: argparse.Namespace) -> CorpusStore:
    root = Path(args.corpus)
    if not root.is_dir():
        raise LayoutIEError(f"corpus directory {root} does not exist")
    return CorpusStore.load(root)


def _train_inputs(args: argparse.Namespace, task: Task):
    """Shared setup for the training commands: store, sites, cfg, flags."""
    store = _load_store(args)
    sites = _split(args.train)
    if not sites:
        raise LayoutIEError("no training sites named")
    flags = _ablation(args)
    corpora = [store.corpus(s, Phase.TRAIN) for s in sites]
    cfg = _build_cfg(args, corpora)
    return store, sites, corpora, cfg, flags


def _hyperparameters(args: argparse.Namespace, settings: TrainSettings, **extra) -> dict:
    doc = {
        "epochs": settings.epochs,
        "learning_rate": settings.learning_rate,
        "patience": settings.patience,
        "embed_dim": args.embed_dim,
        "train_sites": _split(args.train),
        "ablate": _ablation(args).names(),
    }
    doc.update(extra)
    return doc


def _cmd_pretrain(args: argparse.Namespace) -> int:
    _require(args, "corpus", "train", "out")
    task = Task(args.task)
    store, sites, corpora, cfg, flags = _train_inputs(args, task)
    prepared = []
    for site_id, corpus in zip(sites, corpora):
        prepared.extend(prepare_site(corpus, cfg, task, flags, store.gold(site_id, Phase.TRAIN)))
    settings = _settings(DEFAULT_PRETRAIN_SETTINGS[task], args)
    hidden = args.hidden_dim or GAT_HIDDEN[task]
    seed = args.seed if args.seed is not None else 0
    result = pretrain_encoder(prepared, hidden_dim=hidden, seed=seed, settings=settings)
    out = save_checkpoint(
        args.out, cfg, task, result.encoder, seed=seed,
        hyperparameters=_hyperparameters(args, settings, hidden_dim=hidden),
    )
    write_manifest(out, inputs=[args.corpus], seed=seed,
                   config={"command": "pretrain", "task": task.value})
    print(f"pretrain accuracy {result.accuracy:.4f}; frozen encoder -> {out}")
    return 0


def _resolve_encoder(args, task, cfg, flags, prepared, seed, settings):
    """Encoder per the flags: reused, skipped, unfitted, or pretrained here."""
    if flags.no_gnn:
        return None, cfg
    if args.encoder is not None:
        ckpt = load_checkpoint(args.encoder)
        if ckpt.task is not task:
            raise CheckpointError(
                f"encoder checkpoint was pretrained for {ckpt.task.value}, not {task.value}"
            )
        if ckpt.encoder is None:
            raise CheckpointError("encoder checkpoint holds no encoder")
        return ckpt.encoder, ckpt.feature_config
    if flags.no_pretrain:
        rng = np.random.default_rng(np.random.PCG64(seed))
        encoder = GATEncoder.init(
            rng, in_dim=cfg.node_dim(task), hidden_dim=args.hidden_dim or GAT_HIDDEN[task]
        )
        encoder.freeze()
        return encoder, cfg
    result = pretrain_encoder(
        prepared, hidden_dim=args.hidden_dim or GAT_HIDDEN[task], seed=seed,
        settings=settings,
    )
    log.info("pretrain accuracy %.4f", result.accuracy)
    return result.encoder, cfg


def _cmd_train_openie(args: argparse.Namespace) -> int:
    _require(args, "corpus", "train", "out")
    task = Task.OPENIE
    store, sites, corpora, cfg, flags = _train_inputs(args, task)
    seed = args.seed if args.seed is not None else 0

    gold_by_site = {s: store.gold(s, Phase.TRAIN) for s in sites}
    prepared_by_site = {
        s: prepare_site(c, cfg, task, flags, gold_by_site[s])
        for s, c in zip(sites, corpora)
    }
    encoder, cfg = _resolve_encoder(
        args, task, cfg, flags,
        [p for site in sites for p in prepared_by_site[site]],
        seed, DEFAULT_PRETRAIN_SETTINGS[task],
    )
    if args.encoder is not None:
        # the reused encoder fixes the vocabulary; features must be rebuilt with it
        prepared_by_site = {
            s: prepare_site(c, cfg, task, flags, gold_by_site[s])
            for s, c in zip(sites, corpora)
        }

    data = []
    for site_id, corpus in zip(sites, corpora):
        gold_by_page: dict[str, set[tuple[str, str]]] = {}
        for g in gold_by_site[site_id]:
            gold_by_page.setdefault(g.page_id, set()).add(
                (g.relation_field_id, g.object_field_id)
            )
        for prep in prepared_by_site[site_id]:
            cands = candidate_pairs(prep.page, corpus)
            data.append(build_pair_data(
                prep, cands, encoder, gold_by_page.get(prep.page.page_id, set())
            ))

    settings = _settings(DEFAULT_TASK_SETTINGS[task], args)
    head, losses = train_openie(
        data, seed=seed, settings=settings,
        hidden_dim=HEAD_HIDDEN[task], negative_ratio=args.negative_ratio,
    )
    out = save_checkpoint(
        args.out, cfg, task, encoder, head, seed=seed,
        hyperparameters=_hyperparameters(args, settings, negative_ratio=args.negative_ratio),
    )
    inputs = [args.corpus] + ([args.encoder] if args.encoder else [])
    write_manifest(out, inputs=inputs, seed=seed,
                   config={"command": "train-openie"})
    print(f"trained pair scorer on {len(data)} pages"
          f" (final loss {losses[-1]:.4f}) -> {out}")
    return 0


def _cmd_train_closedie(args: argparse.Namespace) -> int:
    _require(args, "corpus", "train", "out")
    task = Task.CLOSEDIE
    store, sites, corpora, cfg, flags = _train_inputs(args, task)
    seed = args.seed if args.seed is not None else 0

    verticals = {store.vertical_of(s) for s in sites}
    if len(verticals) != 1:
        raise LayoutIEError(
            f"closed training needs sites from one vertical, got {sorted(verticals)}"
        )
    schema = RelationSchema.from_names(relation_schema(verticals.pop()))

    gold_by_site = {s: store.gold(s, Phase.TRAIN) for s in sites}
    prepared_by_site = {
        s: prepare_site(c, cfg, task, flags, gold_by_site[s])
        for s, c in zip(sites, corpora)
    }
    encoder, cfg = _resolve_encoder(
        args, task, cfg, flags,
        [p for site in sites for p in prepared_by_site[site]],
        seed, DEFAULT_PRETRAIN_SETTINGS[task],
    )
    if args.encoder is not None:
        prepared_by_site = {
            s: prepare_site(c, cfg, task, flags, gold_by_site[s])
            for s, c in zip(sites, corpora)
        }

    data = []
    for site_id in sites:
        gold_by_page: dict[str, list] = {}
        for g in gold_by_site[site_id]:
            gold_by_page.setdefault(g.page_id, []).append(g)
        for prep in prepared_by_site[site_id]:
            data.append(build_closed_data(
                prep, schema, encoder, labels=gold_by_page.get(prep.page.page_id, [])
            ))

    settings = _settings(DEFAULT_TASK_SETTINGS[task], args)
    head, losses = train_closedie(
        data, schema, seed=seed, settings=settings, hidden_dim=HEAD_HIDDEN[task]
    )
    out = save_checkpoint(
        args.out, cfg, task, encoder, head, seed=seed,
        relations=schema.names,
        hyperparameters=_hyperparameters(args, settings),
    )
    inputs = [args.corpus] + ([args.encoder] if args.encoder else [])
    write_manifest(out, inputs=inputs, seed=seed,
                   config={"command": "train-closedie"})
    print(f"trained field classifier on {len(data)} pages"
          f" (final loss {losses[-1]:.4f}) -> {out}")
    return 0


def _extract_corpus(args: argparse.Namespace):
    """The pages to extract from, plus their site-frequency table."""
    if args.corpus is not None:
        if args.site is None:
            args.sub.error("--site is required with --corpus")
        return _load_store(args).corpus(args.site, Phase.TEST), [args.corpus]
    if args.snapshots:
        pages = [parse_snapshot(Path(p).read_text()) for p in args.snapshots]
        return compute_site_frequencies(pages), list(args.snapshots)
    args.sub.error("extract needs --corpus with --site, or snapshot files")


def _cmd_extract(args: argparse.Namespace) -> int:
    _require(args, "model")
    ckpt = load_checkpoint(args.model)
    if ckpt.head is None:
        raise CheckpointError("checkpoint holds no task head; train one first")
    corpus, input_paths = _extract_corpus(args)
    prepared = prepare_site(corpus, ckpt.feature_config, ckpt.task)

    rows: list[tuple] = []
    if ckpt.task is Task.OPENIE:
        threshold = args.threshold if args.threshold is not None else 0.5
        header = OPEN_COLUMNS
        for prep in prepared:
            cands = candidate_pairs(prep.page, corpus)
            data = build_pair_data(prep, cands, ckpt.encoder)
            for e in extract_open(ckpt.head, prep, data, threshold):
                rows.append((e.page_id, e.subject, e.relation, e.object,
                             f"{e.confidence:.6f}", e.relation_field_id, e.object_field_id))
    else:
        if ckpt.relations is None:
            raise CheckpointError("closed checkpoint lacks its relation schema")
        schema = RelationSchema(ckpt.relations)
        threshold = args.threshold if args.threshold is not None else 0.0
        header = CLOSED_COLUMNS
        for prep in prepared:
            data = build_closed_data(prep, schema, ckpt.encoder)
            for e in extract_closed(ckpt.head, prep, data, schema, min_confidence=threshold):
                rows.append((e.page_id, e.subject, e.relation, e.object,
                             f"{e.confidence:.6f}", e.field_id))

    lines = ["\t".join(header)]
    lines += ["\t".join(_clean(str(c)) for c in row) for row in rows]
    out = _write_text(args.out, "\n".join(lines) + "\n")
    if out is not None:
        write_manifest(out, inputs=[args.model, *input_paths],
                       config={"command": "extract", "threshold": threshold})
        print(f"{len(rows)} extractions -> {out}")
    return 0


def _read_extractions(path: Path):
    lines = path.read_text().splitlines()
    if not lines:
        raise LayoutIEError(f"{path} is empty")
    header = tuple(lines[0].split("\t"))
    if header == OPEN_COLUMNS:
        closed = False
    elif header == CLOSED_COLUMNS:
        closed = True
    else:
        raise LayoutIEError(f"{path} does not look like an extraction table")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != len(header):
            raise LayoutIEError(f"{path} line {lineno}: expected {len(header)} columns")
        if closed:
            out.append(ClosedExtraction(
                page_id=cells[0], subject=cells[1], relation=cells[2],
                object=cells[3], confidence=float(cells[4]), field_id=cells[5],
            ))
        else:
            out.append(Extraction(
                page_id=cells[0], subject=cells[1], relation=cells[2],
                object=cells[3], confidence=float(cells[4]),
                relation_field_id=cells[5], object_field_id=cells[6],
            ))
    return out, closed


def _cmd_evaluate(args: argparse.Namespace) -> int:
    _require(args, "extractions", "gold")
    extractions, closed = _read_extractions(Path(args.extractions))
    gold = read_gold_tsv(Path(args.gold))
    score = prf1(extractions, gold, closed_match if closed else lenient_match)
    text = ("tp\tfp\tfn\tprecision\trecall\tf1\n"
            f"{score.tp}\t{score.fp}\t{score.fn}"
            f"\t{score.precision:.4f}\t{score.recall:.4f}\t{score.f1:.4f}\n")
    print(f"P {score.precision:.4f}  R {score.recall:.4f}  F1 {score.f1:.4f}"
          f"  (tp {score.tp}, fp {score.fp}, fn {score.fn})")
    if args.out is not None:
        out = _write_text(args.out, text)
        write_manifest(out, inputs=[args.extractions, args.gold],
                       config={"command": "evaluate"})
    return 0


def _parse_seeds(value: str) -> tuple[int, ...]:
    tokens = _split(value)
    try:
        numbers = [int(t) for t in tokens]
    except ValueError:
        raise LayoutIEError(f"seeds must be integers, got {value!r}") from None
    if len(numbers) == 1:
        # a single number is a count: `--seeds 3` runs seeds 0, 1, 2
        return tuple(range(numbers[0]))
    return tuple(numbers)


def _write_report(args: argparse.Namespace, report, command: str, inputs: list) -> int:
    if args.out is None:
        sys.stdout.write(report.to_tsv())
        return 0
    out = _write_text(args.out, report.to_tsv())
    audit = out.with_suffix(".audit.tsv")
    audit.write_text(report.audit_tsv())
    for artifact in (out, audit):
        write_manifest(artifact, inputs=inputs, config={"command": command})
    sys.stdout.write(report.summary())
    print(f"report -> {out}; access audit -> {audit}")
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    _require(args, "corpus", "plan")
    store = _load_store(args)
    plan = read_plan(args.plan)
    if args.seeds is not None:
        plan = replace(plan, seeds=_parse_seeds(args.seeds))
    if args.threshold is not None:
        plan = replace(plan, threshold=args.threshold)
    if args.ablate is not None:
        plan = replace(plan, ablate=_ablation(args))
    report = run_experiment(plan, store)
    return _write_report(args, report, "experiment", [args.plan, args.corpus])


def _cmd_baseline_colon(args: argparse.Namespace) -> int:
    _require(args, "corpus", "sites")
    store = _load_store(args)
    report = run_colon_baseline(store, tuple(_split(args.sites)))
    return _write_report(args, report, "baseline-colon", [args.corpus])


# -- parser -------------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="layoutie",
        description="Relation extraction from rendered-page snapshots via layout graphs.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    subs: dict[str, argparse.ArgumentParser] = {}

    def command(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", help="JSON file with defaults for this command;"
                                          " explicit flags win")
        sub.set_defaults(handler=handler, sub=sub)
        subs[name] = sub
        return sub

    def training_flags(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--corpus", help="corpus directory (as written by synth)")
        sub.add_argument("--train", help="comma-separated training site ids")
        sub.add_argument("--out", help="checkpoint path to write")
        sub.add_argument("--seed", type=int, help="training seed (default 0)")
        sub.add_argument("--epochs", type=int, help="override the default epoch budget")
        sub.add_argument("--lr", type=float, help="override the default learning rate")
        sub.add_argument("--patience", type=int, help="early-stop patience override")
        sub.add_argument("--ablate", help="comma-separated ablation flags, e.g. no_gnn")
        sub.add_argument("--embed-dim", type=int, default=32,
                         help="hashed bag-of-words width (closed task only)")
        sub.add_argument("--palette", help="comma-separated #RRGGBB anchors"
                                           " replacing the color palette")

    sub = command("synth", _cmd_synth, "generate the synthetic benchmark corpus")
    sub.add_argument("--out", help="directory to write the corpus into")
    sub.add_argument("--seed", type=int, help="root seed (default 0)")
    sub.add_argument("--verticals", default="movie,player,university",
                     help="comma-separated vertical names")
    sub.add_argument("--sites", type=int, default=6, help="sites per vertical")
    sub.add_argument("--pages", type=int, default=40, help="pages per site")

    sub = command("ingest", _cmd_ingest, "validate snapshot documents")
    sub.add_argument("snapshots", nargs="*", help="snapshot JSON files")

    sub = command("graph", _cmd_graph, "export a page's layout graph as TSV")
    sub.add_argument("snapshot", help="snapshot JSON file")
    sub.add_argument("--out", help="TSV path (default: stdout)")

    sub = command("pretrain", _cmd_pretrain, "pretrain and freeze the graph encoder")
    training_flags(sub)
    sub.add_argument("--task", choices=[t.value for t in Task], default=Task.OPENIE.value,
                     help="which task's feature layout to encode")
    sub.add_argument("--hidden-dim", type=int, help="encoder hidden width override")

    for name, handler in (("train-openie", _cmd_train_openie),
                          ("train-closedie", _cmd_train_closedie)):
        sub = command(name, handler, f"train the {name.split('-')[1]} head"
                                     " (pretrains the encoder unless one is given)")
        training_flags(sub)
        sub.add_argument("--encoder", help="reuse a pretrained encoder checkpoint")
        sub.add_argument("--hidden-dim", type=int, help="encoder hidden width override")
        if name == "train-openie":
            sub.add_argument("--negative-ratio", type=int, default=5,
                             help="negatives kept per positive pair")

    sub = command("extract", _cmd_extract, "run a trained model over pages")
    sub.add_argument("snapshots", nargs="*", help="snapshot JSON files")
    sub.add_argument("--model", help="checkpoint to load")
    sub.add_argument("--corpus", help="corpus directory holding --site")
    sub.add_argument("--site", help="site id within --corpus")
    sub.add_argument("--threshold", type=float,
                     help="confidence cutoff (default 0.5 open, 0.0 closed)")
    sub.add_argument("--out", help="TSV path (default: stdout)")

    sub = command("evaluate", _cmd_evaluate, "score an extraction table against gold")
    sub.add_argument("--extractions", help="TSV written by extract")
    sub.add_argument("--gold", help="gold.tsv for the same site")
    sub.add_argument("--out", help="TSV path for the scores")

    sub = command("experiment", _cmd_experiment, "run an experiment plan file")
    sub.add_argument("--corpus", help="corpus directory")
    sub.add_argument("--plan", help="plan file (key: value lines)")
    sub.add_argument("--seeds", help="seed count, or comma-separated seed list")
    sub.add_argument("--threshold", type=float, help="fixed decision threshold")
    sub.add_argument("--ablate", help="override the plan's ablation flags")
    sub.add_argument("--out", help="report TSV path (default: stdout)")

    sub = command("baseline-colon", _cmd_baseline_colon,
                  "score the colon heuristic on test sites")
    sub.add_argument("--corpus", help="corpus directory")
    sub.add_argument("--sites", help="comma-separated site ids to score")
    sub.add_argument("--out", help="report TSV path (default: stdout)")

    return parser, subs


def _config_path(argv: list[str]) -> str | None:
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def _read_config(path: str, sub: argparse.ArgumentParser) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise LayoutIEError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise LayoutIEError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise LayoutIEError(f"config {path} must hold a JSON object")
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    out = {}
    for key, value in doc.items():
        dest = key.replace("-", "_")
        if dest not in actions:
            raise LayoutIEError(f"config {path}: unknown key {key!r}")
        action = actions[dest]
        # config values written as strings go through the flag's converter
        if isinstance(value, str) and callable(action.type):
            value = action.type(value)
        out[dest] = value
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    _configure_logging()
    parser, subs = build_parser()
    try:
        config = _config_path(argv)
        if config is not None:
            name = next((t for t in argv if not t.startswith("-")), None)
            if name in subs:
                subs[name].set_defaults(**_read_config(config, subs[name]))
        args = parser.parse_args(argv)
        return args.handler(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except LayoutIEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
