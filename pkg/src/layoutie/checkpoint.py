"""Versioned model checkpoints and reproducibility manifests.

A checkpoint is one JSON document carrying everything inference needs:
the frozen feature vocabulary, encoder and head parameters, the slot
manifest, and the seed and hyperparameters that produced them. Nothing
wall-clock-dependent goes in, so re-running a plan with the same seed
writes byte-identical files. The encoder block records a content hash
over its parameters; a checkpoint whose weights no longer match the
hash is rejected on load.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import CheckpointError
from .features import FeatureConfig, Task, slot_map
from .nn import FeedForward, GATEncoder, GATLayer

FORMAT = "layoutie-checkpoint"
VERSION = 1
MANIFEST_SUFFIX = ".manifest.json"


def params_digest(params: Mapping[str, Any]) -> str:
    """sha256 over parameter names, shapes, and raw float64 bytes."""
    h = hashlib.sha256()
    for name in sorted(params):
        arr = np.ascontiguousarray(params[name].data, dtype=np.float64)
        h.update(name.encode())
        h.update(repr(arr.shape).encode())
        h.update(arr.tobytes())
    return h.hexdigest()


def _array(value: Any, what: str) -> np.ndarray:
    try:
        return np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CheckpointError(f"{what} is not a numeric array: {exc}") from None


@dataclass(frozen=True)
class Checkpoint:
    """Deserialized model state, weights already verified against the hash."""

    feature_config: FeatureConfig
    task: Task
    encoder: GATEncoder | None
    head: FeedForward | None
    metadata: dict
    relations: tuple[str, ...] | None = None


def save_checkpoint(
    path: str | Path,
    cfg: FeatureConfig,
    task: Task,
    encoder: GATEncoder | None,
    head: FeedForward | None = None,
    *,
    seed: int,
    hyperparameters: Mapping[str, Any] | None = None,
    relations: Iterable[str] | None = None,
) -> Path:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "task": task.value,
        "feature_config": {
            "typeface_vocab": list(cfg.typeface_vocab),
            "color_palette": [list(c) for c in cfg.color_palette],
            "embed_dim": cfg.embed_dim,
            "normalize_coords": cfg.normalize_coords,
        },
        "slots": slot_map(cfg, task),
        # an ablated model may run with no encoder at all; record that honestly
        "encoder": None if encoder is None else {
            "frozen": encoder.frozen,
            "dropout_rate": encoder.dropout_rate,
            "layers": [
                {"w": layer.w.data.tolist(), "a": layer.a.data.tolist()}
                for layer in encoder.layers
            ],
            "content_hash": params_digest(encoder.params()),
        },
        "head": None if head is None else {
            "dropout_rate": head.dropout_rate,
            "w1": head.w1.data.tolist(),
            "b1": head.b1.data.tolist(),
            "w2": head.w2.data.tolist(),
            "b2": head.b2.data.tolist(),
            "content_hash": params_digest(head.params("head")),
        },
        "relations": None if relations is None else list(relations),
        "metadata": {
            "seed": seed,
            "hyperparameters": dict(hyperparameters or {}),
        },
    }
    path = Path(path)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return path


def _require(doc: Mapping[str, Any], key: str) -> Any:
    if key not in doc:
        raise CheckpointError(f"checkpoint is missing {key!r}")
    return doc[key]


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise CheckpointError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CheckpointError(f"{path} is not a {FORMAT} file")
    if doc.get("version") != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {doc.get('version')!r}")

    raw_cfg = _require(doc, "feature_config")
    try:
        cfg = FeatureConfig(
            typeface_vocab=tuple(raw_cfg["typeface_vocab"]),
            color_palette=tuple(tuple(c) for c in raw_cfg["color_palette"]),
            embed_dim=int(raw_cfg["embed_dim"]),
            normalize_coords=bool(raw_cfg["normalize_coords"]),
        )
        task = Task(_require(doc, "task"))
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed feature config or task: {exc}") from None
    if _require(doc, "slots") != slot_map(cfg, task):
        raise CheckpointError("slot manifest does not match the feature config")

    encoder = None
    raw_enc = _require(doc, "encoder")
    if raw_enc is not None:
        layers = [
            GATLayer(_array(l.get("w"), "encoder W"), _array(l.get("a"), "encoder a"))
            for l in raw_enc.get("layers", [])
        ]
        if not layers:
            raise CheckpointError("checkpoint has no encoder layers")
        encoder = GATEncoder(layers, dropout_rate=float(raw_enc.get("dropout_rate", 0.0)))
        if params_digest(encoder.params()) != raw_enc.get("content_hash"):
            raise CheckpointError("encoder weights do not match their content hash")
        if raw_enc.get("frozen"):
            encoder.freeze()

    head = None
    raw_head = doc.get("head")
    if raw_head is not None:
        head = FeedForward(
            _array(raw_head.get("w1"), "head w1"),
            _array(raw_head.get("b1"), "head b1"),
            _array(raw_head.get("w2"), "head w2"),
            _array(raw_head.get("b2"), "head b2"),
            dropout_rate=float(raw_head.get("dropout_rate", 0.0)),
        )
        if params_digest(head.params("head")) != raw_head.get("content_hash"):
            raise CheckpointError("head weights do not match their content hash")

    relations = doc.get("relations")
    return Checkpoint(
        feature_config=cfg,
        task=task,
        encoder=encoder,
        head=head,
        metadata=dict(_require(doc, "metadata")),
        relations=None if relations is None else tuple(relations),
    )


# -- artifact manifests -------------------------------------------------------


def file_digest(path: str | Path) -> str:
    """sha256 of a file, or of a directory's sorted (relative path, bytes) walk."""
    path = Path(path)
    if path.is_dir():
        h = hashlib.sha256()
        for p in sorted(path.rglob("*")):
            if p.is_file():
                h.update(p.relative_to(path).as_posix().encode())
                h.update(hashlib.sha256(p.read_bytes()).digest())
        return h.hexdigest()
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(
    artifact: str | Path,
    *,
    inputs: Iterable[str | Path] = (),
    seed: int | None = None,
    config: Mapping[str, Any] | None = None,
) -> Path:
    """Record next to an artifact what went into producing it.

    The manifest holds the artifact's own hash, every input's hash, the
    seed, and the effective config: enough to re-run the command and
    compare outputs bit for bit.
    """
    artifact = Path(artifact)
    doc = {
        "artifact": {"path": artifact.name, "sha256": file_digest(artifact)},
        "inputs": sorted(
            ({"path": str(p), "sha256": file_digest(p)} for p in inputs),
            key=lambda e: e["path"],
        ),
        "seed": seed,
        "config": dict(config or {}),
    }
    out = artifact.with_name(artifact.name + MANIFEST_SUFFIX)
    out.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return out
