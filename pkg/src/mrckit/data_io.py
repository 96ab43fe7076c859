"""CSV and JSON persistence.

CSV files carry a header; the label column is named ``label`` and holds
values 1..K, every other column is a numeric feature.  Missing or
non-numeric entries are rejected.  Model files are JSON with floats written
in shortest round-trip form, so a save/load cycle reproduces predictions
bit for bit.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .core import (
    AlphaLoss,
    Dataset,
    FeatureMap,
    LogLoss,
    Loss,
    MrcModel,
    ZeroOneLoss,
)

__all__ = [
    "InputError",
    "load_dataset",
    "load_instances",
    "save_dataset",
    "save_model",
    "load_model",
    "save_feature_map",
    "load_feature_map",
]

FORMAT_VERSION = 1


class InputError(Exception):
    """Malformed user input (maps to exit code 2 in the CLI)."""


def _read_table(path):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise InputError(f"{path}: need a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    width = len(header)
    for i, row in enumerate(body, start=2):
        if len(row) != width:
            raise InputError(f"{path}:{i}: expected {width} columns, got {len(row)}")
        if any(cell.strip() == "" for cell in row):
            raise InputError(f"{path}:{i}: missing values are not supported")
    return header, body


def _parse_numeric(path, header, body, columns):
    out = np.empty((len(body), len(columns)))
    for i, row in enumerate(body):
        for j, col in enumerate(columns):
            cell = row[col].strip()
            try:
                out[i, j] = float(cell)
            except ValueError as exc:
                raise InputError(
                    f"{path}:{i + 2}: non-numeric value {cell!r} in column {header[col]!r}"
                ) from exc
    if not np.all(np.isfinite(out)):
        raise InputError(f"{path}: non-finite values are not supported")
    return out


def load_dataset(path, num_classes=None) -> Dataset:
    """Read a labeled CSV; class count defaults to the largest label seen."""
    header, body = _read_table(path)
    if "label" not in header:
        raise InputError(f"{path}: no 'label' column")
    label_col = header.index("label")
    feat_cols = [j for j in range(len(header)) if j != label_col]
    if not feat_cols:
        raise InputError(f"{path}: no feature columns")
    X = _parse_numeric(path, header, body, feat_cols)
    raw = _parse_numeric(path, header, body, [label_col]).ravel()
    labels = raw.astype(np.int64)
    if np.any(labels != raw):
        raise InputError(f"{path}: labels must be integers")
    k = int(labels.max()) if num_classes is None else int(num_classes)
    try:
        return Dataset(instances=X, labels=labels, num_classes=max(k, 2))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_instances(path) -> np.ndarray:
    """Read the feature columns of a CSV, ignoring any label column."""
    header, body = _read_table(path)
    feat_cols = [j for j, h in enumerate(header) if h != "label"]
    if not feat_cols:
        raise InputError(f"{path}: no feature columns")
    return _parse_numeric(path, header, body, feat_cols)


def save_dataset(data: Dataset, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"f{j + 1}" for j in range(data.dim)] + ["label"])
        for i in range(data.n):
            writer.writerow(
                [repr(float(v)) for v in data.instances[i]] + [int(data.labels[i])]
            )


def _loss_fields(loss: Loss):
    if isinstance(loss, ZeroOneLoss):
        return {"loss": "zero-one"}
    if isinstance(loss, LogLoss):
        return {"loss": "log"}
    if isinstance(loss, AlphaLoss):
        return {"loss": "alpha", "alpha": loss.alpha}
    raise InputError(f"loss {loss!r} has no file representation")


def _loss_from_fields(obj):
    name = obj.get("loss")
    if name == "zero-one":
        return ZeroOneLoss()
    if name == "log":
        return LogLoss()
    if name == "alpha":
        return AlphaLoss(float(obj["alpha"]))
    raise InputError(f"unknown loss {name!r} in model file")


_VARIANT_TO_JSON = {"expectation": "expectation", "instance_marginal": "instance-marginal"}
_VARIANT_FROM_JSON = {v: k for k, v in _VARIANT_TO_JSON.items()}


def save_model(model: MrcModel, path, lambda_policy: str, n: int, bounds=None):
    """Write the model JSON; ``bounds`` is an optional stored BoundReport-like dict."""
    if model.feature_map is None:
        raise InputError("cannot persist a model without a feature map")
    obj = {
        "format_version": FORMAT_VERSION,
        **_loss_fields(model.loss),
        "variant": _VARIANT_TO_JSON[model.variant],
        "num_classes": model.num_classes,
        "thresholds": [[d, t] for d, t in model.feature_map.thresholds],
        "mu": [float(v) for v in model.weights],
        "objective_value": float(model.objective_value),
        "lambda_policy": lambda_policy,
        "n": int(n),
        "converged": bool(model.converged),
    }
    if model.offset is not None:
        obj["nu"] = float(model.offset)
    if bounds is not None:
        obj["bounds"] = bounds
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def load_model(path):
    """Read a model JSON; returns (model, metadata dict)."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read model {path}: {exc}") from exc
    if obj.get("format_version") != FORMAT_VERSION:
        raise InputError(f"{path}: unsupported format_version {obj.get('format_version')!r}")
    try:
        fm = FeatureMap(
            num_classes=int(obj["num_classes"]),
            thresholds=tuple((int(d), float(t)) for d, t in obj["thresholds"]),
        )
        model = MrcModel(
            loss=_loss_from_fields(obj),
            weights=np.array(obj["mu"], dtype=np.float64),
            offset=float(obj["nu"]) if "nu" in obj else None,
            objective_value=float(obj["objective_value"]),
            num_classes=int(obj["num_classes"]),
            feature_map=fm,
            variant=_VARIANT_FROM_JSON.get(obj.get("variant"), obj.get("variant")),
            converged=bool(obj.get("converged", True)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed model file ({exc})") from exc
    meta = {
        "lambda_policy": obj.get("lambda_policy"),
        "n": obj.get("n"),
        "bounds": obj.get("bounds"),
    }
    return model, meta


def save_feature_map(fm: FeatureMap, path):
    obj = {
        "format_version": FORMAT_VERSION,
        "num_classes": fm.num_classes,
        "thresholds": [[d, t] for d, t in fm.thresholds],
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def load_feature_map(path) -> FeatureMap:
    try:
        with open(path) as fh:
            obj = json.load(fh)
        return FeatureMap(
            num_classes=int(obj["num_classes"]),
            thresholds=tuple((int(d), float(t)) for d, t in obj["thresholds"]),
        )
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"cannot read feature map {path}: {exc}") from exc
