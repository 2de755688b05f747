"""Serialization: datasets (CSV / JSON envelope), models, reports, config hashes."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .dist import LabeledDataset
from .errors import ConfigError
from .learner import OrderDiagnostics, PolynomialModel


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(cfg) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()[:16]


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True)


def write_json(obj, path=None):
    text = dumps(obj) + "\n"
    if path is None:
        print(text, end="")
    else:
        Path(path).write_text(text)
    return text


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None


def parse_json_arg(text):
    """A CLI value that is either inline JSON, a path to a JSON file, or a bare name."""
    if text is None:
        return None
    t = text.strip()
    if t.startswith("{") or t.startswith("["):
        try:
            return json.loads(t)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad inline JSON {text!r}: {exc}") from None
    if t.endswith(".json"):
        return read_json(t)
    return t


# ---------------------------------------------------------------- datasets


def write_dataset_csv(data: LabeledDataset, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["x", "y"])
        for x, y in zip(data.x.tolist(), data.y.tolist()):
            w.writerow([repr(x), repr(y)])


def read_dataset_csv(path) -> LabeledDataset:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}") from None
    if not rows or [h.strip() for h in rows[0]] != ["x", "y"]:
        raise ConfigError(f"{path}: expected header 'x,y'")
    try:
        x = np.array([float(r[0]) for r in rows[1:] if r], dtype=np.float64)
        y = np.array([float(r[1]) for r in rows[1:] if r], dtype=np.float64)
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: malformed row ({exc})") from None
    return LabeledDataset(x, y)


def dataset_envelope(data: LabeledDataset, dist_cfg=None) -> dict:
    env = {
        "seed": data.seed,
        "fn": data.meta.get("fn", data.fn_name),
        "dist": dist_cfg,
        "x": data.x.tolist(),
        "y": data.y.tolist(),
    }
    env["config_hash"] = config_hash({"fn": env["fn"], "dist": dist_cfg, "seed": data.seed,
                                      "count": len(data)})
    return env


def dataset_from_envelope(env) -> LabeledDataset:
    fn = env.get("fn")
    name = fn.get("fn", "") if isinstance(fn, dict) else (fn or "")
    return LabeledDataset(np.asarray(env["x"], float), np.asarray(env["y"], float),
                          env.get("seed"), name, {"fn": fn})


# ---------------------------------------------------------------- models


def model_to_dict(model: PolynomialModel, cfg=None, seed=None) -> dict:
    out = {
        "expansion_point": model.expansion_point,
        "coefficients": list(model.coefficients),
        "diagnostics": [vars(d).copy() if hasattr(d, "__dict__") else d._asdict()
                        for d in model.diagnostics] if model.diagnostics else [],
    }
    if cfg is not None:
        out["config"] = cfg
        out["config_hash"] = config_hash(cfg)
    if seed is not None:
        out["seed"] = seed
    return out


def model_from_dict(d) -> PolynomialModel:
    try:
        diags = tuple(OrderDiagnostics(**x) for x in d.get("diagnostics", []))
        return PolynomialModel(float(d["expansion_point"]),
                               tuple(float(c) for c in d["coefficients"]), diags)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed model JSON: {exc}") from None


def model_digest(model: PolynomialModel) -> str:
    arr = np.asarray((model.expansion_point,) + tuple(model.coefficients), dtype="<f8")
    return hashlib.sha256(arr.tobytes()).hexdigest()[:16]


# ---------------------------------------------------------------- tables


def write_csv_table(header, rows, path=None):
    import io as _io

    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    text = buf.getvalue()
    if path is None:
        print(text, end="")
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text
