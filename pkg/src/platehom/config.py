"""JSON run configuration: parsing, defaults and validation."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
import json
import logging
import math

import numpy as np

from . import material as mat
from .cellprob import Direction
from .errors import (ClassificationMismatch, ConfigError, DetDegenerate, EllipticityViolation,
                     EmptyCoefficients, NonContiguousPieces, ParseError, SelfOverlap, ValidationError)
from .surface import build_chart

log = logging.getLogger(__name__)

COMMANDS = ("cell", "classify", "energy", "recover", "twoscale")

DEFAULT_RUN = {
    "command": None,
    "eps": [1 / 8, 1 / 16, 1 / 32, 1 / 64],
    "k": [1, 0],
    "direction": {"p": 1, "q": 0},
    "theta": "recovery",
    "window_margin": 0.1,
    "quadrature": {"nodes_per_cell": 4, "richardson_tol": 1e-3, "max_refine": 4},
    "twoscale_tol": 1e-6,
    "threads": 1,
    "out": ".",
    "mesh": None,
}

DEFAULT_CHART = {
    "gamma0": [0.0, 0.0],
    "phi0": 0.0,
    "frame0": np.eye(3).tolist(),
    "pos0": [0.0, 0.0, 0.0],
    "delta_det": 0.5,
    "kappa_min": 1e-6,
}


@dataclass
class RunConfig:
    material: dict
    chart: dict | None
    run: dict
    warnings: list = field(default_factory=list, compare=False)

    def to_dict(self) -> dict:
        d = {"material": copy.deepcopy(self.material), "run": copy.deepcopy(self.run)}
        if self.chart is not None:
            d["chart"] = copy.deepcopy(self.chart)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def build_material(self, seed: int | None = None) -> mat.PeriodicQuadraticForm:
        return _build_material(self.material, seed)

    def build_chart(self):
        if self.chart is None:
            raise ValidationError("chart", "missing")
        return build_chart(self.chart)


def _build_material(m: dict, seed=None):
    kind = m["type"]
    alpha = m.get("alpha_ell")
    if kind == "laminate":
        return mat.laminate(m["coeffs"], int(m.get("axis", 1)), alpha)
    if kind == "identity":
        return mat.identity_form(alpha if alpha is not None else 1.0)
    if kind == "grid":
        cells = np.asarray(m["cells"], dtype=float)
        n = int(m.get("n", cells.shape[0]))
        if cells.ndim == 4 and cells.shape[-2:] != (3, 3):
            raise ValueError("grid cells must be 3x3 matrices")
        if cells.ndim == 3 and cells.shape[-1] == 9:
            cells = cells.reshape(n, n, 3, 3)
        if cells.shape[:2] != (n, n):
            raise ValueError(f"expected {n}x{n} cells, got shape {cells.shape}")
        return mat.grid(cells, alpha)
    if kind == "random":
        s = int(seed if seed is not None else m.get("seed", 0))
        return mat.random_material(np.random.default_rng(s), int(m.get("n", 3)),
                                   alpha if alpha is not None else 0.2)
    raise ValueError(f"unknown material type {kind!r}")


def _normalize_direction(d, path, warnings):
    if not isinstance(d, dict):
        raise ValidationError(path, "direction must be an object")
    if "angle" in d:
        return {"angle": float(d["angle"])}
    try:
        p, q = int(d["p"]), int(d["q"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError(path, "direction needs integer p and q or an angle") from None
    if (p, q) == (0, 0):
        raise ValidationError(path, "(p, q) = (0, 0)")
    D = Direction.rational(p, q)
    if (D.p, D.q) != (p, q):
        msg = f"{path}: direction ({p},{q}) normalized to ({D.p},{D.q})"
        log.warning(msg)
        warnings.append(msg)
    return {"p": D.p, "q": D.q}


def _positive(value, path):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ValidationError(path, "not a number") from None
    if not (v > 0 and math.isfinite(v)):
        raise ValidationError(path, "must be positive")
    return v


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("$", f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(raw, dict):
        raise ParseError("$", "top level must be an object")
    return validate_config(raw)


def validate_config(raw: dict) -> RunConfig:
    warnings = []
    if "material" not in raw or not isinstance(raw["material"], dict):
        raise ValidationError("material", "missing material section")
    material = copy.deepcopy(raw["material"])
    if "type" not in material:
        raise ValidationError("material.type", "missing")
    try:
        _build_material(material)
    except (EllipticityViolation, EmptyCoefficients) as exc:
        raise ValidationError("material.coeffs", str(exc)) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"material.{material.get('type')}", str(exc)) from None

    run = copy.deepcopy(DEFAULT_RUN)
    run_raw = raw.get("run", {}) or {}
    if not isinstance(run_raw, dict):
        raise ValidationError("run", "must be an object")
    unknown = set(run_raw) - set(DEFAULT_RUN)
    if unknown:
        raise ValidationError(f"run.{sorted(unknown)[0]}", "unknown key")
    quad = dict(run["quadrature"])
    quad.update(run_raw.get("quadrature", {}) or {})
    run.update(run_raw)
    run["quadrature"] = quad
    if run["command"] is not None and run["command"] not in COMMANDS:
        raise ValidationError("run.command", f"must be one of {COMMANDS}")
    run["eps"] = [_positive(e, f"run.eps[{i}]") for i, e in enumerate(run["eps"])]
    if not run["eps"]:
        raise ValidationError("run.eps", "empty")
    run["quadrature"]["richardson_tol"] = _positive(quad["richardson_tol"], "run.quadrature.richardson_tol")
    if int(quad["nodes_per_cell"]) < 2:
        raise ValidationError("run.quadrature.nodes_per_cell", "must be >= 2")
    if int(quad["max_refine"]) < 1:
        raise ValidationError("run.quadrature.max_refine", "must be >= 1")
    run["quadrature"]["nodes_per_cell"] = int(quad["nodes_per_cell"])
    run["quadrature"]["max_refine"] = int(quad["max_refine"])
    run["twoscale_tol"] = _positive(run["twoscale_tol"], "run.twoscale_tol")
    run["window_margin"] = _positive(run["window_margin"], "run.window_margin")
    k = [int(v) for v in run["k"]]
    if len(k) != 2 or k == [0, 0]:
        raise ValidationError("run.k", "must be a nonzero integer 2-vector")
    run["k"] = k
    run["direction"] = _normalize_direction(run["direction"], "run.direction", warnings)
    theta = run["theta"]
    if not (theta in ("none", "recovery") or (isinstance(theta, dict) and theta.get("type") in ("cosine", "square"))):
        raise ValidationError("run.theta", "expected 'none', 'recovery' or {type: cosine|square}")
    if int(run["threads"]) < 1:
        raise ValidationError("run.threads", "must be >= 1")

    chart = None
    if raw.get("chart") is not None:
        chart = _validate_chart(raw["chart"], warnings)
    return RunConfig(material, chart, run, warnings)


def _validate_chart(raw: dict, warnings) -> dict:
    if not isinstance(raw, dict):
        raise ValidationError("chart", "must be an object")
    chart = copy.deepcopy(DEFAULT_CHART)
    chart.update(copy.deepcopy(raw))
    for key in ("s_lo", "s_hi", "pieces"):
        if key not in chart:
            raise ValidationError(f"chart.{key}", "missing")
    pieces = chart["pieces"]
    if not isinstance(pieces, list) or not pieces:
        raise ValidationError("chart.pieces", "must be a nonempty list")
    t = 0.0
    for i, rec in enumerate(pieces):
        path = f"chart.pieces[{i}]"
        if "t_hi" not in rec and "length" not in rec:
            raise ValidationError(path, "needs t_hi or length")
        rec.setdefault("t_lo", t)
        if "t_hi" not in rec:
            rec["t_hi"] = rec["t_lo"] + rec.pop("length")
        rec.setdefault("kappa", [0.0])
        rec.setdefault("kappa_n", [0.0])
        rec.setdefault("kind", "conical")
        if abs(float(rec["t_lo"]) - t) > 1e-12:
            raise ValidationError(f"{path}.t_lo", "pieces must be contiguous starting at 0")
        if rec.get("direction") is not None:
            rec["direction"] = _normalize_direction(rec["direction"], f"{path}.direction", warnings)
        t = float(rec["t_hi"])
    try:
        build_chart(chart)
    except DetDegenerate as exc:
        raise ValidationError(f"chart.{exc.side or 's_hi'}", "det bound") from None
    except ClassificationMismatch as exc:
        raise ValidationError("chart.pieces", f"classification: {exc}") from None
    except NonContiguousPieces as exc:
        raise ValidationError("chart.pieces", str(exc)) from None
    except SelfOverlap as exc:
        raise ValidationError("chart", str(exc)) from None
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("chart", str(exc)) from None
    return chart
