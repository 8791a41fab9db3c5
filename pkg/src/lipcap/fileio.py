"""JSON and CSV I/O for scenes, measures, grid functions and reports.

Floats are written with 17 significant digits so every value round-trips exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import LipcapError
from .geom import (Bitmap, Disc, DyadicShape, DyadicSquare, ParametricDomain, Scene, Segment,
                   )
from .measures import DiscreteMeasure
from .smoothfn import GridFunction


class SceneFormatError(LipcapError):
    pass


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def _encode(obj, out: list):
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)) + ": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON with 17-significant-digit floats and insertion-ordered keys."""
    out: list = []
    _encode(obj, out)
    return "".join(out)


def loads(text: str):
    return json.loads(text)


# -- scenes --------------------------------------------------------------

def _pair(v, what):
    try:
        x, y = (float(t) for t in v)
    except (TypeError, ValueError) as exc:
        raise SceneFormatError(f"{what} must be a pair of numbers") from exc
    return (x, y)


def shape_from_dict(d: dict):
    kind = d.get("type")
    if kind == "segment":
        return Segment(_pair(d["from"], "segment.from"), _pair(d["to"], "segment.to"))
    if kind == "disc":
        return Disc(_pair(d["center"], "disc.center"), float(d["radius"]))
    if kind == "dyadic":
        return DyadicShape(int(d["m"]), int(d["r"]), int(d["n"]))
    if kind == "bitmap":
        return Bitmap(int(d["n"]), tuple((int(m), int(r)) for m, r in d["cells"]))
    raise SceneFormatError(f"unknown shape type {kind!r}")


def shape_to_dict(shape) -> dict:
    if isinstance(shape, Segment):
        return {"type": "segment", "from": list(shape.start), "to": list(shape.end)}
    if isinstance(shape, Disc):
        return {"type": "disc", "center": list(shape.center), "radius": shape.radius}
    if isinstance(shape, DyadicShape):
        return {"type": "dyadic", "m": shape.m, "r": shape.r, "n": shape.n}
    if isinstance(shape, Bitmap):
        return {"type": "bitmap", "n": shape.n, "cells": [list(c) for c in shape.cells]}
    raise TypeError(f"unknown shape {shape!r}")


def parametric_from_dict(d: dict) -> ParametricDomain:
    return ParametricDomain(str(d["kind"]), float(d["a0"]), float(d["q"]), float(d["c0"]),
                            float(d["p"]), None if d.get("radius") is None else float(d["radius"]))


def scene_from_dict(d: dict) -> Scene:
    try:
        root = d.get("root", {"m": 0, "r": 0, "n": 0})
        root = DyadicSquare(int(root["m"]), int(root["r"]), int(root["n"]))
        shapes = tuple(shape_from_dict(s) for s in d.get("shapes", []))
        par = d.get("parametric")
        par = parametric_from_dict(par) if par else None
        b = _pair(d.get("b", (0.0, 0.0)), "b")
    except (KeyError, TypeError) as exc:
        raise SceneFormatError(f"malformed scene: {exc}") from exc
    return Scene(root, shapes, par, b)


def scene_to_dict(scene: Scene) -> dict:
    d = {"root": scene.root.to_dict(), "shapes": [shape_to_dict(s) for s in scene.shapes]}
    if scene.parametric is not None:
        d["parametric"] = scene.parametric.to_dict()
    if tuple(scene.b) != (0.0, 0.0):
        d["b"] = list(scene.b)
    return d


def parse_param(text: str) -> ParametricDomain:
    """``slit:a0=0.5,q=0.5,c0=0.25,p=0.25`` (or ``roadrunner:...``)."""
    kind, _, rest = text.partition(":")
    try:
        opts = {k.strip(): float(v) for k, v in (kv.split("=") for kv in rest.split(",") if kv)}
        return ParametricDomain(kind.strip(), opts["a0"], opts["q"], opts["c0"], opts["p"],
                                opts.get("radius"))
    except (KeyError, ValueError) as exc:
        if isinstance(exc, LipcapError):
            raise
        raise SceneFormatError(f"bad parametric description {text!r}: {exc}") from exc


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def load_scene(path) -> Scene:
    return scene_from_dict(read_json(path))


def load_measure(path) -> DiscreteMeasure:
    return DiscreteMeasure.from_dict(read_json(path))


def load_grid_function(path) -> GridFunction:
    return GridFunction.from_dict(read_json(path))


def csv_text(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


__all__ = ["dumps", "loads", "scene_from_dict", "scene_to_dict", "parse_param", "load_scene",
           "load_measure", "load_grid_function", "csv_text", "SceneFormatError"]
