"""Reading and writing systems and measures.

System files are JSON::

    {"d": 2, "maps": [{"r": [0.6, 0.3], "a": [1, 1]}, ...], "p": [0.5, 0.5]}

Rationals may be given as strings ``"num/den"``; a file whose numbers are all
integers or such strings is loaded in exact mode unless overridden.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .ifs_core import DiagonalIFS, WeightedIFS, _is_rational
from .measures import DiscreteMeasure


class InputError(ValueError):
    """Malformed input file or arguments."""


def _number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise InputError(f"not a number: {v!r}")
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except ValueError as exc:
            raise InputError(f"not a rational: {v!r}") from exc
    return v


def ifs_from_dict(data: dict, exact: bool | None = None) -> WeightedIFS:
    try:
        d = int(data["d"])
        maps = data["maps"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("system needs integer 'd' and a list 'maps'") from exc
    if not isinstance(maps, list) or not maps:
        raise InputError("'maps' must be a nonempty list")
    slopes, offsets = [], []
    for k, m in enumerate(maps):
        try:
            r, a = m["r"], m["a"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"map {k} needs 'r' and 'a'") from exc
        if len(r) != d or len(a) != d:
            raise InputError(f"map {k} must have {d} slopes and offsets")
        slopes.append([_number(v) for v in r])
        offsets.append([_number(v) for v in a])
    if exact is None:
        exact = all(_is_rational(v) for row in slopes + offsets for v in row)
    try:
        ifs = DiagonalIFS(slopes, offsets, exact=exact)
        p = data.get("p")
        return WeightedIFS(ifs, None if p is None else [float(_number(v)) for v in p])
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def load_ifs(path: str | Path, exact: bool | None = None) -> WeightedIFS:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read system file {path}: {exc}") from exc
    return ifs_from_dict(data, exact)


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    return float(v)


def ifs_to_dict(w: WeightedIFS) -> dict:
    ifs = w.ifs
    return {
        "d": ifs.d,
        "maps": [
            {"r": [_jsonable(v) for v in rs], "a": [_jsonable(v) for v in as_]}
            for rs, as_ in zip(ifs.slopes, ifs.offsets)
        ],
        "p": [float(v) for v in w.p],
    }


def measure_to_csv(m: DiscreteMeasure) -> str:
    """One atom per row: coordinates then mass, 9 decimals."""
    head = ",".join([f"x{j}" for j in range(m.d)] + ["mass"])
    lines = [head]
    pts = m.float_points()
    for row, q in zip(pts, m.float_masses()):
        lines.append(",".join(f"{v:.9f}" for v in list(row) + [q]))
    return "\n".join(lines) + "\n"


def measure_header(m: DiscreteMeasure, **provenance) -> dict:
    return {"d": m.d, "atoms": len(m), "exact": m.exact, **provenance}


def parse_vector(text: str) -> list:
    """Comma-separated numbers; ``num/den`` entries become Fractions."""
    try:
        return [_number(v if "/" in v else float(v)) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"bad vector {text!r}") from exc


def as_float_array(v) -> np.ndarray:
    return np.array([float(x) for x in v])
