"""JSON/CSV serialization with round-trip-exact decimal floats.

Every float is printed with 17 significant digits, which reconstructs the
same IEEE double bit-for-bit on load.  Writes go through a temp file plus
rename so partially written artifacts can never be observed.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Any

import numpy as np

from .diagnostics import DiagnosticsReport
from .energy import EnergyReport
from .geometry import Configuration, Family, Manifold, Point, make_point, manifold

__all__ = [
    "SchemaError",
    "format_float",
    "dump_json",
    "point_to_obj",
    "configuration_to_obj",
    "configuration_from_obj",
    "energy_report_to_obj",
    "diagnostics_report_to_obj",
    "write_text_atomic",
    "load_configuration",
    "save_configuration",
]


class SchemaError(ValueError):
    """Input object violates the expected schema; message carries the path."""


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"non-finite value {x!r} cannot be serialized")
    return format(float(x), ".17g")


def dump_json(obj: Any, indent: int = 2) -> str:
    """JSON emitter whose floats carry 17 significant digits."""
    out: list[str] = []
    _emit(obj, out, indent, 0)
    out.append("\n")
    return "".join(out)


def _emit(obj: Any, out: list[str], indent: int, level: int):
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for idx, (key, val) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(key))}: ")
            _emit(val, out, indent, level + 1)
            out.append(",\n" if idx < len(obj) - 1 else "\n")
        out.append(closing + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        # Flat numeric rows stay on one line for diff-friendly point files.
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in seq):
            out.append("[" + ", ".join(
                format_float(v) if isinstance(v, (float, np.floating)) else str(int(v))
                for v in seq
            ) + "]")
            return
        out.append("[\n")
        for idx, val in enumerate(seq):
            out.append(pad)
            _emit(val, out, indent, level + 1)
            out.append(",\n" if idx < len(seq) - 1 else "\n")
        out.append(closing + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_text_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ----------------------------------------------------------------------------
# Points and configurations.


def point_to_obj(p: Point) -> list:
    m = p.manifold
    if m.scalar_width == 1:
        return [float(v) for v in p.ambient]
    if m.family is Family.COMPLEX_PROJECTIVE:
        return [[float(z.real), float(z.imag)] for z in p.complex_coords()]
    return [[float(c) for c in quat] for quat in p.quaternion_coords()]


def configuration_to_obj(config: Configuration) -> dict:
    return {
        "manifold": {"family": config.manifold.family.value, "n": config.manifold.n},
        "points": [point_to_obj(p) for p in config.points],
    }


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}: expected a number, got {type(value).__name__}")
    return float(value)


def _point_from_obj(m: Manifold, obj, path: str) -> Point:
    if not isinstance(obj, list):
        raise SchemaError(f"{path}: expected an array of coordinates")
    k = m.n_scalars
    if len(obj) != k:
        raise SchemaError(f"{path}: expected {k} coordinates, got {len(obj)}")
    width = m.scalar_width
    if width == 1:
        flat = [_as_number(v, f"{path}[{i}]") for i, v in enumerate(obj)]
    else:
        flat = []
        for i, comp in enumerate(obj):
            if not isinstance(comp, list) or len(comp) != width:
                raise SchemaError(
                    f"{path}[{i}]: expected [{'re, im' if width == 2 else 'w, x, y, z'}]"
                )
            flat.extend(_as_number(v, f"{path}[{i}][{j}]") for j, v in enumerate(comp))
    try:
        return make_point(m, np.array(flat))
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def configuration_from_obj(obj) -> Configuration:
    if not isinstance(obj, dict):
        raise SchemaError("$: expected a JSON object")
    mobj = obj.get("manifold")
    if not isinstance(mobj, dict):
        raise SchemaError("manifold: expected an object {family, n}")
    family = mobj.get("family")
    n = mobj.get("n")
    if not isinstance(family, str):
        raise SchemaError("manifold.family: expected a string code")
    if isinstance(n, bool) or not isinstance(n, int):
        raise SchemaError("manifold.n: expected an integer")
    try:
        m = manifold(family, n)
    except ValueError as exc:
        raise SchemaError(f"manifold: {exc}") from exc
    points = obj.get("points")
    if not isinstance(points, list):
        raise SchemaError("points: expected an array")
    pts = [_point_from_obj(m, p, f"points[{k}]") for k, p in enumerate(points)]
    if len(pts) < 2:
        raise SchemaError(f"points: need at least 2 points, got {len(pts)}")
    return Configuration(m, tuple(pts))


def save_configuration(path: str, config: Configuration):
    write_text_atomic(path, dump_json(configuration_to_obj(config)))


def load_configuration(path: str) -> Configuration:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"configuration file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    return configuration_from_obj(obj)


# ----------------------------------------------------------------------------
# Reports.


def energy_report_to_obj(report: EnergyReport) -> dict:
    return {
        "total": report.total,
        "scaled": report.scaled,
        "min_pair_distance": report.min_pair_distance,
        "per_point_potentials": [float(v) for v in report.per_point_potentials],
    }


def diagnostics_report_to_obj(report: DiagnosticsReport) -> dict:
    return {
        "N": report.N,
        "scaled_energy": report.scaled_energy,
        "separation": report.separation,
        "mean_vector_norm": report.mean_vector_norm,
        "second_moment_deviation": report.second_moment_deviation,
        "ball_discrepancy": report.ball_discrepancy,
        "potential_tests": [
            {
                "point": point_to_obj(t.point),
                "mc_mean": t.mc_mean,
                "mc_stderr": t.mc_stderr,
                "n_samples": t.n_samples,
            }
            for t in report.potential_tests
        ],
    }
