"""JSON config and CSV curve I/O.

Config files use unit-suffixed keys; everything is converted to SI exactly
once here. Layout::

    {
      "material": {"name": "TPU-95A", "young_modulus_MPa": 26.0},
      "geometry": {"b_mm": 1.0, "b_c_mm": 1.5, "L_mm": 20.0, "h_c_mm": 3.0,
                   "H_mm": 8.0, "gamma_deg": 20.0, "n_modules": 12,
                   "ring_radius_mm": 30.0, "effective_length_factor": 1.0},
      "gripper":  {"name": "Robotiq 2F-85", "mass_kg": 1.10, "length_mm": 155.0},
      "targets":  {"buckling_torque_Nm": 1.325, "buckling_angle_limit_deg": 3.70,
                   "torque_tolerance": 0.10, "tip_deflection_limit_mm": 10.0,
                   "payload_kg": 0.5}
    }

``n_modules``, ``ring_radius_mm``, ``effective_length_factor`` and every
``targets`` key except ``buckling_torque_Nm`` are optional. When
``buckling_angle_limit_deg`` is omitted it is derived from the fingertip
deflection limit and gripper length.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .types import (
    ConfigError,
    DesignTargets,
    GripperSpec,
    HoneycombGeometry,
    Material,
    TorqueDeflectionCurve,
)

CSV_HEADER = ("angle_deg", "torque_Nm")

# (json key, field name, scale from file unit to SI)
_GEOMETRY_KEYS = [
    ("b_mm", "b", 1e-3),
    ("b_c_mm", "b_c", 1e-3),
    ("L_mm", "L", 1e-3),
    ("h_c_mm", "h_c", 1e-3),
    ("H_mm", "H", 1e-3),
]


class Config(NamedTuple):
    material: Material
    geometry: HoneycombGeometry
    gripper: GripperSpec
    targets: DesignTargets | None


def _inverse_exact(si: float, to_si, from_si) -> float:
    """File-unit value that maps back to ``si`` bit-for-bit, if one is nearby."""
    guess = from_si(si)
    if to_si(guess) == si:
        return guess
    lo = hi = guess
    for _ in range(8):
        lo = math.nextafter(lo, -math.inf)
        hi = math.nextafter(hi, math.inf)
        for cand in (lo, hi):
            if to_si(cand) == si:
                return cand
    return guess


def mm(x: float) -> float:
    return x * 1e-3


def to_mm(x: float) -> float:
    return _inverse_exact(x, mm, lambda v: v * 1e3)


def to_deg(x: float) -> float:
    return _inverse_exact(x, math.radians, math.degrees)


def _num(section: dict, key: str, where: str, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"{where}.{key}: missing required field")
        return default
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}={v!r}: expected a number")
    return float(v)


def _section(data: dict, name: str, required: bool = True) -> dict | None:
    s = data.get(name)
    if s is None:
        if required:
            raise ConfigError(f"{name}: missing required section")
        return None
    if not isinstance(s, dict):
        raise ConfigError(f"{name}: expected an object")
    return s


def material_from_dict(d: dict) -> Material:
    return Material(name=str(d.get("name", "unnamed")),
                    young_modulus=_num(d, "young_modulus_MPa", "material") * 1e6)


def geometry_from_dict(d: dict) -> HoneycombGeometry:
    kw = {field: _num(d, key, "geometry") * scale for key, field, scale in _GEOMETRY_KEYS}
    gamma_deg = _num(d, "gamma_deg", "geometry")
    if not 0.0 <= gamma_deg < 90.0:
        raise ConfigError(f"geometry.gamma_deg={gamma_deg!r}: singular geometry, "
                          "need 0 <= gamma < 90 deg")
    kw["gamma"] = math.radians(gamma_deg)
    n = d.get("n_modules", 12)
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigError(f"geometry.n_modules={n!r}: expected an integer")
    kw["n_modules"] = n
    kw["ring_radius"] = mm(_num(d, "ring_radius_mm", "geometry", default=30.0))
    kw["effective_length_factor"] = _num(d, "effective_length_factor", "geometry", default=1.0)
    return HoneycombGeometry(**kw)


def gripper_from_dict(d: dict) -> GripperSpec:
    return GripperSpec(name=str(d.get("name", "gripper")),
                       mass=_num(d, "mass_kg", "gripper"),
                       length=mm(_num(d, "length_mm", "gripper")))


def targets_from_dict(d: dict, gripper: GripperSpec | None = None) -> DesignTargets:
    tip = mm(_num(d, "tip_deflection_limit_mm", "targets", default=10.0))
    if "buckling_angle_limit_deg" in d:
        angle = math.radians(_num(d, "buckling_angle_limit_deg", "targets"))
    elif gripper is not None:
        if not 0 < tip < gripper.length:
            raise ConfigError(f"targets.tip_deflection_limit_mm={tip * 1e3!r}: "
                              "must be positive and shorter than the gripper")
        angle = math.asin(tip / gripper.length)
    else:
        raise ConfigError("targets.buckling_angle_limit_deg: missing and no gripper "
                          "to derive it from")
    return DesignTargets(
        buckling_torque=_num(d, "buckling_torque_Nm", "targets"),
        buckling_angle_limit=angle,
        torque_tolerance=_num(d, "torque_tolerance", "targets", default=0.10),
        tip_deflection_limit=tip,
        payload=_num(d, "payload_kg", "targets", default=0.5),
    )


def config_from_dict(data: dict) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    material = material_from_dict(_section(data, "material"))
    geometry = geometry_from_dict(_section(data, "geometry"))
    gripper = gripper_from_dict(_section(data, "gripper"))
    t = _section(data, "targets", required=False)
    targets = targets_from_dict(t, gripper) if t is not None else None
    return Config(material, geometry, gripper, targets)


def read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def load_config(path) -> Config:
    """Load and validate a config file; returns (material, geometry, gripper, targets)."""
    return config_from_dict(read_json(path))


def material_to_dict(m: Material) -> dict:
    return {"name": m.name,
            "young_modulus_MPa": _inverse_exact(m.young_modulus, lambda v: v * 1e6,
                                                lambda v: v / 1e6)}


def geometry_to_dict(g: HoneycombGeometry) -> dict:
    d = {key: to_mm(getattr(g, field)) for key, field, _ in _GEOMETRY_KEYS}
    d["gamma_deg"] = to_deg(g.gamma)
    d["n_modules"] = int(g.n_modules)
    d["ring_radius_mm"] = to_mm(g.ring_radius)
    d["effective_length_factor"] = g.effective_length_factor
    return d


def gripper_to_dict(g: GripperSpec) -> dict:
    return {"name": g.name, "mass_kg": g.mass, "length_mm": to_mm(g.length)}


def targets_to_dict(t: DesignTargets, gripper: GripperSpec | None = None) -> dict:
    """Targets in file units.

    Not every radian value has an exact degree spelling. When the limit is
    the one derived from ``gripper`` it is left out so reloading derives it
    again bit-for-bit.
    """
    d = {
        "buckling_torque_Nm": t.buckling_torque,
        "buckling_angle_limit_deg": to_deg(t.buckling_angle_limit),
        "torque_tolerance": t.torque_tolerance,
        "tip_deflection_limit_mm": to_mm(t.tip_deflection_limit),
        "payload_kg": t.payload,
    }
    if (gripper is not None and math.radians(d["buckling_angle_limit_deg"]) != t.buckling_angle_limit
            and 0 < t.tip_deflection_limit < gripper.length
            and math.asin(t.tip_deflection_limit / gripper.length) == t.buckling_angle_limit):
        del d["buckling_angle_limit_deg"]
    return d


def serialize(config: Config) -> dict:
    """Inverse of :func:`config_from_dict`."""
    material, geometry, gripper, targets = config
    d = {"material": material_to_dict(material),
         "geometry": geometry_to_dict(geometry),
         "gripper": gripper_to_dict(gripper)}
    if targets is not None:
        d["targets"] = targets_to_dict(targets, gripper)
    return d


def dumps(data) -> str:
    """Canonical JSON text used for every emitted file."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# CSV curves

def parse_curve_csv(text: str, source: str = "<csv>") -> TorqueDeflectionCurve:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0][:2]) != CSV_HEADER:
        raise ConfigError(f"{source}: expected header 'angle_deg,torque_Nm'")
    angles, torques = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            angles.append(math.radians(float(row[0])))
            torques.append(float(row[1]))
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad sample {row!r}") from exc
    try:
        return TorqueDeflectionCurve(np.array(angles), np.array(torques))
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def read_curve_csv(path) -> TorqueDeflectionCurve:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    return parse_curve_csv(text, str(path))


def format_table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def parse_table_csv(text: str, source: str = "<csv>") -> tuple[list[str], list[list]]:
    """Header and rows of any emitted table; numeric cells become floats."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise ConfigError(f"{source}: empty table")
    header, body = rows[0], rows[1:]
    out = []
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ConfigError(f"{source}:{lineno}: expected {len(header)} cells, got {len(row)}")
        cells = []
        for c in row:
            try:
                cells.append(float(c))
            except ValueError:
                cells.append(c)
        out.append(cells)
    return header, out


def format_curve_csv(curve: TorqueDeflectionCurve, extra: dict | None = None) -> str:
    """Curve CSV; ``extra`` adds named columns after the two canonical ones."""
    extra = extra or {}
    header = list(CSV_HEADER) + list(extra)
    # exact degree spellings so parsing the text restores the radians bit-for-bit
    degrees = [to_deg(float(a)) for a in curve.angles]
    cols = [degrees, curve.torques] + [np.asarray(v, float) for v in extra.values()]
    return format_table_csv(header, zip(*cols))
