"""Designed vs predicted vs measured buckling points, one row per gripper."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .config import format_table_csv, read_json, targets_from_dict
from .types import BucklingPoint, ConfigError, DesignTargets

# manifest subcommand -> column it fills
_COLUMNS = {"design": "designed", "analyze": "predicted", "characterize": "measured"}


class ReportError(ValueError):
    """Manifests that cannot be tabulated together."""


@dataclass
class ReportRow:
    gripper: str
    targets: DesignTargets | None = None
    designed: BucklingPoint | None = None
    predicted: BucklingPoint | None = None
    measured: BucklingPoint | None = None

    def verdict(self, column: str) -> bool | None:
        p = getattr(self, column)
        if p is None or self.targets is None:
            return None
        return self.targets.contains(p)


def _point(d: dict | None) -> BucklingPoint | None:
    if not d:
        return None
    return BucklingPoint(math.radians(d["angle_deg"]), d["torque_Nm"])


def _result_path(manifest_path: Path, manifest: dict) -> Path:
    out = manifest.get("outputs", {}).get("result")
    if not out:
        raise ReportError(f"{manifest_path}: manifest lists no result output")
    p = Path(out)
    return p if p.is_absolute() else manifest_path.parent / p


def collect(manifest_paths) -> list[ReportRow]:
    """Load manifests and merge their results by gripper name (input order kept)."""
    if not manifest_paths:
        raise ReportError("need at least one manifest")
    rows: dict[str, ReportRow] = {}
    for mp in manifest_paths:
        mp = Path(mp)
        manifest = read_json(mp)
        kind = manifest.get("subcommand")
        if kind not in _COLUMNS:
            raise ReportError(f"{mp}: incompatible manifest kind {kind!r} "
                              f"(expected one of {sorted(_COLUMNS)})")
        result = read_json(_result_path(mp, manifest))
        name = result.get("gripper") or "unnamed"
        row = rows.setdefault(name, ReportRow(name))
        if result.get("targets") and row.targets is None:
            try:
                row.targets = targets_from_dict(result["targets"])
            except ConfigError as exc:
                raise ReportError(f"{mp}: bad targets in result: {exc}") from exc
        point_key = {"design": "achieved", "analyze": "buckling",
                     "characterize": "extracted"}[kind]
        setattr(row, _COLUMNS[kind], _point(result.get(point_key)))
    return list(rows.values())


_HEADER = ["gripper", "target_torque_Nm", "angle_limit_deg",
           "designed_angle_deg", "designed_torque_Nm", "designed_in_box",
           "predicted_angle_deg", "predicted_torque_Nm", "predicted_in_box",
           "measured_angle_deg", "measured_torque_Nm", "measured_in_box"]


def _cells(row: ReportRow) -> list:
    t = row.targets
    cells = [row.gripper,
             "" if t is None else t.buckling_torque,
             "" if t is None else math.degrees(t.buckling_angle_limit)]
    for col in ("designed", "predicted", "measured"):
        p = getattr(row, col)
        v = row.verdict(col)
        cells += ["" if p is None else math.degrees(p.angle),
                  "" if p is None else p.torque,
                  "" if v is None else ("yes" if v else "NO")]
    return cells


def as_dicts(rows: list[ReportRow]) -> list[dict]:
    return [dict(zip(_HEADER, _cells(r))) for r in rows]


def to_csv(rows: list[ReportRow]) -> str:
    return format_table_csv(_HEADER, (_cells(r) for r in rows))


def to_text(rows: list[ReportRow]) -> str:
    def fmt(v):
        return f"{v:.3f}" if isinstance(v, float) else str(v)

    table = [["gripper", "target", "designed", "predicted", "measured"]]
    for r in rows:
        cells = [fmt(c) for c in _cells(r)]
        target = "-" if not cells[1] else f"{cells[1]} Nm / <{cells[2]} deg"
        cols = []
        for i in (3, 6, 9):
            if not cells[i]:
                cols.append("-")
            else:
                mark = {"yes": " [in]", "NO": " [OUT]", "": ""}[cells[i + 2]]
                cols.append(f"{cells[i + 1]} Nm @ {cells[i]} deg{mark}")
        table.append([r.gripper, target, *cols])
    widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table]
    return "\n".join(lines) + "\n"
