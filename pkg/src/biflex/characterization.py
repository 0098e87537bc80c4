"""Buckling-point extraction from measured torque/angle curves and model calibration.

The buckling point is where a straight line fitted through the rising
branch meets the torque plateau. The plateau level starts half a band
below the peak torque and is refined by averaging every post-rise sample
within the plateau band around the current level, which removes the
upward bias a noisy maximum would otherwise introduce. On a curve
without a plateau the selection keeps shrinking towards the last samples
until too few remain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .types import (
    BucklingPoint,
    DesignTargets,
    ExtractionError,
    HoneycombGeometry,
    Material,
    TorqueDeflectionCurve,
)
from .wrist import assemble


@dataclass(frozen=True)
class ExtractionParams:
    window_low: float = 0.20
    window_high: float = 0.80
    plateau_tolerance: float = 0.02
    interp_level: float = 0.80

    def __post_init__(self):
        if not 0 < self.window_low < self.window_high <= self.interp_level <= 1:
            raise ValueError("need 0 < window_low < window_high <= interp_level <= 1")
        if not 0 < self.plateau_tolerance < 1:
            raise ValueError("plateau_tolerance must lie in (0, 1)")


@dataclass(frozen=True)
class CharacterizationReport:
    extracted: BucklingPoint
    peak_torque: float
    pre_buckling_stiffness: float
    intercept: float = 0.0
    in_tolerance: bool | None = None
    targets: DesignTargets | None = None
    replicates: tuple[BucklingPoint, ...] = field(default_factory=tuple)


def _fit_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def extract_buckling_point(curve: TorqueDeflectionCurve,
                           params: ExtractionParams | None = None,
                           targets: DesignTargets | None = None) -> CharacterizationReport:
    params = params or ExtractionParams()
    a, t = curve.angles, curve.torques
    if len(curve) < 4:
        raise ExtractionError("curve needs at least 4 samples")
    i_peak = int(np.argmax(t))
    peak = float(t[i_peak])
    if not peak > 0:
        raise ExtractionError("peak torque must be positive")

    rising = np.arange(len(curve)) < i_peak
    in_window = rising & (t >= params.window_low * peak) & (t <= params.window_high * peak)
    if np.count_nonzero(in_window) < 3:
        raise ExtractionError("fewer than 3 samples inside the fit window")
    slope, intercept = _fit_line(a[in_window], t[in_window])
    if slope <= 0:
        raise ExtractionError("non-monotone rising branch (fit slope is not positive)")

    band = params.plateau_tolerance * peak
    # start below the peak so a single noisy maximum cannot empty the band
    level = peak - 0.5 * band
    selected = None
    for _ in range(50):
        # samples past the point where the rising line reaches the level
        past = a >= (level - intercept) / slope
        mask = past & (np.abs(t - level) <= band)
        if np.count_nonzero(mask) < 3:
            raise ExtractionError("no plateau detected")
        if selected is not None and np.array_equal(mask, selected):
            break
        selected = mask
        level = float(np.mean(t[mask]))

    angle = (level - intercept) / slope
    if not angle > 0:
        raise ExtractionError("fitted line meets the plateau at a non-positive angle")
    point = BucklingPoint(float(angle), level)
    verdict = targets.contains(point) if targets is not None else None
    return CharacterizationReport(extracted=point, peak_torque=peak,
                                  pre_buckling_stiffness=slope, intercept=intercept,
                                  in_tolerance=verdict, targets=targets,
                                  replicates=(point,))


def average_replicates(curves: Sequence[TorqueDeflectionCurve],
                       params: ExtractionParams | None = None,
                       targets: DesignTargets | None = None) -> CharacterizationReport:
    """Extract each replicate and report the arithmetic mean point."""
    if not curves:
        raise ExtractionError("need at least one curve")
    reports = []
    for i, c in enumerate(curves):
        try:
            reports.append(extract_buckling_point(c, params))
        except ExtractionError as exc:
            raise ExtractionError(f"curve {i}: {exc}") from exc
    points = tuple(r.extracted for r in reports)
    mean = BucklingPoint(float(np.mean([p.angle for p in points])),
                         float(np.mean([p.torque for p in points])))
    return CharacterizationReport(
        extracted=mean,
        peak_torque=float(np.mean([r.peak_torque for r in reports])),
        pre_buckling_stiffness=float(np.mean([r.pre_buckling_stiffness for r in reports])),
        intercept=float(np.mean([r.intercept for r in reports])),
        in_tolerance=targets.contains(mean) if targets is not None else None,
        targets=targets,
        replicates=points,
    )


def annotated_columns(curve: TorqueDeflectionCurve, report: CharacterizationReport) -> dict:
    """Fitted line and plateau level evaluated at every sample (for plotting)."""
    line = report.pre_buckling_stiffness * curve.angles + report.intercept
    plateau = np.full(len(curve), report.extracted.torque)
    return {"fit_line_Nm": line, "plateau_Nm": plateau}


# ---- calibration ---------------------------------------------------------

FREE_PARAMETERS = ("young_modulus", "ring_radius", "effective_length_factor")
_ALIASES = {"E": "young_modulus", "R": "ring_radius", "k": "effective_length_factor",
            "boundary_factor": "effective_length_factor"}


@dataclass(frozen=True)
class CalibrationResult:
    material: Material
    ring_radius: float
    effective_length_factor: float
    free: tuple[str, ...]
    residuals: dict  # name -> {"angle": rel, "torque": rel}

    def apply(self, geometry: HoneycombGeometry) -> HoneycombGeometry:
        return replace(geometry, ring_radius=self.ring_radius,
                       effective_length_factor=self.effective_length_factor)


def _shared_model(geometry, material, base, values):
    """Apply shared (fitted or fixed) constants to one gripper's geometry."""
    g = replace(geometry,
                ring_radius=values.get("ring_radius", base.ring_radius),
                effective_length_factor=values.get("effective_length_factor",
                                                   base.effective_length_factor))
    m = replace(material, young_modulus=values.get("young_modulus", material.young_modulus))
    return g, m


def calibrate(measured: dict, geometries: dict, material: Material,
              free: Sequence[str] = ("young_modulus",),
              use: Sequence[str] = ("angle", "torque")) -> CalibrationResult:
    """Fit shared model constants so assembled wrists reproduce measured points.

    Parameters
    ----------
    measured : dict
        name -> measured :class:`BucklingPoint`.
    geometries : dict
        name -> :class:`HoneycombGeometry`; ring radius and length factor
        are taken from the first entry as the starting guess and shared.
    free : sequence of str
        Subset of ``young_modulus``, ``ring_radius``, ``effective_length_factor``
        (aliases ``E``, ``R``, ``k``). May be empty.
    use : sequence of str
        Which measured quantities enter the fit.

    Residuals are relative (log-ratio) errors, so grippers with different
    torque magnitudes weigh equally.
    """
    names = tuple(dict.fromkeys(_ALIASES.get(f, f) for f in free))
    for n in names:
        if n not in FREE_PARAMETERS:
            raise ValueError(f"unknown free parameter {n!r}")
    use = tuple(use)
    keys = list(measured)
    n_constraints = len(keys) * len(use)
    if n_constraints < len(names):
        raise ValueError(f"underdetermined fit: free parameters {list(names)} "
                         f"vs {n_constraints} constraints")
    base = geometries[keys[0]]
    x0 = []
    for n in names:
        x0.append(material.young_modulus if n == "young_modulus" else getattr(base, n))
    x0 = np.log(np.array(x0, dtype=float))

    def predict(logx):
        values = dict(zip(names, np.exp(logx)))
        return {k: assemble(*_shared_model(geometries[k], material, base, values)).buckling
                for k in keys}

    def resid(logx):
        pred = predict(logx)
        r = []
        for k in keys:
            for q in use:
                r.append(math.log(getattr(pred[k], q) / getattr(measured[k], q)))
        return np.array(r)

    if names:
        sol = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.linalg.matrix_rank(sol.jac, tol=1e-8 * max(1.0, np.abs(sol.jac).max())) < len(names):
            raise ValueError(f"underdetermined fit: free parameters {list(names)} are not "
                             f"separately identifiable from {list(use)}")
        logx = sol.x
    else:
        logx = x0
    vals = dict(zip(names, np.exp(logx)))
    pred = predict(logx)
    residuals = {k: {"angle": pred[k].angle / measured[k].angle - 1.0,
                     "torque": pred[k].torque / measured[k].torque - 1.0} for k in keys}
    return CalibrationResult(
        material=replace(material, young_modulus=float(vals.get("young_modulus",
                                                                 material.young_modulus))),
        ring_radius=float(vals.get("ring_radius", base.ring_radius)),
        effective_length_factor=float(vals.get("effective_length_factor",
                                               base.effective_length_factor)),
        free=names,
        residuals=residuals,
    )
