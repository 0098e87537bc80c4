"""Choose diagonal width ``b`` and tilt ``gamma`` to hit a target buckling point.

Everything but (b, gamma) is held fixed. A full grid is scored by relative
torque error among angle-feasible cells, candidates are ranked by the
total order (score, gamma, b), and the best one is refined by bisection on
``b`` along its gamma until the torque error drops below ``refine_tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import bisect

from .mechanics import (
    central_axial_stiffness,
    diagonal_axial_stiffness,
    euler_module_load,
    series_module_stiffness,
)
from .types import BucklingPoint, DesignTargets, GripperSpec, HoneycombGeometry, Material
from .wrist import angle_limit


@dataclass(frozen=True)
class DesignBounds:
    b_min: float = 0.4e-3
    b_max: float = 2.0e-3
    gamma_min: float = 0.0
    gamma_max: float = math.radians(60.0)
    n_b: int = 200
    n_gamma: int = 200

    def __post_init__(self):
        if not 0 < self.b_min < self.b_max:
            raise ValueError("need 0 < b_min < b_max")
        if not 0 <= self.gamma_min <= self.gamma_max < math.pi / 2:
            raise ValueError("gamma bounds must satisfy 0 <= min <= max < 90 deg")
        if self.n_b < 2 or self.n_gamma < 1:
            raise ValueError("grid needs n_b >= 2 and n_gamma >= 1")


@dataclass(frozen=True)
class DesignSolution:
    geometry: HoneycombGeometry
    achieved: BucklingPoint
    target: DesignTargets
    in_tolerance: bool
    torque_error: float
    angle_margin: float


@dataclass(frozen=True)
class FeasibilityMap:
    b: np.ndarray
    gamma: np.ndarray
    torque: np.ndarray
    angle: np.ndarray
    feasible: np.ndarray

    def rows(self):
        B, G = np.meshgrid(self.b, self.gamma, indexing="ij")
        for bi, gi, t, a, f in zip(B.ravel(), G.ravel(), self.torque.ravel(),
                                   self.angle.ravel(), self.feasible.ravel()):
            yield bi, gi, t, a, bool(f)


def derive_targets(gripper: GripperSpec, payload: float, tip_limit: float,
                   torque_target: float, torque_tolerance: float = 0.10) -> DesignTargets:
    """Targets whose angle limit keeps the fingertip within ``tip_limit``."""
    if not tip_limit > 0:
        raise ValueError("tip_limit must be positive (zero gives a degenerate angle limit)")
    if tip_limit >= gripper.length:
        raise ValueError("tip_limit must be shorter than the gripper")
    return DesignTargets(buckling_torque=torque_target,
                         buckling_angle_limit=angle_limit(gripper.length, tip_limit),
                         torque_tolerance=torque_tolerance,
                         tip_deflection_limit=tip_limit, payload=payload)


def forward(b, gamma, fixed: HoneycombGeometry, material: Material):
    """Buckling (angle, torque) of the assembled wrist for arrays of b and gamma."""
    E, g = material.young_modulus, fixed
    k1 = diagonal_axial_stiffness(E, b, g.L, g.H, gamma)
    k2 = central_axial_stiffness(E, g.b_c, g.L, g.h_c)
    k_eq = series_module_stiffness(k1, k2, gamma)
    f_cr = euler_module_load(E, b, g.L, g.H, gamma, g.effective_length_factor)
    R, n = g.ring_radius, g.n_modules
    angle = f_cr / (k_eq * R)
    torque = k_eq * n * R**2 / 2.0 * angle
    return angle, torque


def feasibility_map(targets: DesignTargets, fixed: HoneycombGeometry, material: Material,
                    bounds: DesignBounds | None = None) -> FeasibilityMap:
    bounds = bounds or DesignBounds()
    b = np.linspace(bounds.b_min, bounds.b_max, bounds.n_b)
    gamma = np.linspace(bounds.gamma_min, bounds.gamma_max, bounds.n_gamma)
    B, G = np.meshgrid(b, gamma, indexing="ij")
    angle, torque = forward(B, G, fixed, material)
    feasible = angle <= targets.buckling_angle_limit
    return FeasibilityMap(b, gamma, torque, angle, feasible)


def _evaluate(b, gamma, fixed, material):
    angle, torque = forward(b, gamma, fixed, material)
    return float(angle), float(torque)


def _refine_b(gamma, b_lo, b_hi, targets, fixed, material, tol):
    """Bisection on b for the target torque along one gamma column."""
    T = targets.buckling_torque

    def f(b):
        return _evaluate(b, gamma, fixed, material)[1] - T

    f_lo, f_hi = f(b_lo), f(b_hi)
    if f_lo > 0 or f_hi < 0:
        return None
    b = bisect(f, b_lo, b_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(f(b)) / T >= tol:
        return None
    return b


def solve(targets: DesignTargets, fixed: HoneycombGeometry, material: Material,
          bounds: DesignBounds | None = None, refine_tol: float = 1e-3) -> DesignSolution:
    """Search (b, gamma) so the assembled wrist's buckling point meets ``targets``.

    ``fixed.b`` and ``fixed.gamma`` are ignored. If no grid cell satisfies
    the angle limit, the closest-torque cell is returned with
    ``in_tolerance=False``; this is a result, not an error.
    """
    bounds = bounds or DesignBounds()
    fmap = feasibility_map(targets, fixed, material, bounds)
    if not np.all(np.isfinite(fmap.torque)):
        raise ValueError("non-finite torque on the design grid; check gamma bounds")
    T = targets.buckling_torque
    score = np.abs(fmap.torque - T) / T
    ib, ig = np.meshgrid(np.arange(bounds.n_b), np.arange(bounds.n_gamma), indexing="ij")
    cand = fmap.feasible.ravel()
    if not cand.any():
        cand = np.ones_like(cand)
    # deterministic total order: score, then smaller gamma, then smaller b
    order = np.lexsort((ib.ravel(), ig.ravel(), score.ravel()))
    order = order[cand[order]]

    b_grid, g_grid = fmap.b, fmap.gamma
    chosen = None
    tried = set()
    for flat in order:
        j = int(ig.ravel()[flat])
        if j in tried:
            continue
        tried.add(j)
        gamma = float(g_grid[j])
        b = _refine_b(gamma, bounds.b_min, bounds.b_max, targets, fixed, material, refine_tol)
        if b is None:
            continue
        angle, _ = _evaluate(b, gamma, fixed, material)
        if angle <= targets.buckling_angle_limit:
            chosen = (b, gamma)
            break
    if chosen is None:
        flat = int(order[0])
        chosen = (float(b_grid[ib.ravel()[flat]]), float(g_grid[ig.ravel()[flat]]))

    b, gamma = chosen
    geometry = replace(fixed, b=float(b), gamma=float(gamma))
    angle, torque = _evaluate(b, gamma, fixed, material)
    achieved = BucklingPoint(angle, torque)
    return DesignSolution(geometry=geometry, achieved=achieved, target=targets,
                          in_tolerance=targets.contains(achieved),
                          torque_error=abs(torque - T) / T,
                          angle_margin=targets.buckling_angle_limit - angle)
