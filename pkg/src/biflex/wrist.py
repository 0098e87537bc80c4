"""Wrist-level torque/angle law from a ring of buckling modules.

Modules sit at ring angles ``2*pi*i/n`` and radius ``R``. Tilting the top
plate by ``theta`` about an axis through the universal joint compresses
module ``i`` by ``R sin(phi_i - phi_axis) theta``; extension-side modules
act in tension with the same stiffness. Summing moments gives
``K_rot = K_eq n R^2 / 2`` for any axis when ``n >= 3``.

The wrist buckles once the most loaded module reaches its critical load,
and afterwards holds a constant plateau torque.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mechanics import critical_module_load, effective_stiffness
from .types import BucklingPoint, GripperSpec, HoneycombGeometry, Material, TorqueDeflectionCurve


@dataclass(frozen=True)
class WristModel:
    rotational_stiffness: float
    buckling: BucklingPoint
    plateau_torque: float
    geometry: HoneycombGeometry | None = None
    material: Material | None = None

    def __post_init__(self):
        if not self.rotational_stiffness > 0:
            raise ValueError("rotational_stiffness must be positive")

    @property
    def is_rigid(self) -> bool:
        return math.isinf(self.plateau_torque)


@dataclass(frozen=True)
class TipDeflection:
    deflection: float
    angle: float
    buckled: bool


def module_angles(n: int, axis: float = 0.0) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n - axis


def ring_rotational_stiffness(k_eq: float, n: int, radius: float, axis: float = 0.0) -> float:
    """Moment-sum stiffness for one bending axis (no closed-form shortcut)."""
    s = np.sin(module_angles(n, axis))
    return float(k_eq * radius**2 * np.sum(s * s))


def buckling_torque_bruteforce(f_cr: float, k_eq: float, n: int, radius: float,
                               n_axes: int = 3601) -> float:
    """Smallest torque over bending axes at which any module reaches ``f_cr``."""
    best = math.inf
    for axis in np.linspace(0.0, 2 * np.pi / n, n_axes):
        s = np.sin(module_angles(n, axis))
        k_rot = k_eq * radius**2 * np.sum(s * s)
        theta = f_cr / (k_eq * radius * np.max(np.abs(s)))
        best = min(best, k_rot * theta)
    return float(best)


def assemble(geometry: HoneycombGeometry, material: Material) -> WristModel:
    k_eq = effective_stiffness(geometry, material)
    f_cr = critical_module_load(geometry, material)
    n, R = geometry.n_modules, geometry.ring_radius
    k_rot = k_eq * n * R**2 / 2.0
    # worst-case axis passes a module through the bending plane (|sin| = 1)
    angle = f_cr / (k_eq * R)
    torque = k_rot * angle
    return WristModel(rotational_stiffness=k_rot,
                      buckling=BucklingPoint(angle, torque),
                      plateau_torque=torque,
                      geometry=geometry, material=material)


def bilinear_wrist(buckling_angle: float, buckling_torque: float) -> WristModel:
    """Wrist model given directly by its buckling point."""
    return WristModel(rotational_stiffness=buckling_torque / buckling_angle,
                      buckling=BucklingPoint(buckling_angle, buckling_torque),
                      plateau_torque=buckling_torque)


def rigid_wrist(rotational_stiffness: float = 1e6) -> WristModel:
    """Stand-in for a rigid flange: very stiff and never buckles."""
    return WristModel(rotational_stiffness=rotational_stiffness,
                      buckling=BucklingPoint(math.inf, math.inf),
                      plateau_torque=math.inf)


def torque_at(model: WristModel, angle):
    """Wrist torque at ``angle`` (scalar or array, radians, >= 0)."""
    a = np.asarray(angle, dtype=float)
    if np.any(a < 0):
        raise ValueError("angle must be non-negative")
    tau = np.where(a <= model.buckling.angle,
                   model.rotational_stiffness * a, model.plateau_torque)
    return float(tau) if tau.ndim == 0 else tau


def predicted_curve(model: WristModel, max_angle: float, n_samples: int) -> TorqueDeflectionCurve:
    if not max_angle > 0:
        raise ValueError("max_angle must be positive")
    if n_samples < 4:
        raise ValueError("need at least 4 samples")
    angles = np.linspace(0.0, max_angle, n_samples)
    return TorqueDeflectionCurve(angles, torque_at(model, angles))


def angle_limit(length: float, tip_limit: float = 0.010) -> float:
    """Wrist angle that moves a fingertip at ``length`` sideways by ``tip_limit``."""
    if not 0 < tip_limit < length:
        raise ValueError("tip_limit must be positive and shorter than the gripper")
    return math.asin(tip_limit / length)


def tip_deflection(model: WristModel, gripper: GripperSpec, wrist_torque: float) -> TipDeflection:
    """Fingertip displacement under a static wrist torque.

    At or beyond the buckling torque the plateau law has no unique angle;
    the result is flagged ``buckled`` with infinite deflection.
    """
    if wrist_torque < 0:
        raise ValueError("wrist_torque must be non-negative")
    if wrist_torque >= model.buckling.torque:
        return TipDeflection(math.inf, math.inf, True)
    theta = wrist_torque / model.rotational_stiffness
    return TipDeflection(gripper.length * math.sin(theta), theta, False)
