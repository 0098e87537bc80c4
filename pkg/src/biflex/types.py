"""Domain value types shared across the package.

All quantities are SI (m, kg, N, N*m, rad). Millimetres and degrees only
appear at the file and command-line boundary (see :mod:`biflex.config`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Module height budget of the printed ring; exceeding it is a warning only.
MODULE_HEIGHT_BUDGET = 0.021


class ConfigError(ValueError):
    """Raised when an input file or value violates the documented schema."""


class ExtractionError(ValueError):
    """Raised when a buckling point cannot be extracted from a curve."""


def _require(cond: bool, name: str, value, msg: str) -> None:
    if not cond:
        raise ConfigError(f"{name}={value!r}: {msg}")


@dataclass(frozen=True)
class Material:
    name: str
    young_modulus: float

    def __post_init__(self):
        _require(math.isfinite(self.young_modulus) and self.young_modulus > 0,
                 "young_modulus", self.young_modulus, "must be positive")


@dataclass(frozen=True)
class HoneycombGeometry:
    """One buckling module plus its placement on the wrist ring.

    ``b``/``b_c`` are the diagonal and central beam widths, ``L`` the
    out-of-plane depth, ``h_c`` the central beam height, ``H`` the module
    height and ``gamma`` the diagonal tilt from vertical.
    ``effective_length_factor`` scales the diagonal beam length in the
    Euler load (1.0 = pinned-pinned).
    """

    b: float
    b_c: float
    L: float
    h_c: float
    H: float
    gamma: float
    n_modules: int = 12
    ring_radius: float = 0.030
    effective_length_factor: float = 1.0

    def __post_init__(self):
        for name in ("b", "b_c", "L", "h_c", "H", "ring_radius", "effective_length_factor"):
            v = getattr(self, name)
            _require(math.isfinite(v) and v > 0, name, v, f"{name} must be positive")
        _require(math.isfinite(self.gamma) and 0.0 <= self.gamma < math.pi / 2
                 and math.cos(self.gamma) > 1e-12,
                 "gamma", self.gamma, "singular geometry, need 0 <= gamma < 90 deg")
        _require(int(self.n_modules) == self.n_modules and self.n_modules >= 3,
                 "n_modules", self.n_modules, "need at least 3 modules on the ring")

    @property
    def h(self) -> float:
        """Diagonal beam length."""
        return self.H / (2.0 * math.cos(self.gamma))

    @property
    def area(self) -> float:
        return self.b * self.L

    @property
    def area_c(self) -> float:
        return self.b_c * self.L

    @property
    def second_moment(self) -> float:
        return self.L * self.b**3 / 12.0

    def replace(self, **changes) -> "HoneycombGeometry":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class GripperSpec:
    name: str
    mass: float
    length: float

    def __post_init__(self):
        _require(self.mass > 0, "mass", self.mass, "must be positive")
        _require(self.length > 0, "length", self.length, "must be positive")


@dataclass(frozen=True)
class DesignTargets:
    buckling_torque: float
    buckling_angle_limit: float
    torque_tolerance: float = 0.10
    tip_deflection_limit: float = 0.010
    payload: float = 0.500

    def __post_init__(self):
        _require(self.buckling_torque > 0, "buckling_torque", self.buckling_torque,
                 "must be positive")
        _require(0 < self.buckling_angle_limit < math.pi / 2, "buckling_angle_limit",
                 self.buckling_angle_limit, "must lie in (0, 90) deg")
        _require(0 < self.torque_tolerance < 1, "torque_tolerance", self.torque_tolerance,
                 "must lie in (0, 1)")

    def contains(self, point: "BucklingPoint") -> bool:
        """True when ``point`` lies inside the tolerance box."""
        err = abs(point.torque - self.buckling_torque)
        return (err <= self.torque_tolerance * self.buckling_torque
                and point.angle <= self.buckling_angle_limit)


@dataclass(frozen=True)
class BucklingPoint:
    angle: float
    torque: float

    def __post_init__(self):
        if not (self.angle > 0 and self.torque > 0):
            raise ValueError(f"buckling point must be positive, got {self}")


@dataclass(frozen=True, eq=False)
class TorqueDeflectionCurve:
    """Sampled (angle, torque) pairs with strictly increasing angles."""

    angles: np.ndarray
    torques: np.ndarray

    def __post_init__(self):
        a = np.array(self.angles, dtype=float)
        t = np.array(self.torques, dtype=float)
        if a.ndim != 1 or a.shape != t.shape:
            raise ValueError("angles and torques must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(t))):
            raise ValueError("curve contains non-finite samples")
        if a.size > 1 and not np.all(np.diff(a) > 0):
            raise ValueError("curve angles must be strictly increasing")
        a.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "angles", a)
        object.__setattr__(self, "torques", t)

    def __len__(self) -> int:
        return int(self.angles.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TorqueDeflectionCurve):
            return NotImplemented
        return (np.array_equal(self.angles, other.angles)
                and np.array_equal(self.torques, other.torques))

    __hash__ = None


@dataclass(frozen=True)
class ValidationReport:
    checks: dict[str, bool] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def validate(geometry) -> ValidationReport:
    """Check geometry invariants without raising.

    Accepts a :class:`HoneycombGeometry` or a plain mapping of the same field
    names, so half-built or degenerate inputs can still be reported on.
    """
    if isinstance(geometry, HoneycombGeometry):
        g = {k: getattr(geometry, k) for k in HoneycombGeometry.__dataclass_fields__}
    else:
        g = dict(geometry)
    checks: dict[str, bool] = {}
    failures: list[str] = []
    warnings: list[str] = []

    for name in ("b", "b_c", "L", "h_c", "H", "ring_radius"):
        v = g.get(name)
        ok = v is not None and math.isfinite(v) and v > 0
        checks[f"{name}_positive"] = ok
        if not ok:
            failures.append(f"{name} must be positive (got {v!r})")

    gamma = g.get("gamma")
    ok = gamma is not None and 0.0 <= gamma < math.pi / 2 and math.cos(gamma) > 1e-12
    checks["gamma_range"] = ok
    if not ok:
        failures.append(f"gamma must lie in [0, 90) deg (got {gamma!r})")

    n = g.get("n_modules", 12)
    ok = int(n) == n and n >= 3
    checks["n_modules"] = ok
    if not ok:
        failures.append(f"n_modules must be an integer >= 3 (got {n!r})")

    H = g.get("H")
    if checks["H_positive"] and H > MODULE_HEIGHT_BUDGET:
        warnings.append(f"H={H * 1e3:.1f} mm exceeds 21 mm module budget")
    return ValidationReport(checks=checks, failures=failures, warnings=warnings)
