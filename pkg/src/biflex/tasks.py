"""Quasi-static contact simulations: pressing, wiping, pick-and-place, constrained grasp.

The arm is an ideal position source. A commanded vertical interference
``u`` at the fingertip is shared by three elements in series:

* wrist rotation, which lifts the tip by ``length * sin(theta)``;
* the in-hand tool (sponge), a linear spring that bottoms out at ``tool_travel``;
* a residual contact spring (fingertip/structure compliance).

Every element carries the same tip force ``F = torque(theta) / (length cos theta)``.
Equilibrium is solved in ``theta``, where the total interference is strictly
increasing, so each command has one solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .types import GripperSpec
from .wrist import WristModel, rigid_wrist, tip_deflection, torque_at

GRAVITY = 9.81
_THETA_MAX = math.pi / 2 - 1e-9

# Declared calibration constants (not measured values).
SPONGE_STIFFNESS = 1000.0  # N/m
SPONGE_THICKNESS = 0.005  # m, also its travel limit
APPROACH_DEPTH = 0.5e-3  # m, initial sponge engagement when wiping
RIGID_MARGIN = 0.95  # rigid baseline peaks at this fraction of the safety force


@dataclass(frozen=True)
class ContactScenario:
    wrist: WristModel
    gripper: GripperSpec
    tool_stiffness: float = math.inf
    tool_travel: float = math.inf
    contact_stiffness: float = math.inf
    safety_force: float = 15.0

    def __post_init__(self):
        if not self.safety_force > 0:
            raise ValueError("safety_force must be positive")
        if not (self.tool_stiffness > 0 and self.contact_stiffness > 0):
            raise ValueError("tool and contact stiffness must be positive")
        if not self.tool_travel > 0:
            raise ValueError("tool_travel must be positive")


@dataclass(frozen=True)
class Equilibrium:
    interference: float
    wrist_angle: float
    wrist_torque: float
    contact_force: float
    tool_compression: float
    contact_compression: float
    tip_relief: float


@dataclass(frozen=True)
class SimTrace:
    command: np.ndarray
    contact_force: np.ndarray
    wrist_torque: np.ndarray
    wrist_angle: np.ndarray
    tip_deflection: np.ndarray
    terminated_early: bool = False
    reason: str = ""
    outcome: str = "success"
    buckling_angle: float = math.inf

    @property
    def peak_force(self) -> float:
        return float(np.max(self.contact_force)) if self.contact_force.size else 0.0

    @property
    def buckled(self) -> bool:
        return bool(np.any(self.wrist_angle > self.buckling_angle))

    def rows(self):
        return zip(self.command, self.contact_force, self.wrist_torque,
                   self.wrist_angle, self.tip_deflection)


# ---- equilibrium ---------------------------------------------------------

def tip_force(scenario: ContactScenario, theta: float) -> float:
    """Vertical fingertip force balanced by the wrist at angle ``theta``."""
    length = scenario.gripper.length
    return torque_at(scenario.wrist, theta) / (length * math.cos(theta))


def _tool_compression(s: ContactScenario, force: float) -> float:
    if math.isinf(s.tool_stiffness):
        return 0.0
    return min(force / s.tool_stiffness, s.tool_travel)


def _contact_compression(s: ContactScenario, force: float) -> float:
    return 0.0 if math.isinf(s.contact_stiffness) else force / s.contact_stiffness


def interference_at(scenario: ContactScenario, theta: float) -> float:
    """Commanded interference that puts the wrist at ``theta``."""
    f = tip_force(scenario, theta)
    return (scenario.gripper.length * math.sin(theta)
            + _tool_compression(scenario, f) + _contact_compression(scenario, f))


def _state(scenario: ContactScenario, theta: float, u: float) -> Equilibrium:
    f = tip_force(scenario, theta)
    return Equilibrium(interference=u, wrist_angle=theta,
                       wrist_torque=torque_at(scenario.wrist, theta),
                       contact_force=f,
                       tool_compression=_tool_compression(scenario, f),
                       contact_compression=_contact_compression(scenario, f),
                       tip_relief=scenario.gripper.length * math.sin(theta))


def solve_equilibrium(scenario: ContactScenario, interference: float) -> Equilibrium:
    if interference < 0:
        raise ValueError("interference must be non-negative")
    if interference == 0:
        return _state(scenario, 0.0, 0.0)
    if interference >= interference_at(scenario, _THETA_MAX):
        raise ValueError(f"interference {interference * 1e3:.3f} mm cannot be absorbed "
                         "by this chain (kinematically impossible)")
    theta = brentq(lambda t: interference_at(scenario, t) - interference,
                   0.0, _THETA_MAX, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    return _state(scenario, theta, interference)


def _safety_crossing(scenario: ContactScenario) -> float:
    """Smallest wrist angle whose tip force reaches the safety limit."""
    S = scenario.safety_force
    theta = brentq(lambda t: tip_force(scenario, t) - S, 0.0, _THETA_MAX,
                   xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    while tip_force(scenario, theta) < S:
        theta = math.nextafter(theta, math.pi)
    return theta


def _sweep(scenario: ContactScenario, commands: np.ndarray, interference: np.ndarray,
           stop_angle: float | None = None) -> SimTrace:
    """Solve each command in turn; stop at the safety limit or ``stop_angle``.

    Between consecutive commands the interference must vary linearly so the
    exact termination command can be interpolated.
    """
    S = scenario.safety_force
    rows = []
    terminated, reason = False, ""
    prev = None
    for c, u in zip(commands, interference):
        eq = solve_equilibrium(scenario, float(u))
        if eq.contact_force >= S:
            theta = _safety_crossing(scenario)
            u_s = interference_at(scenario, theta)
            c_s = c if prev is None or u == prev[1] else \
                prev[0] + (u_s - prev[1]) / (u - prev[1]) * (c - prev[0])
            rows.append((c_s, _state(scenario, theta, u_s)))
            terminated, reason = True, f"contact force reached safety limit {S:g} N"
            break
        if stop_angle is not None and eq.wrist_angle >= stop_angle:
            u_s = interference_at(scenario, stop_angle)
            c_s = c if prev is None or u == prev[1] else \
                prev[0] + (u_s - prev[1]) / (u - prev[1]) * (c - prev[0])
            rows.append((c_s, _state(scenario, stop_angle, u_s)))
            break
        rows.append((c, eq))
        prev = (c, u)
    length = scenario.gripper.length
    arr = np.array([(c, e.contact_force, e.wrist_torque, e.wrist_angle,
                     length * math.sin(e.wrist_angle)) for c, e in rows]).reshape(-1, 5)
    return SimTrace(command=arr[:, 0], contact_force=arr[:, 1], wrist_torque=arr[:, 2],
                    wrist_angle=arr[:, 3], tip_deflection=arr[:, 4],
                    terminated_early=terminated, reason=reason,
                    outcome="failure" if terminated else "success",
                    buckling_angle=scenario.wrist.buckling.angle)


# ---- pressing ------------------------------------------------------------

def simulate_press(scenario: ContactScenario, max_wrist_angle: float = math.radians(10),
                   step: float = math.radians(0.05)) -> SimTrace:
    """Descend onto a rigid frame until the wrist reaches ``max_wrist_angle``.

    Commands are fingertip descents spaced as the tip would move for wrist
    steps of ``step`` radians; the command scalar is the descent in metres.
    """
    if not max_wrist_angle > 0 or not step > 0:
        raise ValueError("max_wrist_angle and step must be positive")
    length = scenario.gripper.length
    # descent keeps growing past max_wrist_angle so stiff chains still terminate
    n = int(math.ceil(_THETA_MAX / step))
    commands = length * np.sin(np.minimum(np.arange(n + 1) * step, _THETA_MAX))
    u_cap = interference_at(scenario, _THETA_MAX)
    commands = commands[commands < u_cap]
    return _sweep(scenario, commands, commands, stop_angle=max_wrist_angle)


# ---- wiping --------------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """Piecewise-linear surface height over horizontal position."""

    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, float)
        z = np.asarray(self.z, float)
        if x.ndim != 1 or x.shape != z.shape or x.size < 2:
            raise ValueError("profile needs at least two (x, z) vertices")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(z)):
            raise ValueError("profile must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("profile x must be strictly increasing (no negative lengths)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    def __call__(self, x):
        return np.interp(x, self.x, self.z)

    @property
    def height(self) -> float:
        return float(np.max(self.z))


def triangle_profile(height: float, slope: float = math.radians(30), lead: float = 0.02) -> Profile:
    """Symmetric hill of ``height`` with flat lead-in and lead-out."""
    if height <= 0:
        return Profile(np.array([0.0, 2 * lead]), np.zeros(2))
    half = height / math.tan(slope)
    x = np.array([0.0, lead, lead + half, lead + 2 * half, 2 * lead + 2 * half])
    z = np.array([0.0, 0.0, height, 0.0, 0.0])
    return Profile(x, z)


def simulate_wipe(scenario: ContactScenario, profile: Profile, approach_depth: float = APPROACH_DEPTH,
                  step: float = 0.5e-3) -> SimTrace:
    """Slide horizontally at fixed arm height across ``profile``.

    Sampled positions are a uniform grid of spacing ``step`` merged with the
    profile vertices, so the apex is always evaluated.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if not approach_depth > 0:
        raise ValueError("approach_depth must be positive")
    grid = np.arange(profile.x[0], profile.x[-1], step)
    xs = np.unique(np.concatenate([grid, profile.x]))
    u = profile(xs) + approach_depth
    return _sweep(scenario, xs, u)


# ---- pick and place ------------------------------------------------------

@dataclass(frozen=True)
class LoadCase:
    """Object weight acting on a lever about the wrist (default: held at the fingertip)."""

    lever: float | None = None
    gravity_angle: float = 0.0  # 0 = lever horizontal


@dataclass(frozen=True)
class PickReport:
    object_mass: float
    wrist_torque: float
    buckled: bool
    tip_deflection: float
    passed: bool
    buckling_threshold_mass: float


def check_pick_place(model: WristModel, gripper: GripperSpec, object_mass: float,
                     load_case: LoadCase | None = None) -> PickReport:
    if object_mass < 0:
        raise ValueError("object_mass must be non-negative")
    load_case = load_case or LoadCase()
    lever = gripper.length if load_case.lever is None else load_case.lever
    arm = GRAVITY * lever * math.cos(load_case.gravity_angle)
    torque = object_mass * arm
    tip = tip_deflection(model, gripper, torque)
    passed = (not tip.buckled) and tip.deflection < 0.010
    return PickReport(object_mass=object_mass, wrist_torque=torque, buckled=tip.buckled,
                      tip_deflection=tip.deflection, passed=passed,
                      buckling_threshold_mass=model.buckling.torque / arm)


def mass_sweep(model: WristModel, gripper: GripperSpec, masses: Sequence[float],
               load_case: LoadCase | None = None) -> list[PickReport]:
    return [check_pick_place(model, gripper, float(m), load_case) for m in masses]


# ---- constrained grasp ---------------------------------------------------

@dataclass(frozen=True)
class GraspTrial:
    depth: float
    wrist_angle: float
    wrist_torque: float
    contact_force: float
    tip_deflection: float
    buckled: bool
    success: bool


def simulate_constrained_grasp(scenario: ContactScenario,
                               depths: Sequence[float]) -> list[GraspTrial]:
    """Command the fingertips ``depth`` below the table for each depth.

    Pressing, sliding and lifting are quasi-static without friction, so the
    largest force of the cycle is the one at full depth.
    """
    length = scenario.gripper.length
    trials = []
    for d in depths:
        if d < 0:
            raise ValueError("depths must be non-negative")
        if d >= length:
            raise ValueError(f"depth {d * 1e3:.1f} mm >= gripper length (kinematically impossible)")
        eq = solve_equilibrium(scenario, float(d))
        trials.append(GraspTrial(
            depth=float(d), wrist_angle=eq.wrist_angle, wrist_torque=eq.wrist_torque,
            contact_force=eq.contact_force, tip_deflection=length * math.sin(eq.wrist_angle),
            buckled=eq.wrist_angle > scenario.wrist.buckling.angle,
            success=eq.contact_force < scenario.safety_force))
    return trials


# ---- baseline calibration ------------------------------------------------

def calibrate_contact_stiffness(scenario: ContactScenario, interference: float,
                                target_force: float) -> float:
    """Residual contact stiffness giving ``target_force`` at ``interference``."""

    def f(log_k):
        s = replace(scenario, contact_stiffness=math.exp(log_k), safety_force=math.inf)
        return solve_equilibrium(s, interference).contact_force - target_force

    return math.exp(brentq(f, math.log(1e-3), math.log(1e9), xtol=1e-14))


def rigid_baseline(scenario: ContactScenario, interference: float,
                   margin: float = RIGID_MARGIN) -> ContactScenario:
    """Rigid-wrist copy of ``scenario`` that just survives ``interference``.

    The residual contact stiffness is chosen so the force at ``interference``
    is ``margin * safety_force``.
    """
    rigid = replace(scenario, wrist=rigid_wrist())
    k = calibrate_contact_stiffness(rigid, interference, margin * scenario.safety_force)
    return replace(rigid, contact_stiffness=k)
