"""Stiffness and buckling load of a single honeycomb module.

A module is two diagonal beams tilted by ``gamma`` from vertical that meet
a horizontal central beam at their lower/upper joints. Under a vertical
load the diagonals shorten axially and push the joints outward, which the
central beam resists. Perpendicular (bending) forces on the diagonals are
neglected, so the module reduces to three axial springs.

The formula helpers accept floats or numpy arrays so the inverse-design
grid can evaluate them in bulk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .types import HoneycombGeometry, Material


@dataclass(frozen=True)
class ModuleResponse:
    k1: float
    k2: float
    k_eq: float
    f_cr: float
    delta_y_at_buckling: float


@dataclass(frozen=True)
class ModuleState:
    f_i: float
    delta_y: float
    delta_x: float
    delta_h: float
    f_a: float


# ---- formula helpers (scalar or array) -----------------------------------

def diagonal_length(H, gamma, factor=1.0):
    """Effective Euler length of a diagonal beam."""
    return factor * H / (2.0 * np.cos(gamma))


def diagonal_axial_stiffness(E, b, L, H, gamma):
    return 2.0 * E * b * L * np.cos(gamma) / H


def central_axial_stiffness(E, b_c, L, h_c):
    return E * b_c * L / h_c


def series_module_stiffness(k1, k2, gamma):
    """Vertical stiffness of the three-spring module.

    Each diagonal carries ``F/(2 cos g)``; its joint moves outward by
    ``F tan g / (2 k2)``, which adds ``sin^2 g / k2`` of compliance in
    series with ``1/k1`` before projecting back onto the vertical.
    """
    c = np.cos(gamma)
    s = np.sin(gamma)
    return 2.0 * k1 * k2 * c**2 / (k2 + k1 * s**2)


def euler_module_load(E, b, L, H, gamma, factor=1.0):
    """Vertical module load at which a diagonal reaches its Euler load."""
    h = diagonal_length(H, gamma, factor)
    second_moment = L * b**3 / 12.0
    p_cr = math.pi**2 * E * second_moment / h**2
    return 2.0 * np.cos(gamma) * p_cr


# ---- operations on value types -------------------------------------------

def beam_stiffnesses(geometry: HoneycombGeometry, material: Material) -> tuple[float, float]:
    g, E = geometry, material.young_modulus
    k1 = float(diagonal_axial_stiffness(E, g.b, g.L, g.H, g.gamma))
    k2 = float(central_axial_stiffness(E, g.b_c, g.L, g.h_c))
    return k1, k2


def effective_stiffness(geometry: HoneycombGeometry, material: Material) -> float:
    k1, k2 = beam_stiffnesses(geometry, material)
    return float(series_module_stiffness(k1, k2, geometry.gamma))


def critical_module_load(geometry: HoneycombGeometry, material: Material) -> float:
    g = geometry
    return float(euler_module_load(material.young_modulus, g.b, g.L, g.H, g.gamma,
                                   g.effective_length_factor))


def module_response(geometry: HoneycombGeometry, material: Material) -> ModuleResponse:
    k1, k2 = beam_stiffnesses(geometry, material)
    k_eq = float(series_module_stiffness(k1, k2, geometry.gamma))
    f_cr = critical_module_load(geometry, material)
    return ModuleResponse(k1=k1, k2=k2, k_eq=k_eq, f_cr=f_cr,
                          delta_y_at_buckling=f_cr / k_eq)


def oracle_solve(geometry: HoneycombGeometry, material: Material, f_i: float) -> ModuleState:
    """Solve the three-spring module numerically for a vertical load.

    Independent of :func:`series_module_stiffness`: the half-module is
    assembled as a 2x2 linear system in the joint displacements and handed
    to ``numpy.linalg.solve``.

    Unknowns are the vertical closure ``delta_y`` and the outward joint
    displacement ``delta_x``. Equations, with ``f_a = k1 * delta_h``:

    * vertical balance at the loaded joint: ``f_a cos g = f_i / 2``
    * horizontal balance at the side joint: ``f_a sin g = k2 delta_x``
    """
    if f_i < 0:
        raise ValueError(f"f_i must be non-negative, got {f_i}")
    k1, k2 = beam_stiffnesses(geometry, material)
    c, s = math.cos(geometry.gamma), math.sin(geometry.gamma)
    # delta_h = c*dy - s*dx
    A = np.array([[k1 * c * c, -k1 * c * s],
                  [k1 * s * c, -k1 * s * s - k2]])
    rhs = np.array([f_i / 2.0, 0.0])
    dy, dx = np.linalg.solve(A, rhs)
    dh = dy * c - dx * s
    return ModuleState(f_i=f_i, delta_y=float(dy), delta_x=float(dx),
                       delta_h=float(dh), f_a=float(k1 * dh))


def oracle_stiffness(geometry: HoneycombGeometry, material: Material) -> float:
    """Vertical stiffness read off the oracle at unit load."""
    return 1.0 / oracle_solve(geometry, material, 1.0).delta_y


def reciprocal_keq_form(geometry: HoneycombGeometry, material: Material) -> float:
    """Reciprocal-style closed form ``(H b_c + 2 b h_c cos sin) / (2 E L b b_c cos^3)``.

    It has units of compliance (m/N), is off by a factor 2 from the oracle
    at gamma = 0 and carries sin(gamma) where force balance gives
    sin^2(gamma). Kept only so tests can show the discrepancy.
    """
    g, E = geometry, material.young_modulus
    c, s = math.cos(g.gamma), math.sin(g.gamma)
    return (g.H * g.b_c + 2 * g.b * g.h_c * c * s) / (2 * E * g.L * g.b * g.b_c * c**3)
