import math

import numpy as np
import pytest

from biflex.characterization import calibrate
from biflex.tasks import SPONGE_STIFFNESS, SPONGE_THICKNESS, ContactScenario
from biflex.types import BucklingPoint, GripperSpec, HoneycombGeometry, Material
from biflex.wrist import assemble

# Shared, uncalibrated placeholders for the dimensions not varied between designs.
SHARED = dict(b_c=1.5e-3, L=20e-3, h_c=3e-3, H=8e-3, n_modules=12, ring_radius=0.030)

# (gripper length m, reference b mm, reference gamma deg, target torque N m)
DESIGNS = {
    "franka": (0.135, 0.90, 50.0, 0.96),
    "robotiq": (0.155, 1.00, 20.0, 1.325),
    "bariflex": (0.205, 1.20, 5.0, 1.378),
}
ANGLE_LIMITS_DEG = {"franka": 4.20, "robotiq": 3.70, "bariflex": 2.80}
MEASURED = {
    "franka": BucklingPoint(math.radians(3.40), 0.95),
    "robotiq": BucklingPoint(math.radians(3.99), 1.45),
    "bariflex": BucklingPoint(math.radians(3.06), 1.51),
}
GRIPPERS = {
    "franka": GripperSpec("Franka Hand", 0.70, 0.135),
    "robotiq": GripperSpec("Robotiq 2F-85", 1.10, 0.155),
    "bariflex": GripperSpec("BaRiFlex", 0.75, 0.205),
}


def design_geometry(name, **overrides):
    _, b, g, _ = DESIGNS[name]
    kw = dict(SHARED, b=b * 1e-3, gamma=math.radians(g))
    kw.update(overrides)
    return HoneycombGeometry(**kw)


@pytest.fixture
def tpu():
    return Material("TPU-95A", 26e6)


@pytest.fixture
def design_geometries():
    return {name: design_geometry(name) for name in DESIGNS}


@pytest.fixture(scope="session")
def robotiq_calibration():
    """(E, R) fitted to the measured Robotiq buckling point."""
    return calibrate({"robotiq": MEASURED["robotiq"]},
                     {"robotiq": design_geometry("robotiq")},
                     Material("TPU-95A", 26e6), free=("E", "R"))


@pytest.fixture(scope="session")
def robotiq_wrist(robotiq_calibration):
    cal = robotiq_calibration
    return assemble(cal.apply(design_geometry("robotiq")), cal.material)


@pytest.fixture(scope="session")
def robotiq():
    return GRIPPERS["robotiq"]


@pytest.fixture(scope="session")
def sponge_scenario(robotiq_wrist, robotiq):
    return ContactScenario(robotiq_wrist, robotiq, tool_stiffness=SPONGE_STIFFNESS,
                           tool_travel=SPONGE_THICKNESS)


def random_geometry(rng, b_range=(0.4e-3, 2.0e-3), gamma_range=(0.0, math.radians(60))):
    return HoneycombGeometry(
        b=rng.uniform(*b_range),
        b_c=rng.uniform(0.5e-3, 3e-3),
        L=rng.uniform(5e-3, 40e-3),
        h_c=rng.uniform(1e-3, 8e-3),
        H=rng.uniform(3e-3, 21e-3),
        gamma=rng.uniform(*gamma_range),
        n_modules=int(rng.integers(3, 25)),
        ring_radius=rng.uniform(2e-3, 50e-3),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20250101)


# ---- acceptance reporting ------------------------------------------------

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and not (rep.when == "setup" and rep.failed)):
        return
    number, title = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _CRITERIA[number] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[number]
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
