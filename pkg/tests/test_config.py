import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biflex.config import (
    config_from_dict,
    format_curve_csv,
    load_config,
    parse_curve_csv,
    serialize,
)
from biflex.types import ConfigError, HoneycombGeometry, TorqueDeflectionCurve, validate


def base_dict(**geometry):
    g = {"b_mm": 1.0, "b_c_mm": 1.5, "L_mm": 20.0, "h_c_mm": 3.0, "H_mm": 8.0, "gamma_deg": 20.0}
    g.update(geometry)
    return {
        "material": {"name": "TPU-95A", "young_modulus_MPa": 26.0},
        "geometry": g,
        "gripper": {"name": "Robotiq 2F-85", "mass_kg": 1.10, "length_mm": 155.0},
        "targets": {"buckling_torque_Nm": 1.325},
    }


def write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_units_converted_once(tmp_path):
    material, geometry, gripper, targets = load_config(write(tmp_path, base_dict()))
    assert geometry.gamma == pytest.approx(0.3491, abs=1e-4)
    assert geometry.b == 0.001
    assert material.young_modulus == 26e6
    assert gripper.length == pytest.approx(0.155)


def test_defaults_applied(tmp_path):
    *_, targets = load_config(write(tmp_path, base_dict()))
    assert targets.torque_tolerance == 0.10
    assert targets.tip_deflection_limit == pytest.approx(0.010)
    assert targets.payload == 0.5
    # derived from the gripper length when not given
    assert math.degrees(targets.buckling_angle_limit) == pytest.approx(3.70, abs=0.1)


def test_gamma_90_is_singular(tmp_path):
    with pytest.raises(ConfigError, match="singular"):
        load_config(write(tmp_path, base_dict(gamma_deg=90.0)))


@pytest.mark.parametrize("field,value", [("b_mm", 0.0), ("H_mm", -1.0), ("n_modules", 2)])
def test_invariant_violation_names_field(tmp_path, field, value):
    with pytest.raises(ConfigError, match=field.split("_mm")[0]):
        load_config(write(tmp_path, base_dict(**{field: value})))


def test_parse_failure(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(p)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.json")


def test_shipped_configs_load():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs"
    for name in ("franka", "robotiq", "bariflex"):
        cfg = load_config(root / f"{name}.json")
        assert validate(cfg.geometry).ok


@given(
    b=st.floats(0.1, 5.0), bc=st.floats(0.1, 5.0), L=st.floats(1.0, 50.0),
    hc=st.floats(0.5, 20.0), H=st.floats(1.0, 40.0), gamma=st.floats(0.0, 89.0),
    E=st.floats(1.0, 5000.0), length=st.floats(20.0, 400.0), R=st.floats(1.0, 100.0),
)
@settings(max_examples=200, deadline=None)
def test_round_trip_bit_equal(b, bc, L, hc, H, gamma, E, length, R):
    d = base_dict(b_mm=b, b_c_mm=bc, L_mm=L, h_c_mm=hc, H_mm=H, gamma_deg=gamma,
                  ring_radius_mm=R)
    d["material"]["young_modulus_MPa"] = E
    d["gripper"]["length_mm"] = length
    cfg = config_from_dict(d)
    again = config_from_dict(json.loads(json.dumps(serialize(cfg))))
    assert again == cfg


def test_validate_reports():
    g = HoneycombGeometry(b=1e-3, b_c=1.5e-3, L=20e-3, h_c=3e-3, H=8e-3, gamma=0.35)
    assert validate(g).ok and not validate(g).warnings

    bad = dict(b=0.0, b_c=1.5e-3, L=20e-3, h_c=3e-3, H=8e-3, gamma=0.35, ring_radius=0.03)
    rep = validate(bad)
    assert not rep.ok
    assert any("b must be positive" in f for f in rep.failures)

    tall = g.replace(H=30e-3)
    rep = validate(tall)
    assert rep.ok
    assert any("exceeds 21 mm module budget" in w for w in rep.warnings)


def test_curve_csv_round_trip():
    a = np.radians(np.linspace(0, 8, 17))
    t = np.minimum(a * 20, 1.4)
    curve = TorqueDeflectionCurve(a, t)
    text = format_curve_csv(curve)
    assert text.splitlines()[0] == "angle_deg,torque_Nm"
    back = parse_curve_csv(text)
    np.testing.assert_allclose(back.angles, curve.angles, rtol=1e-15)
    np.testing.assert_array_equal(back.torques, curve.torques)


def test_curve_csv_rejects_bad_header():
    with pytest.raises(ConfigError, match="header"):
        parse_curve_csv("theta,tau\n0,0\n")


def test_curve_requires_increasing_angles():
    with pytest.raises(ValueError):
        TorqueDeflectionCurve(np.array([0.0, 0.2, 0.1]), np.zeros(3))
