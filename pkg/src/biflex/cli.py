"""``biflex`` command line: analyze, design, characterize, simulate, report.

Millimetres and degrees at this surface, SI inside. Stdout carries JSON
only; diagnostics go to stderr (verbosity via ``BIFLEX_LOG``). Exit codes:
0 success, 1 domain error, 2 I/O or parse error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__, report as report_mod
from .characterization import (
    ExtractionParams,
    annotated_columns,
    average_replicates,
    calibrate,
)
from .config import (
    config_from_dict,
    dumps,
    format_curve_csv,
    format_table_csv,
    geometry_to_dict,
    gripper_from_dict,
    load_config,
    read_curve_csv,
    read_json,
    serialize,
    targets_to_dict,
)
from .design import DesignBounds, feasibility_map, solve
from .mechanics import module_response
from .plotting import line_plot_svg
from .tasks import (
    ContactScenario,
    LoadCase,
    mass_sweep,
    simulate_constrained_grasp,
    simulate_press,
    simulate_wipe,
    triangle_profile,
    Profile,
)
from .types import BucklingPoint, ConfigError, ExtractionError, validate
from .wrist import assemble, bilinear_wrist, predicted_curve, rigid_wrist

log = logging.getLogger("biflex")


class UsageError(Exception):
    """Bad flag values; exit status 2."""


# ---- helpers -------------------------------------------------------------

def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def point_dict(p: BucklingPoint) -> dict:
    return {"angle_deg": math.degrees(p.angle), "torque_Nm": p.torque}


def _floats(text: str, n: int, flag: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{flag}: expected {n} comma-separated numbers, got {text!r}")
    if len(vals) != n:
        raise UsageError(f"{flag}: expected {n} comma-separated numbers, got {text!r}")
    return vals


class Run:
    """Collects outputs and parameters for the manifest."""

    def __init__(self, args, subcommand: str):
        self.args = args
        self.subcommand = subcommand
        self.inputs: list[str] = []
        self.outputs: dict[str, str] = {}
        self.parameters: dict = {}

    def emit(self, role: str, path, text: str) -> None:
        write_atomic(path, text)
        self.outputs[role] = str(path)

    def finish(self, result: dict) -> None:
        out = getattr(self.args, "out", None)
        manifest = getattr(self.args, "manifest", None)
        if manifest and not out:
            m = Path(manifest)
            out = m.with_name(m.stem + ".result.json")
        if out:
            self.emit("result", out, dumps(result))
        if manifest:
            mpath = Path(manifest)
            outputs = {}
            for role, p in self.outputs.items():
                try:
                    outputs[role] = os.path.relpath(p, mpath.parent)
                except ValueError:
                    outputs[role] = str(Path(p).resolve())
            record = {
                "subcommand": self.subcommand,
                "inputs": self.inputs,
                "outputs": outputs,
                "parameters": self.parameters,
                "tool_version": __version__,
                "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            }
            write_atomic(mpath, dumps(record))
        sys.stdout.write(dumps(result))


# ---- analyze -------------------------------------------------------------

def cmd_analyze(args) -> int:
    run = Run(args, "analyze")
    run.inputs.append(args.config)
    material, geometry, gripper, targets = load_config(args.config)
    model = assemble(geometry, material)
    resp = module_response(geometry, material)
    report = validate(geometry)
    for w in report.warnings:
        log.warning(w)
    result = {
        "gripper": gripper.name,
        "geometry": geometry_to_dict(geometry),
        "module": {"k1_N_per_m": resp.k1, "k2_N_per_m": resp.k2, "k_eq_N_per_m": resp.k_eq,
                   "f_cr_N": resp.f_cr, "delta_y_at_buckling_mm": resp.delta_y_at_buckling * 1e3},
        "wrist": {"rotational_stiffness_Nm_per_rad": model.rotational_stiffness,
                  "plateau_torque_Nm": model.plateau_torque},
        "buckling": point_dict(model.buckling),
        "targets": targets_to_dict(targets) if targets else None,
        "in_tolerance": targets.contains(model.buckling) if targets else None,
        "warnings": report.warnings,
    }
    max_angle = math.radians(args.max_angle_deg) if args.max_angle_deg else 2.5 * model.buckling.angle
    run.parameters = {"max_angle_deg": math.degrees(max_angle), "samples": args.samples}
    if args.curve or args.svg:
        curve = predicted_curve(model, max_angle, args.samples)
        if args.curve:
            run.emit("curve", args.curve, format_curve_csv(curve))
        if args.svg:
            run.emit("svg", args.svg, line_plot_svg(
                np.degrees(curve.angles), curve.torques, "wrist angle [deg]",
                "torque [N m]", f"{gripper.name} predicted", hline=model.buckling.torque))
    run.finish(result)
    return 0


# ---- design --------------------------------------------------------------

def _bounds(data: dict, grid: str | None) -> DesignBounds:
    d = data.get("design", {}) or {}
    kw = {}
    for key, field, conv in (("b_min_mm", "b_min", 1e-3), ("b_max_mm", "b_max", 1e-3)):
        if key in d:
            kw[field] = float(d[key]) * conv
    for key, field in (("gamma_min_deg", "gamma_min"), ("gamma_max_deg", "gamma_max")):
        if key in d:
            kw[field] = math.radians(float(d[key]))
    if grid:
        try:
            nb, ng = (int(v) for v in grid.lower().split("x"))
        except ValueError:
            raise UsageError(f"--grid: expected NBxNGAMMA, got {grid!r}")
        kw.update(n_b=nb, n_gamma=ng)
    try:
        return DesignBounds(**kw)
    except ValueError as exc:
        raise ConfigError(f"design bounds: {exc}") from exc


def cmd_design(args) -> int:
    run = Run(args, "design")
    run.inputs.append(args.targets)
    data = read_json(args.targets)
    material, geometry, gripper, targets = config_from_dict(data)
    if targets is None:
        raise ConfigError(f"{args.targets}: 'targets' section is required for design")
    bounds = _bounds(data, args.grid)
    run.parameters = {"grid": [bounds.n_b, bounds.n_gamma],
                      "b_range_mm": [bounds.b_min * 1e3, bounds.b_max * 1e3],
                      "gamma_range_deg": [math.degrees(bounds.gamma_min),
                                          math.degrees(bounds.gamma_max)]}
    sol = solve(targets, geometry, material, bounds)
    result = {
        "gripper": gripper.name,
        "geometry": geometry_to_dict(sol.geometry),
        "b_mm": sol.geometry.b * 1e3,
        "gamma_deg": math.degrees(sol.geometry.gamma),
        "achieved": point_dict(sol.achieved),
        "targets": targets_to_dict(targets),
        "in_tolerance": sol.in_tolerance,
        "torque_error": sol.torque_error,
        "angle_margin_deg": math.degrees(sol.angle_margin),
    }
    if args.map:
        fmap = feasibility_map(targets, geometry, material, bounds)
        rows = ((b * 1e3, math.degrees(g), t, math.degrees(a), int(f))
                for b, g, t, a, f in fmap.rows())
        run.emit("feasibility_map", args.map, format_table_csv(
            ["b_mm", "gamma_deg", "torque_Nm", "angle_deg", "feasible"], rows))
    run.finish(result)
    return 0


# ---- characterize --------------------------------------------------------

def cmd_characterize(args) -> int:
    run = Run(args, "characterize")
    lo, hi = _floats(args.fit_window, 2, "--fit-window")
    try:
        params = ExtractionParams(window_low=lo, window_high=hi,
                                  plateau_tolerance=args.plateau_tol,
                                  interp_level=max(hi, 0.80))
    except ValueError as exc:
        raise UsageError(str(exc))
    curves = []
    for p in args.curves:
        run.inputs.append(p)
        curves.append(read_curve_csv(p))
    targets, name = None, args.gripper
    if args.targets:
        run.inputs.append(args.targets)
        cfg = load_config(args.targets)
        targets = cfg.targets
        name = name or cfg.gripper.name
    rep = average_replicates(curves, params, targets)
    run.parameters = {"fit_window": [lo, hi], "plateau_tol": args.plateau_tol}
    result = {
        "gripper": name,
        "extracted": point_dict(rep.extracted),
        "replicates": [point_dict(p) for p in rep.replicates],
        "peak_torque_Nm": rep.peak_torque,
        "pre_buckling_stiffness_Nm_per_rad": rep.pre_buckling_stiffness,
        "targets": targets_to_dict(targets) if targets else None,
        "in_tolerance": rep.in_tolerance,
    }
    if args.annotated:
        single = average_replicates(curves[:1], params)
        run.emit("annotated", args.annotated,
                 format_curve_csv(curves[0], annotated_columns(curves[0], single)))
    if args.calibrate:
        run.inputs.append(args.calibrate)
        material, geometry, gripper, cfg_targets = load_config(args.calibrate)
        free = [f for f in args.free.split(",") if f]
        cal = calibrate({gripper.name: rep.extracted}, {gripper.name: geometry}, material, free)
        run.parameters["free"] = free
        result["calibration"] = {
            "free": list(cal.free),
            "young_modulus_MPa": cal.material.young_modulus / 1e6,
            "ring_radius_mm": cal.ring_radius * 1e3,
            "effective_length_factor": cal.effective_length_factor,
            "residuals": {k: {q: float(v) for q, v in r.items()} for k, r in cal.residuals.items()},
        }
        if args.calibrated_config:
            run.emit("calibrated_config", args.calibrated_config, dumps(serialize(
                (cal.material, cal.apply(geometry), gripper, cfg_targets))))
    run.finish(result)
    return 0


# ---- simulate ------------------------------------------------------------

def _scenario(data: dict, base: Path) -> ContactScenario:
    gripper = gripper_from_dict(data.get("gripper") or {})
    w = data.get("wrist") or {}
    kind = w.get("type", "bilinear")
    if kind == "bilinear":
        wrist = bilinear_wrist(math.radians(float(w["buckling_angle_deg"])),
                               float(w["buckling_torque_Nm"]))
    elif kind == "config":
        p = Path(w["path"])
        cfg = load_config(p if p.is_absolute() else base / p)
        wrist = assemble(cfg.geometry, cfg.material)
    elif kind == "rigid":
        wrist = rigid_wrist(float(w.get("rotational_stiffness_Nm_per_rad", 1e6)))
    else:
        raise ConfigError(f"wrist.type={kind!r}: expected bilinear, config or rigid")
    tool = data.get("tool") or {}
    return ContactScenario(
        wrist=wrist, gripper=gripper,
        tool_stiffness=float(tool.get("stiffness_N_per_mm", math.inf)) * 1e3,
        tool_travel=float(tool.get("travel_mm", math.inf)) * 1e-3,
        contact_stiffness=float(data.get("contact_stiffness_N_per_mm", math.inf)) * 1e3,
        safety_force=float(data.get("safety_force_N", 15.0)))


def _profile(d: dict) -> Profile:
    if d.get("type", "triangle") == "triangle":
        return triangle_profile(float(d["height_mm"]) * 1e-3,
                                math.radians(float(d.get("slope_deg", 30.0))),
                                float(d.get("lead_mm", 20.0)) * 1e-3)
    return Profile(np.asarray(d["x_mm"], float) * 1e-3, np.asarray(d["z_mm"], float) * 1e-3)


def _trace_rows(trace):
    return ((c * 1e3, f, t, math.degrees(a), d * 1e3) for c, f, t, a, d in trace.rows())


def cmd_simulate(args) -> int:
    run = Run(args, "simulate")
    run.inputs.append(args.scenario)
    data = read_json(args.scenario)
    try:
        scenario = _scenario(data, Path(args.scenario).parent)
        opts = data.get(args.mode) or {}
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{args.scenario}: bad scenario ({exc})") from exc
    run.parameters = {"mode": args.mode, **opts}
    summary = {"mode": args.mode, "gripper": scenario.gripper.name,
               "safety_force_N": scenario.safety_force}
    svg_xy = None
    if args.mode in ("press", "wipe"):
        if args.mode == "press":
            trace = simulate_press(scenario, math.radians(float(opts.get("max_wrist_angle_deg", 10.0))),
                                   math.radians(float(opts.get("step_deg", 0.05))))
            header = ["descent_mm", "contact_force_N", "wrist_torque_Nm", "wrist_angle_deg",
                      "tip_deflection_mm"]
        else:
            try:
                profile = _profile(opts.get("profile") or {})
            except KeyError as exc:
                raise ConfigError(f"wipe.profile: missing {exc}") from exc
            trace = simulate_wipe(scenario, profile,
                                  float(opts.get("approach_depth_mm", 0.5)) * 1e-3,
                                  float(opts.get("step_mm", 0.5)) * 1e-3)
            header = ["x_mm", "contact_force_N", "wrist_torque_Nm", "wrist_angle_deg",
                      "tip_deflection_mm"]
        summary.update(outcome=trace.outcome, peak_force_N=trace.peak_force,
                       buckled=trace.buckled, terminated_early=trace.terminated_early,
                       reason=trace.reason)
        rows = list(_trace_rows(trace))
        svg_xy = (trace.command * 1e3, trace.contact_force, header[0].replace("_mm", " [mm]"))
    elif args.mode == "pick":
        masses = [float(m) for m in opts.get("masses_kg", [0.1 * i for i in range(11)])]
        lever = opts.get("lever_mm")
        case = LoadCase(lever=None if lever is None else float(lever) * 1e-3)
        reports = mass_sweep(scenario.wrist, scenario.gripper, masses, case)
        header = ["mass_kg", "wrist_torque_Nm", "tip_deflection_mm", "buckled", "passed"]
        rows = [(r.object_mass, r.wrist_torque, r.tip_deflection * 1e3, int(r.buckled),
                 int(r.passed)) for r in reports]
        summary.update(buckling_threshold_mass_kg=reports[0].buckling_threshold_mass if reports else None,
                       passed=[r.object_mass for r in reports if r.passed],
                       buckled=any(r.buckled for r in reports),
                       outcome="success" if all(r.passed for r in reports) else "failure")
        svg_xy = (np.array(masses), np.array([r.wrist_torque for r in reports]), "mass [kg]")
    else:
        depths = [float(d) * 1e-3 for d in opts.get("depths_mm", [5.0 * i for i in range(11)])]
        trials = simulate_constrained_grasp(scenario, depths)
        header = ["depth_mm", "contact_force_N", "wrist_torque_Nm", "wrist_angle_deg", "success"]
        rows = [(t.depth * 1e3, t.contact_force, t.wrist_torque, math.degrees(t.wrist_angle),
                 int(t.success)) for t in trials]
        summary.update(peak_force_N=max((t.contact_force for t in trials), default=0.0),
                       buckled=any(t.buckled for t in trials),
                       succeeded_depths_mm=[t.depth * 1e3 for t in trials if t.success],
                       outcome="success" if all(t.success for t in trials) else "failure")
        svg_xy = (np.array(depths) * 1e3, np.array([t.contact_force for t in trials]), "depth [mm]")
    if args.trace:
        run.emit("trace", args.trace, format_table_csv(header, rows))
    if args.svg and svg_xy is not None:
        x, y, xlabel = svg_xy
        ylabel = "wrist torque [N m]" if args.mode == "pick" else "contact force [N]"
        hline = None if args.mode == "pick" else scenario.safety_force
        run.emit("svg", args.svg, line_plot_svg(x, y, xlabel, ylabel, f"{args.mode}",
                                                hline=hline, hline_label="safety limit"))
    run.finish(summary)
    return 0


# ---- report --------------------------------------------------------------

def cmd_report(args) -> int:
    rows = report_mod.collect(args.manifests)
    if args.csv:
        write_atomic(args.csv, report_mod.to_csv(rows))
    text = report_mod.to_text(rows)
    if args.text:
        write_atomic(args.text, text)
    sys.stderr.write(text)
    sys.stdout.write(dumps(report_mod.as_dicts(rows)))
    return 0


# ---- entry point ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="biflex", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"biflex {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="also write the result JSON here")
        sp.add_argument("--manifest", help="write a run manifest here")

    a = sub.add_parser("analyze", help="predict the wrist torque/angle law from a config")
    a.add_argument("--config", required=True)
    a.add_argument("--curve", help="predicted curve CSV output")
    a.add_argument("--svg", help="predicted curve plot")
    a.add_argument("--max-angle-deg", type=float)
    a.add_argument("--samples", type=int, default=200)
    common(a)
    a.set_defaults(func=cmd_analyze)

    d = sub.add_parser("design", help="solve (b, gamma) for target buckling point")
    d.add_argument("--targets", required=True, help="config JSON with a targets section")
    d.add_argument("--map", help="feasibility map CSV output")
    d.add_argument("--grid", help="grid resolution NBxNGAMMA (default 200x200)")
    common(d)
    d.set_defaults(func=cmd_design)

    c = sub.add_parser("characterize", help="extract buckling points from measured curves")
    c.add_argument("curves", nargs="+", help="CSV files (angle_deg,torque_Nm)")
    c.add_argument("--fit-window", default="0.2,0.8")
    c.add_argument("--plateau-tol", type=float, default=0.02)
    c.add_argument("--targets", help="config JSON with targets for the tolerance verdict")
    c.add_argument("--gripper", help="gripper name for the report")
    c.add_argument("--annotated", help="annotated first-curve CSV output")
    c.add_argument("--calibrate", help="config whose free constants are fitted to the result")
    c.add_argument("--free", default="E", help="comma list from E,R,k (default E)")
    c.add_argument("--calibrated-config", help="write the calibrated config here")
    common(c)
    c.set_defaults(func=cmd_characterize)

    s = sub.add_parser("simulate", help="quasi-static task simulation")
    s.add_argument("mode", choices=["press", "wipe", "pick", "grasp"])
    s.add_argument("--scenario", required=True)
    s.add_argument("--trace", help="trace CSV output")
    s.add_argument("--svg", help="force plot output")
    common(s)
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="tabulate designed/predicted/measured points")
    r.add_argument("manifests", nargs="+")
    r.add_argument("--csv", help="table CSV output")
    r.add_argument("--text", help="table text output")
    r.set_defaults(func=cmd_report)
    return p


def run(argv=None) -> int:
    level = os.environ.get("BIFLEX_LOG", "WARNING").upper()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("biflex: %(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(getattr(logging, level, logging.WARNING))
    log.propagate = False
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError, OSError) as exc:
        print(f"biflex: error: {exc}", file=sys.stderr)
        return 2
    except (ExtractionError, report_mod.ReportError, ValueError) as exc:
        print(f"biflex: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
