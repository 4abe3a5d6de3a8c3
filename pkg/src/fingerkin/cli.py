"""Command-line front end: `hand pose|forces|sweep|check`."""

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import checks
from . import kinematics as kin
from .contact import ContactConfig, assemble_J
from .errors import ConfigError, FingerError
from .stability import CSV_COLUMNS, StabilityMap, SweepRow, default_grid, solve_forces, sweep
from .transmission import assemble_T

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

LENGTH_KEYS = ("l1", "l2", "l3", "a0", "a123", "b", "c0", "c123", "k12", "k3", "k4")
CONFIG_KEYS = LENGTH_KEYS + ("q", "delta7_deg", "alpha_deg", "eta_deg", "f10")

# finger placement around the palm; single-finger results do not depend on it
PRESETS = {
    "neutral": "fingers evenly spread, spring-returned posture",
    "cylindrical": "two fingers facing the third, parallel closing planes",
    "spherical": "fingers converging towards a common point",
}


@dataclass(frozen=True)
class RunConfig:
    params: kin.DesignParams
    contact: ContactConfig
    grid: tuple
    out: Path = None
    preset: str = "neutral"


def _number(raw, key):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)) or not math.isfinite(raw):
        raise ConfigError(f"{key} must be a finite number, got {raw!r}")
    return float(raw)


def params_from_mapping(data):
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    v = {k: _number(data[k], k) for k in data}
    for k in LENGTH_KEYS:
        if k in v and v[k] <= 0:
            raise ConfigError(f"{k} must be positive, got {v[k]!r}")
    for k, name in (("alpha_deg", "alpha"), ("eta_deg", "eta")):
        if k in v and not 0 < v[k] < 180:
            raise ConfigError(f"{name} must be in (0, 180)")
    if "delta7_deg" in v and not 0 <= v["delta7_deg"] <= 360:
        raise ConfigError("delta7 must be in [0, 360]")
    if "f10" in v and v["f10"] <= 0:
        raise ConfigError(f"f10 must be positive, got {v['f10']!r}")
    kw = {}
    for key, names in (("l1", ("l1",)), ("l2", ("l2",)), ("l3", ("l3",)), ("a0", ("a0",)),
                       ("c0", ("c0",)), ("a123", ("a1", "a2", "a3")), ("b", ("b1", "b2", "b3")),
                       ("c123", ("c1", "c2", "c3")), ("k12", ("k1", "k2")), ("k3", ("k3",)),
                       ("k4", ("k4",)), ("q", ("q3", "q4")), ("f10", ("f10",))):
        if key in v:
            kw.update({n: v[key] for n in names})
    for key, name in (("delta7_deg", "delta7"), ("alpha_deg", "alpha"), ("eta_deg", "eta")):
        if key in v:
            kw[name] = math.radians(v[key])
    try:
        p = kin.DesignParams(**kw)
    except FingerError as exc:
        raise ConfigError(str(exc)) from exc
    for name, link in (("k12", p.l1), ("k3", p.l2), ("k4", p.l3)):
        k = {"k12": p.k1, "k3": p.k3, "k4": p.k4}[name]
        if k > link:
            raise ConfigError(f"{name} = {k!r} exceeds its phalanx length {link!r}")
    return p


def parse_grid(text):
    try:
        axes = []
        for part in text.split(","):
            lo, hi, step = (float(x) for x in part.split(":"))
            if not step > 0 or hi < lo:
                raise ValueError
            axes.append((lo, hi, step))
        if len(axes) != 2:
            raise ValueError
    except ValueError:
        raise ConfigError(f"grid must read t2min:t2max:step,t6min:t6max:step, got {text!r}") from None
    return tuple(axes)


def load_config(path=None, grid=None, out=None, preset="neutral"):
    data = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8") or "{}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a flat key-value object")
    p = params_from_mapping(data)
    if preset not in PRESETS:
        raise ConfigError(f"preset must be one of {', '.join(PRESETS)}")
    g = parse_grid(grid) if grid else default_grid(p)
    return RunConfig(p, ContactConfig.from_params(p), g, Path(out) if out else None, preset)


# ------------------------------------------------------------- commands

def _state(cfg, args):
    t1, t2, t6, t7 = kin.home_angles(cfg.params)
    if args.theta2 is not None:
        t2 = args.theta2
    if args.theta6 is not None:
        t6 = args.theta6
    return kin.state_at(cfg.params, t1, t2, t6, t7)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8", newline="\n")


def cmd_pose(cfg, args):
    s = _state(cfg, args)
    names = ("theta1", "theta2", "theta3", "theta5", "theta6", "theta7",
             "nu1", "psi1", "psi2", "psi4", "psi5", "psi6")
    lines = [f"# preset: {cfg.preset} ({PRESETS[cfg.preset]})", f"{'angle':<8} {'rad':>22} {'deg':>22}"]
    for n in names:
        v = float(getattr(s, n))
        lines.append(f"{n:<8} {v:>22.15f} {math.degrees(v):>22.12f}")
    lines.append(f"{'mode':<8} {s.assembly_mode:>22}")
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


def cmd_forces(cfg, args):
    p = cfg.params
    s = _state(cfg, args)
    sol = solve_forces(assemble_T(p, s), assemble_J(p, s, cfg.contact), np.array([p.f10, 0, 0, 0]),
                       cfg.contact.active)
    smap = StabilityMap(np.array([s.theta2]), np.array([s.theta6]),
                        [SweepRow(float(s.theta2), float(s.theta6), sol.f, sol.stable, sol.condition_estimate)])
    _emit(smap.to_csv(), cfg.out)
    return EXIT_OK


def plot_script(csv_path):
    return "\n".join([
        "# gnuplot script: f1 over the (theta2, theta6) grid",
        "set datafile separator ','",
        "set key off",
        "set xlabel 'theta2 (rad)'",
        "set ylabel 'theta6 (rad)'",
        "set zlabel 'f1 (N)'",
        "set dgrid3d",
        f"splot '{csv_path.name}' every ::1 using 1:2:3 with lines",
        "pause -1",
        "",
    ])


def cmd_sweep(cfg, args):
    smap = sweep(cfg.params, cfg.contact, cfg.grid, np.array([cfg.params.f10, 0, 0, 0]))
    _emit(smap.to_csv(), cfg.out)
    if cfg.out is not None:
        cfg.out.with_suffix(".gp").write_text(plot_script(cfg.out), encoding="utf-8", newline="\n")
    return EXIT_OK


def cmd_check(cfg, args):
    p = cfg.params
    states = [_state(cfg, args)] + checks.random_states(p, args.samples, seed=args.seed)
    rows = checks.run_all(p, states)
    lines = [f"{'state':>5} {'quantity':<16} {'analytic':>24} {'oracle':>24} {'error':>10} {'tol':>8} result"]
    for idx, c in rows:
        lines.append(f"{idx:>5} {c.name:<16} {c.analytic:>24.15g} {c.reference:>24.15g} "
                     f"{c.error:>10.3g} {c.tol:>8.0e} {'ok' if c.ok else 'FAIL'}")
    failed = sum(not c.ok for _, c in rows)
    lines.append(f"# {len(rows)} comparisons over {len(states)} states, {failed} failed")
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_NUMERIC if failed else EXIT_OK


COMMANDS = {"pose": cmd_pose, "forces": cmd_forces, "sweep": cmd_sweep, "check": cmd_check}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="hand", description="Kinetostatics of the underactuated finger.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON file of design parameters")
    ap.add_argument("--theta2", type=float, help="spherical-module input angle (rad)")
    ap.add_argument("--theta6", type=float, help="middle-phalanx angle (rad)")
    ap.add_argument("--grid", help="t2min:t2max:step,t6min:t6max:step (rad)")
    ap.add_argument("--out", help="output file (stdout if omitted)")
    ap.add_argument("--preset", default="neutral", choices=sorted(PRESETS))
    ap.add_argument("--samples", type=int, default=20, help="random states for check")
    ap.add_argument("--seed", type=int, default=0, help="random seed for check")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.grid, args.out, args.preset)
    except ConfigError as exc:
        print(f"hand: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args)
    except FingerError as exc:
        print(f"hand: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
