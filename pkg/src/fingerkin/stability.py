"""Contact-force solve, grasp-stability predicate and (theta2, theta6) sweeps."""

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    FingerError,
    GeometryInfeasibleError,
    StabilityIndeterminateError,
    TransmissionSingularityError,
    UnreachableConfigurationError,
    VirtualMechanismSingularityError,
)
from .kinematics import home_angles, state_at
from .transmission import assemble_T
from .contact import ContactConfig, assemble_J

FORCE_TOL = 1e-9
COND_LIMIT = 1e12
CSV_COLUMNS = ("theta2", "theta6", "f1", "f2", "f3", "f4", "stable", "condition", "flag")

_FLAGS = (
    (StabilityIndeterminateError, "ill_conditioned"),
    (TransmissionSingularityError, "transmission_singular"),
    (VirtualMechanismSingularityError, "virtual_singular"),
    (UnreachableConfigurationError, "unreachable"),
    (GeometryInfeasibleError, "infeasible"),
    (FingerError, "error"),
)


@dataclass(frozen=True)
class ForceSolution:
    f: np.ndarray
    t_in: np.ndarray
    stable: bool
    condition_estimate: float


def _as_matrix(m):
    return np.asarray(getattr(m, "matrix", m), dtype=float)


def solve_forces(T, J, t, active=(True, True, True, True)):
    """Contact forces f with T^t (J^t f) = t, by two linear solves."""
    tm, jm = _as_matrix(T), _as_matrix(J)
    t = np.asarray(t, dtype=float)
    if not (np.all(np.isfinite(tm)) and np.all(np.isfinite(jm))):
        raise StabilityIndeterminateError("non-finite entries in T or J")
    cond = float(np.linalg.cond(tm) * np.linalg.cond(jm))
    if not cond < COND_LIMIT:
        raise StabilityIndeterminateError(f"force system ill-conditioned (condition {cond:.3g})", cond)
    joint_torque = np.linalg.solve(tm.T, t)
    f = np.linalg.solve(jm.T, joint_torque)
    stable = bool(all(fi >= -FORCE_TOL for fi, a in zip(f, active) if a))
    return ForceSolution(f, t, stable, cond)


def stability_predicate(sol, c):
    return bool(all(fi >= -FORCE_TOL for fi, a in zip(sol.f, c.active) if a))


def flag_for(exc):
    for cls, name in _FLAGS:
        if isinstance(exc, cls):
            return name
    return "error"


def axis_values(lo, hi, step):
    if step <= 0 or hi < lo:
        raise ValueError(f"bad axis {lo}:{hi}:{step}")
    n = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


@dataclass
class SweepRow:
    theta2: float
    theta6: float
    f: np.ndarray = None
    stable: bool = False
    condition: float = math.inf
    flag: str = ""


@dataclass
class StabilityMap:
    theta2: np.ndarray
    theta6: np.ndarray
    rows: list = field(default_factory=list)

    def f1_grid(self):
        """f1 as a (len(theta2), len(theta6)) array with NaN at flagged samples."""
        g = np.full((len(self.theta2), len(self.theta6)), np.nan)
        for k, r in enumerate(self.rows):
            if not r.flag:
                g[divmod(k, len(self.theta6))] = r.f[0]
        return g

    def to_csv(self):
        buf = io.StringIO(newline="")
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for r in self.rows:
            forces = [format(float(x), ".17g") for x in r.f] if r.f is not None else [""] * 4
            cells = [format(float(r.theta2), ".17g"), format(float(r.theta6), ".17g"), *forces,
                     "1" if r.stable else "0", format(float(r.condition), ".17g"), r.flag]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def default_grid(p, half_width=0.6, step=0.02):
    _, t2, t6, _ = home_angles(p)
    return ((t2 - half_width, t2 + half_width, step), (t6 - half_width, t6 + half_width, step))


def sweep(p, c=None, grid=None, t=None):
    """Solve the force system over a theta2 x theta6 grid (theta2 outer, theta6 inner, ascending).

    theta1 and theta7 stay at their home values.
    """
    if c is None:
        c = ContactConfig.from_params(p)
    if grid is None:
        grid = default_grid(p)
    if t is None:
        t = np.array([p.f10, 0.0, 0.0, 0.0])
    t1, _, _, t7 = home_angles(p)
    ax2 = axis_values(*grid[0])
    ax6 = axis_values(*grid[1])
    out = StabilityMap(ax2, ax6)
    for th2 in ax2:
        for th6 in ax6:
            row = SweepRow(float(th2), float(th6))
            try:
                s = state_at(p, t1, float(th2), float(th6), t7)
                sol = solve_forces(assemble_T(p, s), assemble_J(p, s, c), t, c.active)
                row.f, row.stable, row.condition = sol.f, sol.stable, sol.condition_estimate
            except FingerError as exc:
                row.flag = flag_for(exc)
                row.condition = getattr(exc, "condition", math.inf)
            out.rows.append(row)
    return out


def relative_variation(f1_grid):
    """(mean relative range of f1 along theta2, same along theta6), ignoring NaN samples."""

    def along(g):
        vals = []
        for line in g:
            line = line[np.isfinite(line)]
            if len(line) > 1 and np.mean(np.abs(line)) > 0:
                vals.append((line.max() - line.min()) / np.mean(np.abs(line)))
        return float(np.mean(vals)) if vals else math.nan

    return along(f1_grid.T), along(f1_grid)


def variation_ratio(smap):
    """Variation of f1 along theta2 divided by its variation along theta6."""
    v2, v6 = relative_variation(smap.f1_grid())
    return v2 / v6
