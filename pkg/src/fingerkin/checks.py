"""Analytic-versus-oracle comparisons shared by the `check` command and the tests."""

from dataclasses import dataclass

import numpy as np

from . import kinematics as kin
from . import oracle
from .contact import ContactConfig, ContactJacobian, assemble_J
from .errors import FingerError
from .transmission import ratio_set

RATIO_TOL = 1e-4
# near-zero ratios are compared against these absolute floors (rad/rad or mm/rad, and mm)
RATIO_FLOOR = 1e-3
CONTACT_FLOOR = 1e-2
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class Comparison:
    name: str
    analytic: float
    reference: float
    error: float
    tol: float

    @property
    def ok(self):
        return bool(self.error <= self.tol)


def scaled_error(a, ref, floor):
    return abs(a - ref) / max(abs(ref), floor)


def compare_ratios(p, s):
    analytic = ratio_set(p, s).as_dict()
    ref = oracle.ratio_oracles(p, s)
    return [Comparison(k, float(analytic[k]), float(ref[k]),
                       scaled_error(analytic[k], ref[k], RATIO_FLOOR), RATIO_TOL)
            for k in oracle.RATIO_NAMES]


def compare_contacts(p, s, c=None):
    c = c or ContactConfig.from_params(p)
    j = assemble_J(p, s, c).matrix
    ref = oracle.contact_projection_oracle(p, s, c)
    out = []
    for i in range(4):
        for k in range(4):
            if not ContactJacobian.ZERO_MASK[i, k]:
                out.append(Comparison(f"J{i + 1}{k + 1}", float(j[i, k]), float(ref[i, k]),
                                      scaled_error(j[i, k], ref[i, k], CONTACT_FLOOR), RATIO_TOL))
    return out


def compare_closures(p, s):
    return [Comparison(f"residual_{k}", v, 0.0, v, RESIDUAL_TOL)
            for k, v in oracle.loop_residuals(p, s).items()]


def random_states(p, n, spread=0.4, seed=0):
    """n reachable analytic states with active angles drawn uniformly from home +/- spread."""
    rng = np.random.default_rng(seed)
    home = np.array(kin.home_angles(p))
    out = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 50 * n:
            raise FingerError(f"only {len(out)} reachable states in {attempts} draws")
        q = home + rng.uniform(-spread, spread, 4)
        try:
            s = kin.state_at(p, *q)
            kin.loop_aux(p, s)
            ratio_set(p, s)
        except FingerError:
            continue
        out.append(s)
    return out


def run_all(p, states):
    rows = []
    for idx, s in enumerate(states):
        for group in (compare_closures(p, s), compare_ratios(p, s), compare_contacts(p, s)):
            rows.extend((idx, cmp) for cmp in group)
    return rows


def worst(rows):
    return max((cmp.error / cmp.tol for _, cmp in rows), default=0.0)

