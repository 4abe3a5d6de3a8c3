import dataclasses
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fingerkin import DesignParams, oracle
from fingerkin import kinematics as kin
from fingerkin.errors import (
    GeometryInfeasibleError,
    UnreachableConfigurationError,
    VirtualMechanismSingularityError,
)

mp.mp.dps = 40


def _mp_home(alpha_deg, eta_deg):
    a, e = mp.radians(alpha_deg), mp.radians(eta_deg)
    t1 = mp.acos((mp.cos(a) - mp.sin(e / 2) ** 2) / mp.cos(e / 2) ** 2) / 2
    tt = mp.tan(a / 2) * mp.tan(e / 2)
    t2 = -2 * mp.atan(mp.sqrt((-tt - 1) / (tt - 1)))
    t6 = -mp.acos((2 * mp.cos(a) + mp.cos(e) - 1) / (mp.cos(e) + 1)) / 2 - mp.pi / 2
    return float(t1), float(t2), float(t6)


# ---------------------------------------------------------------- params

def test_table1_defaults():
    p = DesignParams()
    assert (p.l1, p.l2, p.l3, p.a0, p.c0, p.f10) == (61, 41, 38, 100, 28, 1)
    assert p.a1 == p.a2 == p.a3 == 38 and p.b1 == p.b2 == p.b3 == 58 and p.c1 == p.c2 == p.c3 == 16
    assert p.k1 == p.k2 == 30.5 and p.k3 == 20.5 and p.k4 == 19
    assert p.alpha == pytest.approx(math.radians(85)) and p.eta == pytest.approx(math.radians(40))


def test_z1_high_precision():
    ref = 61 * mp.cos(mp.radians(20)) / (2 * mp.sin(mp.radians(42.5)))
    assert DesignParams().z1 == pytest.approx(float(ref), rel=1e-14)
    assert DesignParams().z1 == pytest.approx(42.423, abs=5e-4)


@pytest.mark.parametrize("kw", [dict(alpha=0.0), dict(alpha=math.pi), dict(eta=-0.1),
                                dict(l1=0.0), dict(b2=-1.0), dict(c0=math.nan)])
def test_invalid_params_rejected(kw):
    with pytest.raises(GeometryInfeasibleError):
        DesignParams(**kw)


def test_home_pose_denominator_guard():
    alpha = math.radians(80)
    eta = 2 * math.atan(1 / math.tan(alpha / 2))
    with pytest.raises(GeometryInfeasibleError):
        DesignParams(alpha=alpha, eta=eta)


# ------------------------------------------------------------- home pose

def test_home_angles_match_high_precision(params):
    t1, t2, t6, t7 = kin.home_angles(params)
    r1, r2, r6 = _mp_home(85, 40)
    assert t1 == pytest.approx(r1, abs=1e-13)
    assert t2 == pytest.approx(r2, abs=1e-13)
    assert t6 == pytest.approx(r6, abs=1e-13)
    assert t1 == pytest.approx(0.8023, abs=5e-5)
    assert t6 == pytest.approx(-2.3731, abs=5e-5)


def test_home_theta7_is_pi_minus_delta7(params, home):
    assert home.theta7 == pytest.approx(math.pi / 2, abs=1e-15)
    p = dataclasses.replace(params, delta7=1.2)
    assert kin.home_angles(p)[3] == pytest.approx(math.pi - 1.2, abs=1e-15)


def test_home_theta1_closure_cross_check(params):
    # theta1 from the brentq oracle on the same equation rearranged as cos(2*t1)*ce2^2 + se2^2 = cos(alpha)
    se2, ce2 = math.sin(params.eta / 2), math.cos(params.eta / 2)

    def res(x):
        return np.array([math.cos(2 * x[0]) * ce2**2 + se2**2 - math.cos(params.alpha)])

    root = oracle.solve_closure(oracle.ClosureSystem(res), 0.8)[0]
    assert kin.home_angles(params)[0] == pytest.approx(root, abs=1e-10)


def test_home_infeasible_reports_equation():
    p = DesignParams(alpha=math.radians(60), eta=math.radians(150))
    with pytest.raises(GeometryInfeasibleError, match="home theta1"):
        kin.home_angles(p)


def test_home_state_mode_and_symmetry(home):
    assert home.assembly_mode == "parallelogram"
    assert home.psi1 + home.psi6 == 0.0


# ------------------------------------------------------- spherical module

def test_theta3_matches_numeric_root(params, home):
    root = oracle.coupler_angle(params, home.theta2, home.theta3)
    assert home.theta3 == pytest.approx(root, abs=1e-10)
    assert oracle.coupler_angle(params, home.theta2, home.theta3 + 0.05) == pytest.approx(root, abs=1e-10)
    assert oracle.loop_residuals(params, home)["theta3"] < 1e-8


def test_theta5_matches_numeric_root(params, home):
    root = oracle.output_angle(params, home.theta2, home.theta5)
    assert home.theta5 == pytest.approx(root, abs=1e-10)
    assert oracle.loop_residuals(params, home)["theta5"] < 1e-8


def test_parallelogram_branch_picked_among_roots(params, home):
    # the closure in theta5 has two roots; the library returns the parallelogram one
    roots = {round(oracle.output_angle(params, home.theta2, seed), 9)
             for seed in np.linspace(-math.pi, math.pi, 41)
             if _has_root_near(params, home.theta2, seed)}
    assert len(roots) == 2
    assert round(home.theta5, 9) in roots
    assert home.theta5 == pytest.approx(-home.theta3, abs=1e-12)


def _has_root_near(p, t2, seed):
    try:
        oracle.output_angle(p, t2, seed)
        return True
    except Exception:
        return False


def test_symmetric_design_theta3(params):
    p = dataclasses.replace(params, alpha=math.radians(60), eta=math.radians(60))
    t2 = kin.home_angles(p)[1]
    t3 = kin.solve_theta3(p, t2)
    assert t3 == pytest.approx(oracle.coupler_angle(p, t2, t3), abs=1e-9)


def test_theta3_continuous_across_zero(params):
    for a, b in ((-1e-6, 0.0), (0.0, 1e-6), (-2e-6, 2e-6)):
        assert abs(kin.solve_theta3(params, b) - kin.solve_theta3(params, a)) < 1e-4
        assert abs(kin.solve_theta5(params, b) - kin.solve_theta5(params, a)) < 1e-4


def test_theta5_continuous_over_sweep(params, home):
    t2 = home.theta2 + np.arange(-0.3, 0.3, 1e-4)
    t5 = np.array([kin.solve_theta5(params, x) for x in t2])
    assert np.max(np.abs(np.diff(t5))) < 1e-3


def test_theta3_unreachable():
    # equal link angles fold the loop flat at theta2 = 0: no defined coupler angle
    p = DesignParams(alpha=math.radians(60), eta=math.radians(60))
    with pytest.raises(UnreachableConfigurationError):
        kin.solve_theta3(p, 0.0)


def test_rates_match_finite_differences(params, home):
    for t2 in home.theta2 + np.array([-0.4, 0.0, 0.25]):
        h = 1e-6
        fd3 = (kin.solve_theta3(params, t2 + h) - kin.solve_theta3(params, t2 - h)) / (2 * h)
        fd5 = (kin.solve_theta5(params, t2 + h) - kin.solve_theta5(params, t2 - h)) / (2 * h)
        assert kin.theta3_rate(params, t2)[0] == pytest.approx(fd3, rel=1e-6)
        assert kin.theta5_rate(params, t2)[0] == pytest.approx(fd5, rel=1e-6)


# ------------------------------------------------------------------- P6

def test_p6_matches_chain_midpoint(params, home):
    ref = oracle.coupler_midpoint(params, home.theta2, home.theta3)
    assert np.allclose(kin.p6_position(params, home.theta2), ref, atol=1e-12)


def test_p6_velocity_matches_finite_difference(params, home):
    for t2 in home.theta2 + np.array([-0.3, 0.0, 0.4]):
        h = 1e-6
        fd = (kin.p6_position(params, t2 + h) - kin.p6_position(params, t2 - h)) / (2 * h)
        v = kin.p6_velocity(params, t2)
        assert np.linalg.norm(v - fd) < 1e-5 * np.linalg.norm(fd)


def test_p6_stays_on_sphere(params, home):
    norms = [np.linalg.norm(kin.p6_position(params, t)) for t in home.theta2 + np.linspace(-0.6, 0.6, 121)]
    assert np.std(norms) < 1e-9 * np.mean(norms)
    assert np.mean(norms) == pytest.approx(params.z1, rel=1e-12)


# ------------------------------------------------------ virtual mechanism

def test_virtual_mech_matches_oracle(params, home):
    nu1, psi1 = oracle.virtual_angles(params, oracle.coupler_midpoint(params, home.theta2, home.theta3))
    assert home.nu1 == pytest.approx(nu1, abs=1e-12)
    assert home.psi1 == pytest.approx(psi1, abs=1e-12)
    assert home.psi6 == -home.psi1


def test_psi1_continuous_where_p6y_changes_sign(params, home):
    t2 = home.theta2 + np.arange(-0.6, 0.6, 1e-4)
    py = np.array([kin.p6_position(params, x)[1] for x in t2])
    assert np.any(np.diff(np.sign(py)) != 0)
    psi1 = np.array([kin.virtual_mech(params, x)[1] for x in t2])
    assert np.max(np.abs(np.diff(psi1))) < 1e-3


def test_virtual_mech_singularity_guard(params, monkeypatch):
    monkeypatch.setattr(kin, "p6_position", lambda p, t: np.array([0.0, -math.sin(p.eta / 2),
                                                                    math.cos(p.eta / 2)]) * p.z1)
    with pytest.raises(VirtualMechanismSingularityError):
        kin.virtual_mech(params, 0.0)


# ------------------------------------------------------------- loop aux

def test_loop_aux_identities(params, home):
    aux = kin.loop_aux(params, home)
    assert aux.l1p == pytest.approx(2 * params.z1 * math.cos(home.nu1 / 2), abs=1e-10)
    assert aux.psi5p == -home.nu1 / 2 - home.psi5
    assert aux.l2p == pytest.approx(math.hypot(16, 41), abs=1e-12)
    assert aux.l2p**2 == pytest.approx(params.c2**2 - 2 * params.c2 * params.l2 * math.cos(home.theta7)
                                       + params.l2**2, abs=1e-8)


def test_base_span_matches_pivot_distance(params, home):
    pa = params.z1 * np.array([-1.0, 0.0])
    pb = params.z1 * np.array([math.cos(home.nu1), -math.sin(home.nu1)])
    assert kin.base_span(params, home.nu1) == pytest.approx(np.linalg.norm(pb - pa), abs=1e-12)


def test_loop_closures_at_home(params, home):
    res = oracle.loop_residuals(params, home)
    assert res["psi5"] < 1e-8 and res["psi4_psi2"] < 1e-8
    num = oracle.solve_state(params, home.active, home)
    assert num.psi5 == pytest.approx(home.psi5, abs=1e-10)
    assert num.psi2 == pytest.approx(home.psi2, abs=1e-10)
    assert num.psi4 == pytest.approx(home.psi4, abs=1e-10)


def test_distal_loop_unreachable(params, home):
    p = dataclasses.replace(params, b2=1.0)
    with pytest.raises(UnreachableConfigurationError, match="distal"):
        kin.psi5(p, home.theta6, home.theta7, home.psi6)


@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.floats(-0.4, 0.4))
def test_residuals_and_symmetry_along_paths(d2, d6, d7):
    p = DesignParams()
    t1, t2, t6, t7 = kin.home_angles(p)
    s = kin.state_at(p, t1, t2 + d2, t6 + d6, t7 + d7)
    assert s.psi1 == -s.psi6
    assert s.assembly_mode == "parallelogram"
    assert max(oracle.loop_residuals(p, s).values()) < 1e-8


def test_angles_continuous_along_theta6(params, home):
    t6 = home.theta6 + np.arange(-0.6, 0.6, 1e-3)
    rows = np.array([[getattr(kin.state_at(params, home.theta1, home.theta2, x, home.theta7), n)
                      for n in ("psi5", "psi4", "psi2")] for x in t6])
    assert np.max(np.abs(np.diff(rows, axis=0))) < 100 * 1e-3
