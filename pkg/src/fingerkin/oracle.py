"""Independent numeric reference for the closed forms.

Every loop is rebuilt from point/axis geometry with geom3 transforms and closed
numerically (bracketing root search in 1-D, damped Newton otherwise). Ratios are
central differences of those numeric closures with one Richardson level. Nothing
here calls the analytic kinematics, transmission or contact code; analytic
results enter only as seeds.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import geom3
from .errors import OracleFailureError, TransmissionSingularityError

DOWN = np.array([0.0, 0.0, -1.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])
X_AXIS = np.array([1.0, 0.0, 0.0])
NEG_Y = np.array([0.0, -1.0, 0.0])
FD_STEP = 1e-6
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ClosureSystem:
    residual: object  # callable(x: ndarray) -> ndarray
    active: tuple = ()
    tol: float = 1e-12
    max_iter: int = 100
    search_width: float = 0.4
    search_step: float = 0.01


def _bracket_nearest(fun, x0, width, step):
    """Sign-change bracket closest to x0 inside [x0 - width, x0 + width]."""
    f0 = fun(x0)
    if f0 == 0.0:
        return x0, x0
    n = int(round(width / step))
    prev_lo = prev_hi = (x0, f0)
    for k in range(1, n + 1):
        for side in (+1, -1):
            x = x0 + side * k * step
            fx = fun(x)
            px, pf = prev_hi if side > 0 else prev_lo
            if np.sign(fx) != np.sign(pf):
                return (px, x) if side > 0 else (x, px)
            if side > 0:
                prev_hi = (x, fx)
            else:
                prev_lo = (x, fx)
    raise OracleFailureError(f"no closure root within {width} rad of the seed {x0!r}")


def solve_closure(sys, initial):
    """Root of sys.residual nearest to initial; raises OracleFailureError if none is found."""
    x0 = np.atleast_1d(np.asarray(initial, dtype=float))
    if x0.size == 1:
        scalar = lambda x: float(np.atleast_1d(sys.residual(np.array([x])))[0])
        lo, hi = _bracket_nearest(scalar, float(x0[0]), sys.search_width, sys.search_step)
        root = lo if lo == hi else brentq(scalar, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                          maxiter=sys.max_iter)
        x = np.array([root])
    else:
        x = _damped_newton(sys, x0)
    res = np.max(np.abs(np.atleast_1d(sys.residual(x))))
    if not res < RESIDUAL_TOL:
        raise OracleFailureError(f"closure residual {res:.3g} above {RESIDUAL_TOL}")
    return x


def _damped_newton(sys, x):
    def norm(v):
        return float(np.linalg.norm(v))

    r = np.atleast_1d(sys.residual(x))
    for _ in range(sys.max_iter):
        if norm(r) < sys.tol:
            return x
        jac = np.empty((r.size, x.size))
        for j in range(x.size):
            e = np.zeros_like(x)
            e[j] = 1e-7
            jac[:, j] = (np.atleast_1d(sys.residual(x + e)) - np.atleast_1d(sys.residual(x - e))) / 2e-7
        try:
            step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        except np.linalg.LinAlgError as exc:
            raise OracleFailureError(f"Newton step failed: {exc}") from exc
        lam = 1.0
        while lam > 1e-6:
            trial = x + lam * step
            rt = np.atleast_1d(sys.residual(trial))
            if norm(rt) < norm(r):
                break
            lam /= 2
        else:
            raise OracleFailureError("damped Newton stalled")
        x, r = trial, rt
    if norm(r) < sys.tol:
        return x
    raise OracleFailureError(f"damped Newton did not converge in {sys.max_iter} iterations")


# --------------------------------------------------------- differentiation

def central_difference(fun, x, h=FD_STEP):
    return (fun(x + h) - fun(x - h)) / (2 * h)


def richardson_derivative(fun, x, h=FD_STEP):
    """Central difference at steps h and h/2 combined by one Richardson level."""
    d1 = central_difference(fun, x, h)
    d2 = central_difference(fun, x, h / 2)
    return (4 * d2 - d1) / 3


# ------------------------------------------------------ spherical module

def _crank(p, theta2):
    return geom3.compose([geom3.rot_z(theta2), geom3.rot_x(p.alpha)])


def spherical_joint_axes(p, theta2, theta3):
    crank = _crank(p, theta2)
    u3 = geom3.apply_vector(crank, DOWN)
    u4 = geom3.apply_vector(geom3.compose([crank, geom3.rot_z(theta3), geom3.rot_x(p.eta)]), DOWN)
    u5 = geom3.apply_vector(geom3.rot_x(p.eta), DOWN)
    return DOWN.copy(), u3, u4, u5


def coupler_angle(p, theta2, seed):
    """theta3 closing the output link (u4 . u5 = cos alpha)."""

    def res(x):
        _, _, u4, u5 = spherical_joint_axes(p, theta2, x[0])
        return np.array([u4 @ u5 - math.cos(p.alpha)])

    return float(solve_closure(ClosureSystem(res, (theta2,)), seed)[0])


def output_angle(p, theta2, seed):
    """theta5 of the output base joint closing the coupler (u3 . u4 = cos eta)."""
    u3 = geom3.apply_vector(_crank(p, theta2), DOWN)

    def res(x):
        out = geom3.compose([geom3.rot_x(p.eta), geom3.rot_z(x[0]), geom3.rot_x(p.alpha)])
        return np.array([u3 @ geom3.apply_vector(out, DOWN) - math.cos(p.eta)])

    return float(solve_closure(ClosureSystem(res, (theta2,)), seed)[0])


def coupler_midpoint(p, theta2, theta3):
    """Virtual-mechanism joint: bisector of the coupler axes at radius z1."""
    _, u3, u4, _ = spherical_joint_axes(p, theta2, theta3)
    return p.z1 * geom3.unit(u3 + u4)


def virtual_angles(p, point):
    """(nu1, psi1) as polar and azimuth angles of the point about the base bisector."""
    q = geom3.apply_vector(geom3.rot_x(-p.eta / 2), point)
    nu1 = math.acos(max(-1.0, min(1.0, q[2] / np.linalg.norm(q))))
    psi1 = math.atan2(-q[1], -q[0]) % (2 * math.pi)
    return nu1, psi1


# ------------------------------------------------------------ distal RSSR

def _distal_ball_local(p, theta6, theta7, psi6):
    """Phalanx-side ball joint expressed in the frame of the driven crank."""
    ball = geom3.apply_point(geom3.compose([geom3.trans_x(p.l2), geom3.rot_z(theta7)]),
                             np.array([-p.c2, 0.0, 0.0]))
    frame = geom3.compose([geom3.rot_z(math.pi - theta6), geom3.rot_x(psi6)])
    return frame[:3, :3].T @ ball


def distal_crank(p, theta6, theta7, psi6, seed):
    """psi5 closing the distal RSSR loop |ball - crank tip| = b2."""
    ball = _distal_ball_local(p, theta6, theta7, psi6)

    def res(x):
        tip = geom3.apply_vector(geom3.rot_z(x[0]), np.array([-p.a2, 0.0, 0.0]))
        return np.array([np.linalg.norm(ball - tip) - p.b2])

    return float(solve_closure(ClosureSystem(res, (theta6, theta7, psi6)), seed)[0])


# ------------------------------------------------------ actuation four-bar

def actuation_fourbar(p, nu1, psi5, seed):
    """(psi4, psi2) of the planar loop between the two virtual pivots.

    Pivots sit at radius z1 about the virtual centre, nu1 apart from antipodal;
    the frame is aligned with the pivot-to-pivot line.
    """
    pivot_a = p.z1 * np.array([-1.0, 0.0])
    pivot_b = p.z1 * np.array([math.cos(nu1), -math.sin(nu1)])
    span = float(np.linalg.norm(pivot_b - pivot_a))
    crank_dir = -nu1 / 2 - psi5

    def e(a):
        return np.array([math.cos(a), math.sin(a)])

    tip = p.c1 * e(crank_dir)
    base = np.array([span, 0.0])

    def res(x):
        return tip + p.b1 * e(crank_dir + x[0]) - (base - p.a1 * e(x[1]))

    x = solve_closure(ClosureSystem(res, (nu1, psi5)), seed)
    return float(x[0]), float(x[1]) - nu1 / 2


def actuator_points(p, theta1, psi_p1, psi2):
    a = geom3.apply_vector(geom3.rot_y(theta1), p.a0 * Z_AXIS)
    c = geom3.apply_vector(geom3.compose([geom3.rot_z(psi_p1), geom3.rot_y(psi2)]), p.c0 * Z_AXIS)
    return a, -c


def actuator_distance(p, theta1, psi_p1, psi2):
    a, c = actuator_points(p, theta1, psi_p1, psi2)
    return float(np.linalg.norm(a - c))


# ------------------------------------------------------- whole mechanism

@dataclass(frozen=True)
class OracleState:
    theta1: float
    theta2: float
    theta3: float
    theta5: float
    theta6: float
    theta7: float
    nu1: float
    psi1: float
    psi6: float
    psi5: float
    psi4: float
    psi2: float
    d0: float


def solve_state(p, q, seed):
    """Close every loop numerically for active angles q = (theta1, theta2, theta6, theta7).

    seed is any object with the passive-angle attributes (an analytic state).
    """
    t1, t2, t6, t7 = (float(v) for v in q)
    t3 = coupler_angle(p, t2, seed.theta3)
    t5 = output_angle(p, t2, seed.theta5)
    nu1, psi1 = virtual_angles(p, coupler_midpoint(p, t2, t3))
    psi6 = -psi1
    ps5 = distal_crank(p, t6, t7, psi6, seed.psi5)
    ps4, ps2 = actuation_fourbar(p, nu1, ps5, (seed.psi4, seed.psi2 + seed.nu1 / 2))
    d0 = actuator_distance(p, t1, psi6, ps2)
    return OracleState(t1, t2, t3, t5, t6, t7, nu1, psi1, psi6, ps5, ps4, ps2, d0)


def loop_residuals(p, s):
    """Residuals of every loop closure at the angles carried by s (analytic or numeric)."""
    _, u3, u4, u5 = spherical_joint_axes(p, s.theta2, s.theta3)
    out = geom3.compose([geom3.rot_x(p.eta), geom3.rot_z(s.theta5), geom3.rot_x(p.alpha)])
    u4b = geom3.apply_vector(out, DOWN)
    ball = _distal_ball_local(p, s.theta6, s.theta7, s.psi6)
    tip = geom3.apply_vector(geom3.rot_z(s.psi5), np.array([-p.a2, 0.0, 0.0]))
    span = 2 * p.z1 * math.cos(s.nu1 / 2)
    crank_dir = -s.nu1 / 2 - s.psi5
    e = lambda a: np.array([math.cos(a), math.sin(a)])
    fourbar = (p.c1 * e(crank_dir) + p.b1 * e(crank_dir + s.psi4)
               - (np.array([span, 0.0]) - p.a1 * e(s.psi2 + s.nu1 / 2)))
    return {
        "theta3": abs(u4 @ u5 - math.cos(p.alpha)),
        "theta5": float(np.linalg.norm(u4b - u4)),
        "psi5": abs(np.linalg.norm(ball - tip) - p.b2),
        "psi4_psi2": float(np.linalg.norm(fourbar)),
    }


# ------------------------------------------------------------- ratios

RATIO_NAMES = (
    "gamma1_theta2", "n1_theta2", "gamma6_theta2", "gamma5_theta7", "gamma5_theta6",
    "gamma5_gamma6", "gamma2_gamma5", "gamma2_n1", "f10_gamma2", "f10_gamma1",
    "f10_theta1", "f10_theta2",
)


def virtual_work_ratio(p, at, name, h=FD_STEP):
    """Velocity ratio d(output)/d(input) of the loop behind ratio `name`, by finite differences.

    By virtual work this is the effort ratio of the same pair of joints.
    """
    s = at
    if name in ("gamma1_theta2", "gamma6_theta2", "n1_theta2"):
        def fun(t2):
            t3 = coupler_angle(p, t2, s.theta3)
            nu1, psi1 = virtual_angles(p, coupler_midpoint(p, t2, t3))
            if name == "n1_theta2":
                return nu1
            # the P1 joint turns in the opposite sense to psi1
            return -(psi1 if abs(psi1 - s.psi1) < math.pi else psi1 - math.copysign(2 * math.pi, psi1 - s.psi1))
        return richardson_derivative(fun, s.theta2, h)
    if name == "gamma5_theta7":
        return richardson_derivative(lambda x: distal_crank(p, s.theta6, x, s.psi6, s.psi5), s.theta7, h)
    if name == "gamma5_theta6":
        return richardson_derivative(lambda x: distal_crank(p, x, s.theta7, s.psi6, s.psi5), s.theta6, h)
    if name == "gamma5_gamma6":
        return richardson_derivative(lambda x: distal_crank(p, s.theta6, s.theta7, x, s.psi5), s.psi6, h)
    seed4 = (s.psi4, s.psi2 + s.nu1 / 2)
    if name == "gamma2_gamma5":
        return richardson_derivative(lambda x: actuation_fourbar(p, s.nu1, x, seed4)[1], s.psi5, h)
    if name == "gamma2_n1":
        return richardson_derivative(lambda x: actuation_fourbar(p, x, s.psi5, seed4)[1], s.nu1, h)
    if name == "f10_gamma2":
        return richardson_derivative(lambda x: actuator_distance(p, s.theta1, s.psi6, x), s.psi2, h)
    if name == "f10_gamma1":
        return richardson_derivative(lambda x: actuator_distance(p, s.theta1, x, s.psi2), s.psi6, h)
    if name == "f10_theta1":
        return richardson_derivative(lambda x: actuator_distance(p, x, s.psi6, s.psi2), s.theta1, h)
    if name == "f10_theta2":
        q = [s.theta1, s.theta2, s.theta6, s.theta7]
        return richardson_derivative(lambda x: solve_state(p, [q[0], x, q[2], q[3]], s).d0, s.theta2, h)
    raise KeyError(f"unknown ratio {name!r}")


def ratio_oracles(p, s, h=FD_STEP):
    return {name: virtual_work_ratio(p, s, name, h) for name in RATIO_NAMES}


def planar_4bar_ratio(a, b, c, frame_len, input_angle, branch=1):
    """Output/input velocity ratio of a planar four-bar.

    The input crank c pivots at the origin, the output crank a at (frame_len, 0),
    b is the coupler. branch (+1/-1) picks the assembly. Equals the torque ratio
    input/output by virtual work.
    """
    tip = c * np.array([math.cos(input_angle), math.sin(input_angle)])
    rel = tip - np.array([frame_len, 0.0])
    dist = float(np.linalg.norm(rel))
    if dist < 1e-12:
        raise TransmissionSingularityError("input crank tip on the output pivot")
    cos_gap = (a * a + dist * dist - b * b) / (2 * a * dist)
    if abs(cos_gap) > 1:
        raise TransmissionSingularityError("four-bar cannot assemble at this input angle")
    beta = math.atan2(rel[1], rel[0]) + branch * math.acos(cos_gap)
    out_tip = np.array([frame_len, 0.0]) + a * np.array([math.cos(beta), math.sin(beta)])
    phi = math.atan2(*(out_tip - tip)[::-1])
    den = a * math.sin(beta - phi)
    if abs(den) < 1e-9 * max(a, b, c, frame_len):
        raise TransmissionSingularityError("four-bar dead point")
    return c * math.sin(input_angle - phi) / den


def planar_4bar_output(a, b, c, frame_len, input_angle, seed):
    """Output crank angle by numeric closure (cross-check for planar_4bar_ratio)."""
    tip = c * np.array([math.cos(input_angle), math.sin(input_angle)])

    def res(x):
        out_tip = np.array([frame_len + a * math.cos(x[0]), a * math.sin(x[0])])
        return np.array([np.linalg.norm(out_tip - tip) - b])

    return float(solve_closure(ClosureSystem(res, (input_angle,)), seed)[0])


# ---------------------------------------------------------- contact side

def contact_frame(p):
    return geom3.rot_x(p.eta / 2 - math.pi)[:3, :3]


def _tilt(p):
    half = p.alpha / 2
    return 0.5 * math.acos((math.cos(p.eta) - math.sin(half) ** 2) / math.cos(half) ** 2)


def _link_frame(p, theta, eta):
    return geom3.compose([geom3.rot_x(eta / 2), geom3.rot_z(-theta), geom3.rot_x(p.alpha / 2)])[:3, :3]


def _phalanx_frames(p, theta2, theta3, theta6, theta7, k3, q3, k4, q4):
    head = [geom3.rot_z(theta2), geom3.rot_x(p.alpha), geom3.rot_z(theta3),
            geom3.rot_x(p.eta / 2), geom3.trans_z(-p.z1), geom3.rot_y(theta6)]
    m3 = geom3.compose(head + [geom3.trans_z(k3), geom3.trans_y(q3)])
    m4 = geom3.compose(head + [geom3.trans_z(p.l2), geom3.rot_y(theta7 + p.delta7 - math.pi),
                               geom3.trans_z(k4), geom3.trans_y(q4)])
    return m3, m4


def contact_geometry(p, q, seed, c):
    """Contact points and force directions (contact frame) with every loop closed numerically.

    q = (theta1, theta2, theta6, theta7); theta1 turns the whole module about the
    negative y axis of the contact frame through C.
    """
    t1, t2, t6, t7 = (float(v) for v in q)
    t3 = coupler_angle(p, t2, seed.theta3)
    t5 = output_angle(p, t2, seed.theta5)
    m1 = _tilt(p)
    g1, g2 = _link_frame(p, t2, p.eta), _link_frame(p, t5, -p.eta)
    pts = [c.k1 * g1 @ Z_AXIS, c.k2 * g2 @ Z_AXIS]
    dirs = [g1 @ np.array([math.sin(m1), math.cos(m1), 0.0]),
            g2 @ np.array([-math.sin(m1), math.cos(m1), 0.0])]
    m3, m4 = _phalanx_frames(p, t2, t3, t6, t7, c.k3, c.q3, c.k4, c.q4)
    cf = contact_frame(p)
    for m in (m3, m4):
        pts.append(cf @ m[:3, 3])
        dirs.append(cf @ m[:3, :3] @ X_AXIS)
    abd = geom3.rot_y(-t1)[:3, :3]
    return [abd @ s for s in pts], [abd @ f for f in dirs]


def contact_projection_oracle(p, s, c, h=FD_STEP):
    """4x4 matrix of d(S_i)/d(q_j) . f_i by finite differences of the numeric geometry."""
    q0 = np.array([s.theta1, s.theta2, s.theta6, s.theta7], dtype=float)
    _, dirs = contact_geometry(p, q0, s, c)
    out = np.zeros((4, 4))
    for j in range(4):
        def fun(x, j=j):
            q = q0.copy()
            q[j] = x
            pts, _ = contact_geometry(p, q, s, c)
            return np.array(pts)
        vel = richardson_derivative(fun, q0[j], h)
        out[:, j] = np.einsum("ij,ij->i", vel, np.array(dirs))
    return out
