"""Closed-form kinematics: spherical module, virtual mechanism and the auxiliary loop quantities.

Frames: every vector returned here is expressed in the base frame attached to
the sphere centre C, with +z pointing from the first spherical joint towards C.
Angles are in radians, lengths in mm.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

from . import geom3
from .errors import (
    GeometryInfeasibleError,
    TransmissionSingularityError,
    UnreachableConfigurationError,
    VirtualMechanismSingularityError,
)

GUARD = 1e-9
ACOS_SLACK = 1e-12
DOWN = np.array([0.0, 0.0, -1.0])


def wrap(angle):
    """Wrap to (-pi, pi]."""
    a = math.remainder(angle, 2 * math.pi)
    return math.pi if a == -math.pi else a


def checked_acos(x, what, exc=GeometryInfeasibleError):
    if not math.isfinite(x) or abs(x) > 1.0 + ACOS_SLACK:
        raise exc(f"{what}: arccos argument {x!r} outside [-1, 1]")
    return math.acos(min(1.0, max(-1.0, x)))


def guarded(den, what, exc=TransmissionSingularityError):
    if not math.isfinite(den) or abs(den) < GUARD:
        raise exc(f"{what}: denominator {den!r} below {GUARD}")
    return den


@dataclass(frozen=True)
class DesignParams:
    l1: float = 61.0
    l2: float = 41.0
    l3: float = 38.0
    a0: float = 100.0
    a1: float = 38.0
    a2: float = 38.0
    a3: float = 38.0
    b1: float = 58.0
    b2: float = 58.0
    b3: float = 58.0
    c0: float = 28.0
    c1: float = 16.0
    c2: float = 16.0
    c3: float = 16.0
    k1: float = None
    k2: float = None
    k3: float = None
    k4: float = None
    q3: float = 0.0
    q4: float = 0.0
    delta7: float = math.pi / 2
    alpha: float = math.radians(85.0)
    eta: float = math.radians(40.0)
    f10: float = 1.0

    def __post_init__(self):
        # contact distances default to mid-phalanx
        for name, link in (("k1", "l1"), ("k2", "l1"), ("k3", "l2"), ("k4", "l3")):
            if getattr(self, name) is None:
                object.__setattr__(self, name, getattr(self, link) / 2)
        for name in ("l1", "l2", "l3", "a0", "a1", "a2", "a3", "b1", "b2", "b3",
                     "c0", "c1", "c2", "c3", "k1", "k2", "k3", "k4"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise GeometryInfeasibleError(f"{name} must be a positive length, got {v!r}")
        if not 0 < self.alpha < math.pi:
            raise GeometryInfeasibleError("alpha must be in (0, pi)")
        if not 0 < self.eta < math.pi:
            raise GeometryInfeasibleError("eta must be in (0, pi)")
        if abs(math.tan(self.alpha / 2) * math.tan(self.eta / 2) - 1) < ACOS_SLACK:
            raise GeometryInfeasibleError("tan(alpha/2)*tan(eta/2) = 1 makes the home pose undefined")

    @property
    def z1(self):
        """Distance from the sphere centre to the virtual-mechanism joints."""
        return self.l1 * math.cos(self.eta / 2) / (2 * math.sin(self.alpha / 2))

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class FingerState:
    theta1: float
    theta2: float
    theta3: float
    theta5: float
    theta6: float
    theta7: float
    nu1: float
    psi1: float
    psi2: float
    psi4: float
    psi5: float
    psi6: float
    assembly_mode: str = "parallelogram"

    @property
    def active(self):
        return np.array([self.theta1, self.theta2, self.theta6, self.theta7])


@dataclass(frozen=True)
class LoopAux:
    l1p: float
    l2p: float
    l2pp: float
    z_p6p8: float
    c1p: float
    d0: float
    psi5p: float
    theta6p: float
    nu1p: float
    psi4p: float
    psi2p: float
    rho: float
    rho_p: float
    h1: float
    h2: float


# ---------------------------------------------------------------- home pose

def home_angles(p):
    """Active joint angles (theta1, theta2, theta6, theta7) of the spring-returned posture."""
    se2, ce2 = math.sin(p.eta / 2), math.cos(p.eta / 2)
    t1 = 0.5 * checked_acos((math.cos(p.alpha) - se2**2) / ce2**2, "home theta1")
    tt = math.tan(p.alpha / 2) * math.tan(p.eta / 2)
    ratio = (-tt - 1) / (tt - 1)
    if ratio < 0:
        raise GeometryInfeasibleError(f"home theta2: square-root argument {ratio!r} is negative")
    t2 = -2 * math.atan(math.sqrt(ratio))
    t6 = -0.5 * checked_acos(
        (2 * math.cos(p.alpha) + math.cos(p.eta) - 1) / (math.cos(p.eta) + 1), "home theta6"
    ) - math.pi / 2
    t7 = math.pi - p.delta7
    return t1, t2, t6, t7


def home_pose(p):
    return state_at(p, *home_angles(p))


def state_at(p, theta1, theta2, theta6, theta7):
    """Solve every passive angle for the given active joint angles."""
    t3 = solve_theta3(p, theta2)
    t5 = solve_theta5(p, theta2)
    nu1, psi1, psi6 = virtual_mech(p, theta2)
    ps5 = psi5(p, theta6, theta7, psi6)
    ps4 = psi4(p, nu1, ps5)
    ps2 = psi2(p, nu1, ps5)
    return FingerState(theta1, theta2, t3, t5, theta6, theta7, nu1, psi1, ps2, ps4, ps5, psi6)


# ------------------------------------------------------- spherical module

def spherical_coeffs(p, theta2):
    """(A, B, C) of the closure A*cos(x) + B*sin(x) = C solved by the output-side joint."""
    sa, ca = math.sin(p.alpha), math.cos(p.alpha)
    se, ce = math.sin(p.eta), math.cos(p.eta)
    a = sa * sa * ce * math.cos(theta2) - sa * se * ca
    b = sa * sa * math.sin(theta2)
    c = (sa * ce - se * ca * math.cos(theta2)) * sa
    return a, b, c


def _spherical_parts(p, theta2):
    a, b, c = spherical_coeffs(p, theta2)
    r = math.hypot(a, b)
    if r < GUARD:
        raise UnreachableConfigurationError("spherical loop: A and B vanish together")
    acs = checked_acos(c / r, "spherical loop", UnreachableConfigurationError)
    return math.atan2(b, a), acs, 0 < wrap(theta2) < math.pi


def solve_theta3(p, theta2):
    at, acs, upper = _spherical_parts(p, theta2)
    return wrap(-at + acs if upper else -at - acs)


def solve_theta5(p, theta2):
    # parallelogram mode: the output-side base joint mirrors the coupler joint
    at, acs, upper = _spherical_parts(p, theta2)
    return wrap(at - acs if upper else at + acs)


def spherical_axes(p, theta2, theta3):
    """Unit directions from C to the four spherical joints (input base, coupler, coupler, output base)."""
    crank = geom3.compose([geom3.rot_z(theta2), geom3.rot_x(p.alpha)])
    coupler = geom3.compose([crank, geom3.rot_z(theta3), geom3.rot_x(p.eta)])
    u2 = DOWN.copy()
    u3 = geom3.apply_vector(crank, DOWN)
    u4 = geom3.apply_vector(coupler, DOWN)
    u5 = geom3.apply_vector(geom3.rot_x(p.eta), DOWN)
    return u2, u3, u4, u5


def theta3_rate(p, theta2, theta3=None):
    """d(theta3)/d(theta2) and the intersection angle it is built from."""
    if theta3 is None:
        theta3 = solve_theta3(p, theta2)
    u2, u3, u4, u5 = spherical_axes(p, theta2, theta3)
    rho_p = geom3.plane_intersection_angle(u2, (u2, u3), (u4, u5))
    den = guarded(math.sin(rho_p - p.alpha), "coupler rate sin(rho' - alpha)")
    return -math.sin(rho_p) / den, rho_p


def theta5_rate(p, theta2, theta3=None):
    """d(theta5)/d(theta2) and the intersection angle it is built from."""
    if theta3 is None:
        theta3 = solve_theta3(p, theta2)
    u2, u3, u4, u5 = spherical_axes(p, theta2, theta3)
    rho = geom3.plane_intersection_angle(u2, (u2, u5), (u3, u4))
    den = guarded(math.sin(rho - p.eta), "output rate sin(rho - eta)")
    return math.sin(rho) / den, rho


# -------------------------------------------------------------- P6 point

def _p6_unit(p, theta2, theta3):
    """Midpoint of the coupler joints (unit sphere), components in (z, y, x) order."""
    sa, ca = math.sin(p.alpha), math.cos(p.alpha)
    se, ce = math.sin(p.eta), math.cos(p.eta)
    s2, c2 = math.sin(theta2), math.cos(theta2)
    s3, c3 = math.sin(theta3), math.cos(theta3)
    px = -(ce + 1) * ca / 2 + sa * se * c3 / 2
    py = ((ce + 1) * sa + se * ca * c3) * c2 / 2 - se * s2 * s3 / 2
    pz = -((ce + 1) * sa + se * ca * c3) * s2 / 2 - se * s3 * c2 / 2
    return px, py, pz


def p6_position(p, theta2):
    """Coupler-midpoint joint P6 in the base frame (mm)."""
    t3 = solve_theta3(p, theta2)
    px, py, pz = _p6_unit(p, theta2, t3)
    return (p.z1 / math.cos(p.eta / 2)) * np.array([pz, py, px])


def p6_velocity(p, theta2):
    """dP6/dtheta2 in the base frame (mm/rad)."""
    t3 = solve_theta3(p, theta2)
    dt3, _ = theta3_rate(p, theta2, t3)
    sa, ca = math.sin(p.alpha), math.cos(p.alpha)
    sh, ch = math.sin(p.eta / 2), math.cos(p.eta / 2)
    s2, c2 = math.sin(theta2), math.cos(theta2)
    s3, c3 = math.sin(t3), math.cos(t3)
    z1 = p.z1
    vx = -z1 * ((-dt3 * s2 * s3 * ca + dt3 * c2 * c3 - s2 * s3 + ca * c2 * c3) * sh + sa * ch * c2)
    vy = -z1 * ((dt3 * s2 * c3 + dt3 * s3 * ca * c2 + s2 * ca * c3 + s3 * c2) * sh + sa * s2 * ch)
    vz = -z1 * dt3 * sa * sh * s3
    return np.array([vx, vy, vz])


# ------------------------------------------------------ virtual mechanism

def _virtual_coords(p, vec):
    """Base-frame P6 quantity -> (x, y, z) of the virtual-mechanism frame on the unit sphere."""
    k = math.cos(p.eta / 2) / p.z1
    return k * vec[2], k * vec[1], k * vec[0]


def _azimuth_parts(p, vx, vy, vz):
    sh, ch = math.sin(p.eta / 2), math.cos(p.eta / 2)
    return -vz, -(sh * vx + ch * vy)


def virtual_mech(p, theta2):
    """(nu1, psi1, psi6) of the virtual two-DOF mechanism driven by theta2."""
    sh, ch = math.sin(p.eta / 2), math.cos(p.eta / 2)
    vx, vy, vz = _virtual_coords(p, p6_position(p, theta2))
    nu1 = checked_acos((-vy * sh + vx * ch) / ch, "virtual mechanism nu1")
    if nu1 < 1e-6 or nu1 > math.pi - 1e-6:
        raise VirtualMechanismSingularityError(f"nu1 = {nu1!r} is at a singular value")
    x, y = _azimuth_parts(p, vx, vy, vz)
    psi1 = math.atan2(y, x) % (2 * math.pi)
    return nu1, psi1, -psi1


def virtual_mech_rates(p, theta2):
    """(d nu1/d theta2, d psi1/d theta2)."""
    sh, ch = math.sin(p.eta / 2), math.cos(p.eta / 2)
    nu1, _, _ = virtual_mech(p, theta2)
    vx, vy, vz = _virtual_coords(p, p6_position(p, theta2))
    dx, dy, dz = _virtual_coords(p, p6_velocity(p, theta2))
    den = guarded(ch * math.sin(nu1), "virtual mechanism sin(nu1)", VirtualMechanismSingularityError)
    dnu1 = -(dx * ch - dy * sh) / den
    x, y = _azimuth_parts(p, vx, vy, vz)
    ddx, ddy = _azimuth_parts(p, dx, dy, dz)
    r2 = guarded(x * x + y * y, "virtual mechanism azimuth", VirtualMechanismSingularityError)
    dpsi1 = (x * ddy - y * ddx) / r2
    return dnu1, dpsi1


# ---------------------------------------------------- distal RSSR loop

def distal_frame_entries(theta6, psi6):
    """(s11, s12, s21, s22) of the rotation carrying the P5 frame into the O7 frame."""
    return (-math.cos(theta6), -math.sin(theta6) * math.cos(psi6),
            math.sin(theta6), -math.cos(psi6) * math.cos(theta6))


def distal_rssr_coeffs(p, theta6, theta7, psi6):
    s11, s12, s21, s22 = distal_frame_entries(theta6, psi6)
    x01 = p.l2
    reach = x01 - p.c2 * math.cos(theta7)
    d = -2 * p.a2 * p.c2 * s21 * math.sin(theta7) + 2 * p.a2 * s11 * reach
    e = -2 * p.a2 * p.c2 * s22 * math.sin(theta7) + 2 * p.a2 * s12 * reach
    f = -x01**2 + 2 * x01 * p.c2 * math.cos(theta7) - p.a2**2 + p.b2**2 - p.c2**2
    return d, e, f


def psi5(p, theta6, theta7, psi6):
    d, e, f = distal_rssr_coeffs(p, theta6, theta7, psi6)
    r = math.hypot(d, e)
    if r < GUARD:
        raise UnreachableConfigurationError("distal RSSR loop: d and e vanish together")
    return math.atan2(e, d) - checked_acos(f / r, "distal RSSR loop", UnreachableConfigurationError)


# ------------------------------------------------- actuation five-bar loop

def base_span(p, nu1):
    """Distance between the P5 and P2 pivots."""
    return 2 * p.z1 * math.cos(nu1 / 2)


def psi5_prime(nu1, psi5_):
    return -nu1 / 2 - psi5_


def psi4(p, nu1, psi5_):
    span = base_span(p, nu1)
    q = psi5_prime(nu1, psi5_)
    a = 2 * p.b1 * p.c1 - 2 * p.b1 * span * math.cos(q)
    b = 2 * p.b1 * span * math.sin(q)
    c = p.a1**2 - p.b1**2 - p.c1**2 + 2 * p.c1 * span * math.cos(q) - span**2
    r = math.hypot(a, b)
    if r < GUARD:
        raise UnreachableConfigurationError("actuation loop (psi4): A and B vanish together")
    return math.atan2(b, a) - checked_acos(c / r, "actuation loop (psi4)", UnreachableConfigurationError)


def psi2_prime(p, nu1, psi5_):
    span = base_span(p, nu1)
    q = psi5_prime(nu1, psi5_)
    a = 2 * p.a1 * p.c1 * math.cos(q) - 2 * p.a1 * span
    b = 2 * p.a1 * p.c1 * math.sin(q)
    c = p.a1**2 - p.b1**2 + p.c1**2 - 2 * p.c1 * span * math.cos(q) + span**2
    r = math.hypot(a, b)
    if r < GUARD:
        raise UnreachableConfigurationError("actuation loop (psi2): A and B vanish together")
    # atan2(-B, -A) equals atan(B/A) for the A < 0 that every feasible design has
    return math.atan2(-b, -a) - checked_acos(c / r, "actuation loop (psi2)", UnreachableConfigurationError)


def psi2(p, nu1, psi5_):
    return psi2_prime(p, nu1, psi5_) - nu1 / 2


def virtual_crank(p, nu1, psi5_):
    """(c1', nu1') of the four-bar seen from the virtual-mechanism pivot."""
    c1p = math.sqrt(p.c1**2 - 2 * p.c1 * p.z1 * math.cos(psi5_) + p.z1**2)
    guarded(c1p, "virtual crank length", UnreachableConfigurationError)
    nu1p = -nu1 - checked_acos((-p.c1**2 + c1p**2 + p.z1**2) / (2 * c1p * p.z1),
                               "virtual crank angle") + math.pi
    return c1p, nu1p


def psi4_prime(p, nu1, psi5_):
    c1p, nu1p = virtual_crank(p, nu1, psi5_)
    a = 2 * p.b1 * c1p - 2 * p.b1 * p.z1 * math.cos(nu1p)
    b = 2 * p.b1 * p.z1 * math.sin(nu1p)
    c = p.a1**2 - p.b1**2 - c1p**2 + 2 * c1p * p.z1 * math.cos(nu1p) - p.z1**2
    r = math.hypot(a, b)
    if r < GUARD:
        raise UnreachableConfigurationError("actuation loop (psi4'): A and B vanish together")
    return math.atan2(b, a) - checked_acos(c / r, "actuation loop (psi4')", UnreachableConfigurationError)


# ------------------------------------------------------- actuator loop

def actuator_length(p, theta1, psi_p1, psi2_):
    """Distance between the two ball joints of the linear actuator."""
    sq = p.a0**2 + 2 * p.a0 * p.c0 * (
        math.sin(psi2_) * math.sin(theta1) * math.cos(psi_p1) + math.cos(psi2_) * math.cos(theta1)
    ) + p.c0**2
    if not sq > GUARD**2:
        raise GeometryInfeasibleError(f"actuator length degenerate (d0^2 = {sq!r})")
    return math.sqrt(sq)


def actuator_p1_angle(s):
    """P1 joint angle as seen by the actuator loop (same sense as psi6)."""
    return s.psi6


# ------------------------------------------------------------- aux

def distal_offsets(p, theta7):
    """(l2', theta6') of the O6-P8 link."""
    l2p = math.sqrt(p.c2**2 - 2 * p.c2 * p.l2 * math.cos(theta7) + p.l2**2)
    guarded(l2p, "distal offset length", GeometryInfeasibleError)
    acs = checked_acos((p.l2**2 + l2p**2 - p.c2**2) / (2 * p.l2 * l2p), "distal offset angle")
    t7 = theta7 % (2 * math.pi)
    return l2p, (acs if math.pi < t7 < 2 * math.pi else -acs)


def p6_p8_offsets(p, theta6, theta7):
    """(l2'', Z) components of the P6 -> P8 offset."""
    l2pp = p.c2 * math.sin(theta6 + theta7) - p.l2 * math.sin(theta6)
    z = p.c2 * math.cos(theta6 + theta7) - p.l2 * math.cos(theta6)
    return l2pp, z


def loop_aux(p, s):
    q = psi5_prime(s.nu1, s.psi5)
    l2p, t6p = distal_offsets(p, s.theta7)
    l2pp, z = p6_p8_offsets(p, s.theta6, s.theta7)
    c1p, nu1p = virtual_crank(p, s.nu1, s.psi5)
    p4p = psi4_prime(p, s.nu1, s.psi5)
    _, rho_p = theta3_rate(p, s.theta2, s.theta3)
    _, rho = theta5_rate(p, s.theta2, s.theta3)
    h2 = -p.c1 * math.sin(s.psi4) / guarded(math.sin(s.psi4 + q), "sin(psi4 + psi5')")
    h1 = -c1p * math.sin(p4p) / guarded(math.sin(nu1p + p4p), "sin(nu1' + psi4')")
    return LoopAux(
        l1p=base_span(p, s.nu1), l2p=l2p, l2pp=l2pp, z_p6p8=z, c1p=c1p,
        d0=actuator_length(p, s.theta1, actuator_p1_angle(s), s.psi2),
        psi5p=q, theta6p=t6p, nu1p=nu1p, psi4p=p4p, psi2p=psi2_prime(p, s.nu1, s.psi5),
        rho=rho, rho_p=rho_p, h1=h1, h2=h2,
    )
