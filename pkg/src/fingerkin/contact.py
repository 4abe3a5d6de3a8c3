"""Contact geometry, contact-force directions and the 4x4 contact matrix J.

Contact quantities for the two spherical links and the abduction column of J
are expressed in the contact reference frame: the base frame turned by
eta/2 - pi about its x axis. Both frames share the origin C.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import geom3
from . import kinematics as kin
from .errors import GeometryInfeasibleError

X_AXIS = np.array([1.0, 0.0, 0.0])


@dataclass(frozen=True)
class ContactConfig:
    k1: float
    k2: float
    k3: float
    k4: float
    q3: float = 0.0
    q4: float = 0.0
    active: tuple = (True, True, True, True)

    @classmethod
    def from_params(cls, p, active=(True, True, True, True)):
        return cls(p.k1, p.k2, p.k3, p.k4, p.q3, p.q4, tuple(bool(a) for a in active))

    def check(self, p):
        for name, link in (("k1", p.l1), ("k2", p.l1), ("k3", p.l2), ("k4", p.l3)):
            k = getattr(self, name)
            if not 0 < k <= link:
                raise GeometryInfeasibleError(f"{name} = {k!r} must lie in (0, {link}]")
        if len(self.active) != 4:
            raise GeometryInfeasibleError("active must list four contacts")
        return self


@dataclass(frozen=True)
class ContactJacobian:
    matrix: np.ndarray = field(repr=False)

    ZERO_MASK = np.array([[0, 0, 1, 1], [0, 0, 1, 1], [0, 0, 0, 1], [0, 0, 0, 0]], dtype=bool)


def contact_frame(p):
    """Rotation taking base-frame components to contact-frame components."""
    return geom3.rot_x(p.eta / 2 - math.pi)[:3, :3]


def contact_angles(p):
    """(m1, m2): tilt of the spherical-link contact forces out of the link planes."""
    half = p.alpha / 2
    m1 = 0.5 * kin.checked_acos((math.cos(p.eta) - math.sin(half) ** 2) / math.cos(half) ** 2,
                                "contact tilt m1")
    return m1, -m1


def planar_ratios(p, s, c):
    """(Theta7/f4, Theta6/f4, Theta6/f3)."""
    return c.k4, c.k4 - p.l2 * math.cos(p.delta7 + s.theta7), c.k3


def spherical_contact_ratios(p, s, c):
    """(Theta2/f1, Theta2/f2)."""
    m1, m2 = contact_angles(p)
    sh = math.sin(p.alpha / 2)
    rate5, _ = kin.theta5_rate(p, s.theta2, s.theta3)
    return -c.k1 * math.sin(m1) * sh, rate5 * (-c.k2 * math.sin(m2) * sh)


# ------------------------------------------------- spherical-link contacts

def _link_point(k, theta, alpha, eta):
    sa, ca = math.sin(alpha / 2), math.cos(alpha / 2)
    se, ce = math.sin(eta / 2), math.cos(eta / 2)
    st, ct = math.sin(theta), math.cos(theta)
    return k * np.array([-sa * st, -(ce * sa * ct + se * ca), -sa * se * ct + ca * ce])


def _link_force(m, theta, alpha, eta):
    sa, ca = math.sin(alpha / 2), math.cos(alpha / 2)
    se, ce = math.sin(eta / 2), math.cos(eta / 2)
    st, ct = math.sin(theta), math.cos(theta)
    sm, cm = math.sin(m), math.cos(m)
    fx = sm * ct + st * ca * cm
    fy = -ce * sm * st + ce * cm * ct * ca - se * cm * sa
    fz = (sa * ce + se * ca * ct) * cm - se * sm * st
    return np.array([fx, fy, fz])


def contact_points_S12(p, s, c):
    """S1 on the input link and S2 on the output link, contact frame."""
    return (_link_point(c.k1, s.theta2, p.alpha, p.eta),
            _link_point(c.k2, s.theta5, p.alpha, -p.eta))


# ------------------------------------------------------- phalanx contacts

def _distal_flex(p, s):
    # relative flexion of the distal phalanx; zero when it is in line
    return s.theta7 + p.delta7 - math.pi


def _phalanx_chains(p, s, c, theta3):
    """Transform lists for S3 and S4 with theta2/theta3 factors at known positions."""
    head = [geom3.rot_z(s.theta2), geom3.rot_x(p.alpha), geom3.rot_z(theta3),
            geom3.rot_x(p.eta / 2), geom3.trans_z(-p.z1), geom3.rot_y(s.theta6)]
    s3 = head + [geom3.trans_z(c.k3), geom3.trans_y(c.q3)]
    s4 = head + [geom3.trans_z(p.l2), geom3.rot_y(_distal_flex(p, s)),
                 geom3.trans_z(c.k4), geom3.trans_y(c.q4)]
    return s3, s4


def contact_points_S34(p, s, c):
    """(S3, S4, dS3/dtheta2, dS4/dtheta2) in the base frame."""
    rate3, _ = kin.theta3_rate(p, s.theta2, s.theta3)
    s3c, s4c = _phalanx_chains(p, s, c, s.theta3)
    out = []
    for ch in (s3c, s4c):
        out.append(geom3.apply_point(geom3.compose(ch)))
    for ch in (s3c, s4c):
        d2 = geom3.compose([geom3.d_rot_z(s.theta2)] + ch[1:])[:3, 3]
        d3 = geom3.compose(ch[:2] + [geom3.d_rot_z(s.theta3)] + ch[3:])[:3, 3]
        out.append(d2 + rate3 * d3)
    return tuple(out)


def phalanx_force_directions(p, s):
    """(f3, f4) unit directions in the base frame."""
    rot = geom3.compose([geom3.rot_z(s.theta2), geom3.rot_x(p.alpha), geom3.rot_z(s.theta3),
                         geom3.rot_x(p.eta / 2), geom3.rot_y(s.theta6)])
    f3 = geom3.apply_vector(rot, X_AXIS)
    f4 = geom3.apply_vector(geom3.compose([rot, geom3.rot_y(_distal_flex(p, s))]), X_AXIS)
    return f3, f4


def force_directions(p, s):
    """(f1, f2, f3, f4) unit directions, all in the contact frame."""
    m1, m2 = contact_angles(p)
    f1 = _link_force(m1, s.theta2, p.alpha, p.eta)
    f2 = _link_force(m2, s.theta5, p.alpha, -p.eta)
    q = contact_frame(p)
    f3, f4 = (q @ f for f in phalanx_force_directions(p, s))
    return f1, f2, f3, f4


def _abduction_arm(point, force):
    return point[0] * force[2] - point[2] * force[0]


def assemble_J(p, s, c=None):
    if c is None:
        c = ContactConfig.from_params(p)
    q = contact_frame(p)
    f1, f2, f3, f4 = force_directions(p, s)
    s1, s2 = contact_points_S12(p, s, c)
    s3, s4, v3, v4 = contact_points_S34(p, s, c)
    b3, b4 = phalanx_force_directions(p, s)
    t2f1, t2f2 = spherical_contact_ratios(p, s, c)
    t7f4, t6f4, t6f3 = planar_ratios(p, s, c)
    j = np.zeros((4, 4))
    j[0, :2] = _abduction_arm(s1, f1), t2f1
    j[1, :2] = _abduction_arm(s2, f2), t2f2
    j[2, :3] = _abduction_arm(q @ s3, f3), v3 @ b3, t6f3
    j[3, :] = _abduction_arm(q @ s4, f4), v4 @ b4, t6f4, t7f4
    return ContactJacobian(j)
