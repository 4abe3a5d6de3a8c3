"""Transmission ratios of the four actuation loops and the 4x4 transmission matrix.

Every ratio "X/Y" is the velocity ratio d(coordinate of X)/d(coordinate of Y)
of the loop that links them, which by virtual work is the effort ratio used
in the force balance. The actuator coordinate is the ball-joint distance d0.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kinematics as kin
from .errors import UnreachableConfigurationError
from .kinematics import guarded


@dataclass(frozen=True)
class RatioSet:
    gamma1_theta2: float
    n1_theta2: float
    gamma6_theta2: float
    gamma5_theta7: float
    gamma5_theta6: float
    gamma5_gamma6: float
    gamma2_gamma5: float
    gamma2_n1: float
    f10_gamma2: float
    f10_gamma1: float
    f10_theta1: float
    f10_theta2: float

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TransmissionMatrix:
    matrix: np.ndarray
    ratios: RatioSet


def loop1_ratios(p, s):
    """(N1/Theta2, Gamma1/Theta2, Gamma6/Theta2) of the virtual mechanism."""
    dnu1, dpsi1 = kin.virtual_mech_rates(p, s.theta2)
    # psi6 = -psi1, and the P1 joint is driven in the psi6 sense
    g = -dpsi1
    return dnu1, g, g


def theta7_partials(p, s):
    """(d', e', f'): theta7-derivatives of the distal RSSR coefficients."""
    s11, s12, s21, s22 = kin.distal_frame_entries(s.theta6, s.psi6)
    st, ct = math.sin(s.theta7), math.cos(s.theta7)
    k = 2 * p.a2 * p.c2
    return k * (s11 * st - s21 * ct), k * (s12 * st - s22 * ct), -2 * p.l2 * p.c2 * st


def loop2_gamma5_theta7(p, s):
    d, e, _ = kin.distal_rssr_coeffs(p, s.theta6, s.theta7, s.psi6)
    dp, ep, fp = theta7_partials(p, s)
    c5, s5 = math.cos(s.psi5), math.sin(s.psi5)
    den = guarded(d * s5 - e * c5, "distal RSSR dead point (theta7)")
    return (dp * c5 + ep * s5 - fp) / den


def theta6_coeffs(p, s):
    """(d, e, d', e') of the distal loop seen from the middle-phalanx joint."""
    l2p, t6p = kin.distal_offsets(p, s.theta7)
    phi = s.theta6 + t6p
    cp6 = math.cos(s.psi6)
    k = 2 * p.a2 * l2p
    return (-k * math.cos(phi), -k * cp6 * math.sin(phi), k * math.sin(phi), -k * cp6 * math.cos(phi))


def loop2_gamma5_theta6(p, s):
    d, e, dp, ep = theta6_coeffs(p, s)
    c5, s5 = math.cos(s.psi5), math.sin(s.psi5)
    den = guarded(d * s5 - e * c5, "distal RSSR dead point (theta6)")
    return (dp * c5 + ep * s5) / den


def loop2_gamma5_gamma6(p, s):
    l2pp, z = kin.p6_p8_offsets(p, s.theta6, s.theta7)
    d = 2 * z * p.a2
    e = 2 * p.a2 * l2pp * math.cos(s.psi6)
    ep = -2 * p.a2 * l2pp * math.sin(s.psi6)
    f = -z**2 - p.a2**2 + p.b2**2 - l2pp**2
    r2 = d * d + e * e
    if not r2 > f * f + 1e-12:
        raise UnreachableConfigurationError("distal RSSR loop (psi6): d^2 + e^2 <= f^2")
    return d * ep / r2 - e * ep * f / (r2 * math.sqrt(r2 - f * f))


def loop3_ratios(p, s, aux=None):
    """(Gamma2/Gamma5, Gamma2/N1) of the actuation five-bar."""
    if aux is None:
        span = kin.base_span(p, s.nu1)
        q = kin.psi5_prime(s.nu1, s.psi5)
        h2 = -p.c1 * math.sin(s.psi4) / guarded(math.sin(s.psi4 + q), "sin(psi4 + psi5')")
        c1p, nu1p = kin.virtual_crank(p, s.nu1, s.psi5)
        p4p = kin.psi4_prime(p, s.nu1, s.psi5)
        h1 = -c1p * math.sin(p4p) / guarded(math.sin(nu1p + p4p), "sin(nu1' + psi4')")
    else:
        span, h1, h2 = aux.l1p, aux.h1, aux.h2
    # psi5' runs against psi5, hence the leading minus
    g25 = -h2 / guarded(h2 + span, "h2 + l1'")
    g2n = -h1 / guarded(h1 + p.z1, "h1 + z1")
    return g25, g2n


def loop4_ratios(p, s):
    """(F10/Gamma2, F10/Gamma1, F10/Theta1): partial derivatives of the actuator length."""
    p1 = kin.actuator_p1_angle(s)
    d0 = kin.actuator_length(p, s.theta1, p1, s.psi2)
    s1, c1 = math.sin(s.theta1), math.cos(s.theta1)
    sp1, cp1 = math.sin(p1), math.cos(p1)
    sp2, cp2 = math.sin(s.psi2), math.cos(s.psi2)
    k = p.a0 * p.c0 / d0
    f_g2 = k * (s1 * cp1 * cp2 - sp2 * c1)
    f_g1 = -k * sp1 * sp2 * s1
    f_t1 = k * (sp2 * cp1 * c1 - s1 * cp2)
    return f_g2, f_g1, f_t1


def ratio_set(p, s):
    n1_t2, g1_t2, g6_t2 = loop1_ratios(p, s)
    g5_t7 = loop2_gamma5_theta7(p, s)
    g5_t6 = loop2_gamma5_theta6(p, s)
    g5_g6 = loop2_gamma5_gamma6(p, s)
    g2_g5, g2_n1 = loop3_ratios(p, s)
    f_g2, f_g1, f_t1 = loop4_ratios(p, s)
    f_t2 = g1_t2 * f_g1 + n1_t2 * g2_n1 * f_g2 + g6_t2 * g5_g6 * g2_g5 * f_g2
    return RatioSet(g1_t2, n1_t2, g6_t2, g5_t7, g5_t6, g5_g6, g2_g5, g2_n1, f_g2, f_g1, f_t1, f_t2)


def matrix_from_ratios(r):
    m = np.eye(4)
    m[0] = [
        -r.f10_theta1,
        -r.f10_theta2,
        -r.gamma5_theta6 * r.gamma2_gamma5 * r.f10_gamma2,
        -r.gamma5_theta7 * r.gamma2_gamma5 * r.f10_gamma2,
    ]
    return m


def assemble_T(p, s):
    r = ratio_set(p, s)
    return TransmissionMatrix(matrix_from_ratios(r), r)
