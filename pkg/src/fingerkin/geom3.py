"""Homogeneous transforms and small vector helpers."""

import math
from functools import reduce

import numpy as np

from .errors import InvalidArgumentError, SingularConfigurationError

EPS = 1e-9


def _finite(x, what):
    if not math.isfinite(x):
        raise InvalidArgumentError(f"{what} must be finite, got {x!r}")
    return x


def rot_x(angle):
    _finite(angle, "rot_x angle")
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1]])


def rot_y(angle):
    _finite(angle, "rot_y angle")
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0, s, 0], [0, 1.0, 0, 0], [-s, 0, c, 0], [0, 0, 0, 1]])


def rot_z(angle):
    _finite(angle, "rot_z angle")
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0, 0], [s, c, 0, 0], [0, 0, 1.0, 0], [0, 0, 0, 1]])


def trans_x(dist):
    _finite(dist, "trans_x length")
    m = np.eye(4)
    m[0, 3] = dist
    return m


def trans_y(dist):
    _finite(dist, "trans_y length")
    m = np.eye(4)
    m[1, 3] = dist
    return m


def trans_z(dist):
    _finite(dist, "trans_z length")
    m = np.eye(4)
    m[2, 3] = dist
    return m


def compose(chain):
    """Left-to-right product of a sequence of 4x4 transforms."""
    chain = list(chain)
    if not chain:
        raise InvalidArgumentError("cannot compose an empty transform chain")
    return reduce(np.matmul, chain)


def apply_point(tf, point=(0.0, 0.0, 0.0)):
    return tf[:3, :3] @ np.asarray(point, dtype=float) + tf[:3, 3]


def apply_vector(tf, vec):
    return tf[:3, :3] @ np.asarray(vec, dtype=float)


def unit(v, what="vector"):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < EPS:
        raise SingularConfigurationError(f"{what} has (near) zero length")
    return v / n


def plane_intersection_angle(ray, plane1, plane2):
    """Angle in [0, pi) between `ray` and the intersection line of two planes through the origin.

    Each plane is given by two spanning vectors. `ray` should lie in plane1;
    the angle is measured inside plane1, positive toward whichever spanning
    vector of plane1 is less aligned with the ray. Folding into [0, pi) makes
    the result independent of the sign chosen for the line direction.
    """
    a1, b1 = (np.asarray(v, dtype=float) for v in plane1)
    a2, b2 = (np.asarray(v, dtype=float) for v in plane2)
    n1 = unit(np.cross(a1, b1), "first plane normal")
    n2 = unit(np.cross(a2, b2), "second plane normal")
    line = np.cross(n1, n2)
    if np.linalg.norm(line) < EPS:
        raise SingularConfigurationError("planes are parallel, no unique intersection line")
    line = line / np.linalg.norm(line)

    r = np.asarray(ray, dtype=float)
    r = unit(r - (r @ n1) * n1, "ray projected on the first plane")
    ca = abs(unit(a1) @ r)
    cb = abs(unit(b1) @ r)
    toward = b1 if cb < ca else a1
    t = unit(toward - (toward @ r) * r, "in-plane reference direction")

    ang = np.arctan2(line @ t, line @ r) % np.pi
    if ang >= np.pi - 1e-15:
        ang = 0.0
    return float(ang)


def d_rot_x(angle):
    """Derivative of rot_x with respect to its angle."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[0.0, 0, 0, 0], [0, -s, -c, 0], [0, c, -s, 0], [0, 0, 0, 0]])


def d_rot_y(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[-s, 0, c, 0], [0, 0.0, 0, 0], [-c, 0, -s, 0], [0, 0, 0, 0]])


def d_rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[-s, -c, 0, 0], [c, -s, 0, 0], [0, 0, 0.0, 0], [0, 0, 0, 0]])
