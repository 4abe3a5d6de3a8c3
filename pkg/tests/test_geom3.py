import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fingerkin import geom3
from fingerkin import kinematics as kin
from fingerkin.errors import InvalidArgumentError, SingularConfigurationError

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
lengths = st.floats(-100, 100, allow_nan=False)
ROTS = (geom3.rot_x, geom3.rot_y, geom3.rot_z)


def test_rot_x_zero_is_identity():
    assert np.array_equal(geom3.rot_x(0.0), np.eye(4))


def test_quarter_turn_about_z():
    assert np.allclose(geom3.apply_point(geom3.rot_z(math.pi / 2), [1, 0, 0]), [0, 1, 0], atol=1e-15)


def test_translation_after_rotation_maps_origin():
    tf = geom3.compose([geom3.trans_z(-42.42), geom3.rot_y(0.3)])
    assert np.allclose(geom3.apply_point(tf), [0, 0, -42.42], atol=1e-15)


@pytest.mark.parametrize("fn", [geom3.rot_x, geom3.rot_y, geom3.rot_z,
                                geom3.trans_x, geom3.trans_y, geom3.trans_z])
@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_input_rejected(fn, bad):
    with pytest.raises(InvalidArgumentError):
        fn(bad)


def test_compose_identities():
    assert np.array_equal(geom3.compose([np.eye(4), np.eye(4)]), np.eye(4))
    with pytest.raises(InvalidArgumentError):
        geom3.compose([])


@given(angles, angles)
def test_axis_composition_adds_angles(a, b):
    assert np.allclose(geom3.compose([geom3.rot_z(a), geom3.rot_z(b)]), geom3.rot_z(a + b), atol=1e-12)


@given(st.lists(st.tuples(st.integers(0, 5), angles), min_size=3, max_size=3))
def test_compose_associative(items):
    makers = ROTS + (geom3.trans_x, geom3.trans_y, geom3.trans_z)
    a, b, c = (makers[i](v) for i, v in items)
    lhs = geom3.compose([geom3.compose([a, b]), c])
    rhs = geom3.compose([a, geom3.compose([b, c])])
    assert np.allclose(lhs, rhs, atol=1e-12, rtol=0)


@given(st.lists(st.tuples(st.integers(0, 2), angles), min_size=1, max_size=6))
def test_rotations_orthonormal(items):
    r = geom3.compose([ROTS[i](v) for i, v in items])
    rot = r[:3, :3]
    assert np.allclose(rot.T @ rot, np.eye(3), atol=1e-12)
    assert abs(np.linalg.det(rot) - 1) < 1e-12
    assert np.array_equal(r[3], [0, 0, 0, 1])


@given(angles)
def test_rotation_derivatives_match_finite_differences(a):
    h = 1e-6
    for rot, drot in zip(ROTS, (geom3.d_rot_x, geom3.d_rot_y, geom3.d_rot_z)):
        fd = (rot(a + h) - rot(a - h)) / (2 * h)
        assert np.allclose(drot(a), fd, atol=1e-9)


def test_plane_intersection_axis_aligned():
    xz = ([1.0, 0, 0], [0, 0, 1.0])
    yz = ([0, 1.0, 0], [0, 0, 1.0])
    assert geom3.plane_intersection_angle([0, 0, 1.0], xz, yz) == pytest.approx(0.0, abs=1e-15)


def test_coincident_planes_rejected():
    ray = np.array([0, 0, 1.0])
    plane = (ray, np.array([1.0, 0, 0]))
    with pytest.raises(SingularConfigurationError):
        geom3.plane_intersection_angle(ray, plane, plane)


unit_vecs = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(
    lambda v: np.linalg.norm(v) > 0.2).map(lambda v: np.array(v) / np.linalg.norm(v))


@given(unit_vecs, unit_vecs, unit_vecs, unit_vecs)
def test_plane_intersection_invariant_under_spanning_swap(a1, b1, a2, b2):
    n1, n2 = np.cross(a1, b1), np.cross(a2, b2)
    if min(np.linalg.norm(n1), np.linalg.norm(n2), np.linalg.norm(np.cross(n1, n2))) < 1e-3:
        return
    base = geom3.plane_intersection_angle(a1, (a1, b1), (a2, b2))
    assert 0 <= base < math.pi
    swapped = geom3.plane_intersection_angle(a1, (a1, b1), (b2, a2))
    assert swapped == pytest.approx(base, abs=1e-12)


def test_home_rho_matches_brute_force_intersection(params, home):
    # sample both planes densely and take the direction common to both
    u2, u3, u4, u5 = kin.spherical_axes(params, home.theta2, home.theta3)
    t = np.linspace(0, math.pi, 200001)
    n2 = geom3.unit(np.cross(u3, u4))
    e1 = u2
    e2 = geom3.unit(u5 - (u5 @ u2) * u2)
    dirs = np.outer(np.cos(t), e1) + np.outer(np.sin(t), e2)
    k = np.argmin(np.abs(dirs @ n2))
    brute = t[k]
    rho = geom3.plane_intersection_angle(u2, (u2, u5), (u3, u4))
    assert rho == pytest.approx(brute, abs=2e-5)
