import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fingerkin import ContactConfig, assemble_J, assemble_T, solve_forces, stability_predicate, sweep
from fingerkin import stability as stab
from fingerkin.errors import StabilityIndeterminateError

T_HOME = np.array([1.0, 0, 0, 0])


def test_identity_system():
    sol = solve_forces(np.eye(4), np.eye(4), [1, 2, 3, 4])
    assert np.array_equal(sol.f, [1, 2, 3, 4]) and sol.stable
    assert sol.condition_estimate == 1.0


def test_triangular_system_by_hand():
    t = np.eye(4)
    j = np.array([[2.0, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    # J^t f = (2 f1 + f2, f2, f3, f4) = (1, 1, 0, 0)
    sol = solve_forces(t, j, [1, 1, 0, 0])
    assert sol.f == pytest.approx([0, 1, 0, 0], abs=1e-15)


def test_home_agrees_with_dense_least_squares(params, home):
    t, j = assemble_T(params, home).matrix, assemble_J(params, home).matrix
    sol = solve_forces(t, j, T_HOME)
    ref, *_ = np.linalg.lstsq(t.T @ j.T, T_HOME, rcond=None)
    assert np.max(np.abs(sol.f - ref)) <= 1e-10 * max(1.0, np.max(np.abs(ref)))


def test_home_residual_and_homogeneity(params, home):
    t, j = assemble_T(params, home).matrix, assemble_J(params, home).matrix
    sol = solve_forces(t, j, T_HOME)
    assert np.linalg.norm(t.T @ j.T @ sol.f - T_HOME) <= 1e-8
    scaled = solve_forces(t, j, 3.5 * T_HOME)
    assert np.max(np.abs(scaled.f - 3.5 * sol.f)) <= 1e-12 * max(1.0, np.max(np.abs(sol.f)))


def test_predicate_cases(params):
    c = ContactConfig.from_params(params)
    sol = solve_forces(np.eye(4), np.eye(4), [1, 0, 2, 3])
    assert stability_predicate(sol, c)
    neg = solve_forces(np.eye(4), np.eye(4), [1, -1e-3, 2, 3])
    assert not stability_predicate(neg, c) and not neg.stable
    c_off = ContactConfig.from_params(params, active=(True, False, True, True))
    assert stability_predicate(neg, c_off)
    assert solve_forces(np.eye(4), np.eye(4), [1, -1e-3, 2, 3], c_off.active).stable


def test_ill_conditioned_raises():
    j = np.eye(4)
    j[3, 3] = 1e-14
    with pytest.raises(StabilityIndeterminateError) as err:
        solve_forces(np.eye(4), j, T_HOME)
    assert err.value.condition >= stab.COND_LIMIT


def test_non_finite_raises():
    j = np.eye(4)
    j[0, 0] = math.nan
    with pytest.raises(StabilityIndeterminateError):
        solve_forces(np.eye(4), j, T_HOME)


def test_single_point_sweep_matches_direct_solve(params, home):
    g = ((home.theta2, home.theta2, 0.1), (home.theta6, home.theta6, 0.1))
    smap = sweep(params, grid=g)
    assert len(smap.rows) == 1
    sol = solve_forces(assemble_T(params, home), assemble_J(params, home), T_HOME)
    assert np.array_equal(smap.rows[0].f, sol.f)


def test_sweep_shape_order_and_determinism(params, home):
    g = ((home.theta2 - 0.1, home.theta2 + 0.1, 0.05), (home.theta6 - 0.04, home.theta6 + 0.04, 0.04))
    a, b = sweep(params, grid=g), sweep(params, grid=g)
    assert len(a.rows) == 5 * 3
    keys = [(r.theta2, r.theta6) for r in a.rows]
    assert keys == sorted(keys)
    assert a.to_csv() == b.to_csv()
    lines = a.to_csv().split("\n")
    assert lines[0] == ",".join(stab.CSV_COLUMNS) and lines[-1] == ""
    assert a.f1_grid().shape == (5, 3)


def test_flagged_samples_keep_going(params, home, monkeypatch):
    real = stab.assemble_J

    def flaky(p, s, c=None):
        if s.theta6 > home.theta6:
            raise StabilityIndeterminateError("forced", 1e13)
        return real(p, s, c)

    monkeypatch.setattr(stab, "assemble_J", flaky)
    smap = sweep(params, grid=((home.theta2, home.theta2, 1), (home.theta6, home.theta6 + 0.1, 0.1)))
    assert [r.flag for r in smap.rows] == ["", "ill_conditioned"]
    row = smap.to_csv().split("\n")[2].split(",")
    assert row[2:6] == [""] * 4 and row[-1] == "ill_conditioned"
    assert np.isnan(smap.f1_grid()[0, 1])


def test_axis_values():
    assert len(stab.axis_values(-0.6, 0.6, 0.02)) == 61
    with pytest.raises(ValueError):
        stab.axis_values(1, 0, 0.1)


def test_relative_variation_simple_grid():
    g = np.array([[1.0, 1.0], [3.0, 3.0]])
    # rows index theta2: f1 changes only along theta2
    v2, v6 = stab.relative_variation(g)
    assert v2 == pytest.approx(1.0) and v6 == 0.0


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.floats(0.1, 10))
def test_random_systems_residual_and_homogeneity(t, lam):
    rng = np.random.default_rng(7)
    tm = np.eye(4) + 0.3 * rng.standard_normal((4, 4))
    jm = np.eye(4) + 0.3 * rng.standard_normal((4, 4))
    t = np.array(t)
    sol = solve_forces(tm, jm, t)
    assert np.linalg.norm(tm.T @ jm.T @ sol.f - t) <= 1e-8 * max(np.linalg.norm(t), 1e-300) + 1e-300
    scaled = solve_forces(tm, jm, lam * t)
    assert np.allclose(scaled.f, lam * sol.f, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(t).max()))
