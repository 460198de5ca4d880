import numpy as np
import pytest

from pulsekit.model import preset
from pulsekit.propagate import (
    Grid,
    chebyshev_grid,
    integrate_fundamental,
    l2_inner,
    l2_norm,
    liouville_defect,
    ode_defect,
    propagate_column,
    quad_gl,
    solve_linear_ivp,
    sup_norm,
    system_matrix,
    trace_integral_cumulative,
)
from pulsekit.systems import mode_params


def rotation(r):
    return np.array([[0.0, 1.0], [-1.0, 0.0]])


def test_propagate_column_rotation_system():
    # for this matrix the flow is clockwise: x = (cos t, -sin t)
    nodes = np.linspace(0.0, 2.0 * np.pi, 33)
    traj = propagate_column(rotation, nodes, np.array([1.0, 0.0]), rtol=1e-12, atol=1e-12)
    for i, t in enumerate(nodes):
        vec, log = traj.slog_at(i)
        val = np.exp(log) * vec
        np.testing.assert_allclose(val, [np.cos(t), -np.sin(t)], atol=1e-9)
        np.testing.assert_allclose(traj.at(i), val, rtol=1e-14)


def test_propagate_column_rescales_growing_solution():
    # x' = 5x grows by e^{50} over [0, 10]; stored vectors must stay bounded
    afun = lambda r: np.array([[5.0]])
    nodes = np.linspace(0.0, 10.0, 21)
    traj = propagate_column(afun, nodes, np.array([1.0]), rtol=1e-12, atol=1e-12)
    assert traj.renorms > 0
    for i, t in enumerate(nodes):
        vec, log = traj.slog_at(i)
        assert np.linalg.norm(vec) <= 1e4 + 1e-9
        assert log + np.log(np.linalg.norm(vec)) == pytest.approx(5.0 * t, abs=1e-8)


def test_propagate_column_linearity():
    nodes = np.linspace(0.0, 3.0, 9)
    x0 = np.array([0.7, -0.4])
    t1 = propagate_column(rotation, nodes, x0)
    t2 = propagate_column(rotation, nodes, 5.0 * x0)
    for i in range(len(nodes)):
        gap = np.linalg.norm(t2.at(i) - 5.0 * t1.at(i))
        assert gap <= 1e-10 * np.linalg.norm(5.0 * t1.at(i))


def test_fundamental_solution_determinant_tracks_trace():
    # stiff case: columns align numerically, the tracked det must survive
    m = preset("adia-exp")
    p = mode_params(m, "high-degree-adiabatic", zeta=30.0)
    sol = integrate_fundamental(m, p, which="full")
    afun = system_matrix(m, p, which="full")
    assert liouville_defect(sol, afun) < 1e-8

    # same check by hand on the endpoints
    s0, l0 = sol.det_slog(0)
    s1, l1 = sol.det_slog(len(sol.nodes) - 1)
    assert s0 == s1
    tr = trace_integral_cumulative(afun, sol.nodes)
    assert (l1 - l0) == pytest.approx(tr[-1], abs=1e-8)


def test_column_route_determinant_at_moderate_stiffness():
    m = preset("adia-exp")
    p = mode_params(m, "high-degree-adiabatic", zeta=6.0)
    sol = integrate_fundamental(m, p, which="residual", nodes=np.linspace(1.0, 2.0, 65))
    last = len(sol.nodes) - 1
    s_cols, l_cols = sol.det_slog_from_columns(last)
    s_qr, l_qr = sol.det_slog(last)
    assert s_cols == s_qr
    assert l_cols == pytest.approx(l_qr, abs=1e-7)


def test_fundamental_solution_descending_nodes():
    m = preset("adia-exp")
    p = mode_params(m, "high-degree-adiabatic", zeta=10.0)
    nodes = np.linspace(m.b, m.a, 65)
    sol = integrate_fundamental(m, p, which="residual", nodes=nodes, track_det=False)
    afun = system_matrix(m, p, which="residual")
    assert liouville_defect(sol, afun) < 1e-6


def test_reversal_recovers_initial_matrix():
    m = preset("adia-exp")
    p = mode_params(m, "high-degree-adiabatic", zeta=8.0)
    fwd = np.linspace(1.0, 2.0, 33)
    out = integrate_fundamental(m, p, which="residual", nodes=fwd,
                                rtol=1e-12, atol=1e-12, track_det=False)
    end = out.matrix_at(len(fwd) - 1, rescale=False)
    scale = np.array([c.logscale[-1] for c in out.columns])
    back = integrate_fundamental(m, p, which="residual", nodes=fwd[::-1],
                                 inits=end, rtol=1e-12, atol=1e-12, track_det=False)
    for j, col in enumerate(back.columns):
        vec, log = col.slog_at(len(fwd) - 1)
        got = vec * np.exp(log + scale[j])
        want = np.eye(2)[:, j]
        np.testing.assert_allclose(got, want, atol=1e-7)


def test_column_extraction_matches_single_solve():
    m = preset("nonadia-exp")
    p = mode_params(m, "high-degree-exp", zeta=5.0, sigma=2.0)
    nodes = np.linspace(1.0, 2.0, 17)
    full = integrate_fundamental(m, p, which="residual", nodes=nodes, track_det=False)
    afun = system_matrix(m, p, which="residual")
    single = propagate_column(afun, nodes, np.array([0.0, 1.0]))
    for i in range(len(nodes)):
        np.testing.assert_allclose(single.at(i), full.columns[1].at(i), rtol=1e-9,
                                   atol=1e-12)


def test_solve_linear_ivp_dense_defect():
    sol = solve_linear_ivp(rotation, (0.0, 6.0), np.array([0.0, 1.0]))
    assert ode_defect(sol, rotation) < 1e-6
    np.testing.assert_allclose(sol.sol(6.0), [np.sin(6.0), np.cos(6.0)], atol=1e-8)


def test_quad_gl_is_exact_on_polynomials():
    val = quad_gl(lambda r: 3.0 * r**5 - r + 2.0, -1.0, 3.0)
    exact = 0.5 * (3.0**6 - 1.0) - 0.5 * (9.0 - 1.0) + 2.0 * 4.0
    assert val == pytest.approx(exact, rel=1e-14)


def test_l2_and_sup_norms_interval_mode():
    assert l2_norm(np.sin, 0.0, np.pi) == pytest.approx(np.sqrt(np.pi / 2.0), rel=1e-12)
    assert l2_norm(lambda r: r, 0.0, 1.0) == pytest.approx(1.0 / np.sqrt(3.0), rel=1e-12)
    assert l2_inner(np.sin, np.cos, 0.0, np.pi) == pytest.approx(0.0, abs=1e-14)
    assert sup_norm(lambda r: r * (1.0 - r), 0.0, 1.0) == pytest.approx(0.25, rel=1e-6)


def test_grid_construction_and_weights():
    g = chebyshev_grid(1.0, 2.0, 257)
    assert g.a == 1.0 and g.b == 2.0
    assert np.all(np.diff(g.nodes) > 0.0)
    assert np.all(g.weights > 0.0)
    # the weights integrate constants exactly
    assert np.sum(g.weights) == pytest.approx(1.0, abs=1e-12)
    # and smooth functions to spectral accuracy
    got = float(np.dot(g.weights, np.sin(g.nodes)))
    assert got == pytest.approx(np.cos(1.0) - np.cos(2.0), abs=1e-12)


def test_grid_mode_norms():
    g = chebyshev_grid(1.0, 2.0, 129)
    assert l2_norm(lambda r: np.ones_like(r), g) == pytest.approx(1.0, rel=1e-12)
    assert sup_norm(lambda r: (r - 1.3) ** 2, g) == pytest.approx(0.49, rel=1e-10)
    # sampled-values form
    vals = g.nodes
    assert l2_norm(vals, g) == pytest.approx(np.sqrt(7.0 / 3.0), rel=1e-12)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(nodes=np.array([1.0, 0.5]), weights=np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        Grid(nodes=np.array([0.0, 1.0]), weights=np.array([0.5, -0.5]))


def test_cauchy_schwarz_on_random_polynomials():
    rng = np.random.default_rng(13)
    for _ in range(20):
        cf = rng.normal(size=4)
        cg = rng.normal(size=4)
        f = lambda r, c=cf: np.polyval(c, r)
        g = lambda r, c=cg: np.polyval(c, r)
        lhs = abs(l2_inner(f, g, 0.0, 1.0))
        rhs = l2_norm(f, 0.0, 1.0) * l2_norm(g, 0.0, 1.0)
        assert lhs <= rhs * (1.0 + 1e-12)


def test_matrix_initial_value_is_respected():
    m = preset("nonadia-exp")
    p = mode_params(m, "high-degree-exp", zeta=5.0, sigma=2.0)
    inits = np.array([[1.0, 1.0], [0.0, 2.0]])
    sol = integrate_fundamental(m, p, which="residual", inits=inits)
    np.testing.assert_allclose(sol.matrix_at(0), inits, rtol=1e-12)
    assert sol.tag == "residual"
