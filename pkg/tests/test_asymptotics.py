import math

import numpy as np
import pytest

from pulsekit.asymptotics import (
    J_MATRIX,
    PhaseKind,
    adjugate2,
    adjugate_conjugation,
    basis_defect,
    chi,
    full_asymptotic_matrix,
    indicator_matrix,
    make_theta,
    matched_deviation,
    phase_total,
    residual_basis,
    residual_cowling_basis_hf,
    residual_delta,
    residual_pattern_matrix,
    theta,
)
from pulsekit.errors import DegeneracyError, DomainError, PhaseError
from pulsekit.model import preset
from pulsekit.systems import mode_params


# ---------------------------------------------------------------------------
# phase integrals
# ---------------------------------------------------------------------------


def test_theta_closed_forms():
    m = preset("adia-exp")
    r = np.linspace(1.0, 2.0, 11)
    np.testing.assert_allclose(
        theta(m, PhaseKind("degree", 1.0), None, r), np.log(r), rtol=1e-12, atol=1e-12
    )
    # unit sound speed: frequency phase is just r - a
    np.testing.assert_allclose(
        theta(m, PhaseKind("frequency", 1.0), None, r), r - 1.0, rtol=1e-10, atol=1e-12
    )


def test_theta_buoyancy_oscillatory_closed_form():
    m = preset("nonadia-exp")
    p = mode_params(m, "high-degree-osc", zeta=10.0, sigma=0.5)
    r = np.linspace(1.0, 2.0, 9)
    np.testing.assert_allclose(
        theta(m, PhaseKind("buoyancy-osc", 1.0), p, r),
        np.sqrt(3.0) * np.log(r),
        rtol=1e-10,
        atol=1e-12,
    )


def test_theta_buoyancy_exponential_closed_form():
    m = preset("nonadia-exp")
    p = mode_params(m, "high-degree-exp", zeta=10.0, sigma=2.0)
    r = np.linspace(1.0, 2.0, 9)
    np.testing.assert_allclose(
        theta(m, PhaseKind("buoyancy-exp", 1.0), p, r),
        0.5 * np.sqrt(3.0) * np.log(r),
        rtol=1e-10,
        atol=1e-12,
    )


def test_theta_mixed_forms():
    m = preset("adia-exp")
    p = mode_params(m, "mixed-i", zeta=64.0, z=0.25)
    r = np.linspace(1.0, 2.0, 7)
    np.testing.assert_allclose(
        theta(m, PhaseKind("mixed-i", 1.0), p, r),
        np.log(r) - 0.25 * (r * r - 1.0) / (4.0 * 64.0),
        rtol=1e-10,
        atol=1e-12,
    )
    p2 = mode_params(m, "mixed-ii", zeta=16.0, z=0.5)
    # integrand 1 - z/(2 sqrt(zeta) t^2) integrates to (r-1) - z/(2 sqrt(zeta)) (1 - 1/r)
    np.testing.assert_allclose(
        theta(m, PhaseKind("mixed-ii", 1.0), p2, r),
        (r - 1.0) - (0.5 / 8.0) * (1.0 - 1.0 / r),
        rtol=1e-10,
        atol=1e-12,
    )


def test_theta_wrong_branch_raises():
    m = preset("nonadia-exp")
    p = mode_params(m, "high-degree-osc", zeta=10.0, sigma=0.5)
    with pytest.raises(DomainError):
        theta(m, PhaseKind("buoyancy-exp", 1.0), p, 1.5)


def test_theta_turning_point_raises():
    m = preset("nonadia-exp")
    # sigma = 1 hits N^2 = sigma^2 everywhere on this model
    p = mode_params(m, "high-frequency", sigma=1.0)
    with pytest.raises(DegeneracyError):
        theta(m, PhaseKind("buoyancy-exp", 1.0), p, 1.5)


def test_phase_tag_validated():
    with pytest.raises(DomainError):
        PhaseKind("sideways", 1.0)


def test_make_theta_matches_quadrature():
    m = preset("nonadia-exp")
    p = mode_params(m, "high-degree-exp", zeta=10.0, sigma=2.0)
    kind = PhaseKind("buoyancy-exp", 1.0)
    fast = make_theta(m, kind, p)
    rng = np.random.default_rng(2)
    pts = 1.0 + rng.random(20)
    np.testing.assert_allclose(fast(pts), theta(m, kind, p, pts), atol=1e-9)


# ---------------------------------------------------------------------------
# residual pattern matrices and their determinants
# ---------------------------------------------------------------------------


def test_hyperbolic_delta_matches_pattern_determinant():
    m = preset("nonadia-exp")
    p = mode_params(m, "high-degree-exp", zeta=10.0, sigma=2.0)
    for j in (1, 2):
        for k in (1, 2):
            sgn, logmag = residual_delta(m, p, "high-degree-exp", j, k)
            for r in (1.0, 1.37, 2.0):
                det = np.linalg.det(residual_pattern_matrix(m, p, "high-degree-exp", j, k, r))
                assert sgn * math.exp(logmag) == pytest.approx(det, rel=1e-9)


def test_delta_is_radius_independent():
    m = preset("nonadia-exp")
    p = mode_params(m, "high-degree-osc", zeta=14.0, sigma=0.5)
    rs = np.linspace(1.0, 2.0, 20)
    dets = [np.linalg.det(residual_pattern_matrix(m, p, "high-degree-osc", 1, 2, r)) for r in rs]
    assert np.ptp(dets) < 1e-10 * max(1.0, np.max(np.abs(dets)))


def test_hyperbolic_delta_lower_bound():
    # every (j, k) determinant dominates (e^{zeta*Theta} - 1)/2 in magnitude
    m = preset("nonadia-exp")
    theta_ab = phase_total(m, PhaseKind("buoyancy-exp", 1.0),
                           mode_params(m, "high-degree-exp", zeta=10.0, sigma=2.0))
    for zeta in (10.0, 20.0, 40.0):
        p = mode_params(m, "high-degree-exp", zeta=zeta, sigma=2.0)
        x = zeta * theta_ab
        bound_log = x + math.log1p(-math.exp(-x)) - math.log(2.0)
        for j in (1, 2):
            for k in (1, 2):
                _, logmag = residual_delta(m, p, "high-degree-exp", j, k)
                assert logmag >= bound_log - 1e-12


def test_trig_sigma_delta_values():
    # unit sound speed on [1, 2] gives L = 1, so the arguments are plain sigma
    m = preset("nonadia-exp")
    for sigma in (2.0, 3.3, 7.0):
        p = mode_params(m, "high-frequency", sigma=sigma)
        for (j, k), want in (((1, 1), math.sin(sigma)), ((2, 2), math.sin(sigma)),
                             ((1, 2), math.cos(sigma)), ((2, 1), -math.cos(sigma))):
            sgn, logmag = residual_delta(m, p, "high-frequency", j, k)
            assert sgn * math.exp(logmag) == pytest.approx(want, rel=1e-9)


def test_trig_sigma_delta_degenerate_choice():
    m = preset("nonadia-exp")
    p = mode_params(m, "high-frequency", sigma=math.pi / 2.0)
    _, logmag = residual_delta(m, p, "high-frequency", 1, 2)
    assert logmag < -30.0  # cos(pi/2) in floating point
    sgn, logmag = residual_delta(m, p, "high-frequency", 1, 1)
    assert sgn * math.exp(logmag) == pytest.approx(1.0, rel=1e-12)


def test_trig_zeta_delta_values():
    m = preset("nonadia-exp")
    p = mode_params(m, "high-degree-osc", zeta=9.0, sigma=0.5)
    L = phase_total(m, PhaseKind("buoyancy-osc", 1.0), p)
    for (j, k), want in (((1, 1), math.sin(9.0 * L)), ((1, 2), -math.cos(9.0 * L)),
                         ((2, 1), math.cos(9.0 * L)), ((2, 2), math.sin(9.0 * L))):
        sgn, logmag = residual_delta(m, p, "high-degree-osc", j, k)
        assert sgn * math.exp(logmag) == pytest.approx(want, rel=1e-8)


def test_hyperbolic_basis_defect_decays():
    m = preset("nonadia-exp")
    defects = []
    for zeta in (20.0, 40.0, 80.0):
        p = mode_params(m, "high-degree-exp", zeta=zeta, sigma=2.0)
        basis = residual_basis(m, p, "high-degree-exp", 1, 2)
        defects.append(basis_defect(m, p, basis, n=41))
    # defect is measured relative to the rate, so it should be flat-to-falling
    assert defects[1] < 1.6 * defects[0]
    assert defects[2] < 1.6 * defects[1]
    assert defects[0] < 0.25


# ---------------------------------------------------------------------------
# phase-shifted high-frequency residual basis
# ---------------------------------------------------------------------------


def test_hf_residual_determinant_identity():
    m = preset("adia-exp")
    rng = np.random.default_rng(31)
    for _ in range(100):
        sigma = 5.0 + 60.0 * rng.random()
        t1, t2 = rng.uniform(0.0, math.pi, size=2)
        if abs(math.cos(t1 - t2)) < 1e-6:
            continue
        p = mode_params(m, "high-frequency", sigma=sigma)
        basis = residual_cowling_basis_hf(m, p, (t1, t2))
        r = 1.0 + rng.random()
        det = np.linalg.det(basis.value(r))
        want = math.cos(t1 - t2) / (sigma * float(m.rho(r)))
        assert det == pytest.approx(want, rel=1e-9)


def test_hf_residual_quadrature_phases_rejected():
    m = preset("adia-exp")
    p = mode_params(m, "high-frequency", sigma=30.0)
    with pytest.raises(PhaseError):
        residual_cowling_basis_hf(m, p, (0.0, math.pi / 2.0))


def test_hf_residual_defect_sign_convention():
    # the corrected variant solves the system to O(1/sigma); the display
    # variant does not improve with sigma
    m = preset("adia-exp")
    corrected = []
    printed = []
    for sigma in (40.0, 80.0, 160.0):
        p = mode_params(m, "high-frequency", sigma=sigma)
        good = residual_cowling_basis_hf(m, p, (0.0, math.pi / 2.0 + 0.7), as_printed=False)
        bad = residual_cowling_basis_hf(m, p, (0.0, math.pi / 2.0 + 0.7), as_printed=True)
        corrected.append(basis_defect(m, p, good, n=41))
        printed.append(basis_defect(m, p, bad, n=41))
    assert corrected[2] < 0.05
    assert corrected[2] < 0.7 * corrected[0]
    assert min(printed) > 0.2


# ---------------------------------------------------------------------------
# adjugate and indicator identities
# ---------------------------------------------------------------------------


def test_adjugate_identities():
    rng = np.random.default_rng(17)
    for _ in range(40):
        mtx = rng.normal(size=(2, 2))
        adj = adjugate2(mtx)
        np.testing.assert_allclose(
            mtx @ adj, np.linalg.det(mtx) * np.eye(2), rtol=1e-12, atol=1e-12
        )
        np.testing.assert_allclose(adj, adjugate_conjugation(mtx), rtol=1e-12, atol=1e-14)
        # without the transpose the conjugation gives the adjugate of M^T,
        # which differs once the matrix is not symmetric
        wrong = J_MATRIX @ mtx @ J_MATRIX.T
        if abs(mtx[0, 1] - mtx[1, 0]) > 1e-3:
            assert not np.allclose(adj, wrong)


def test_indicator_swap_identity():
    for r, t in ((1.2, 1.7), (1.7, 1.2), (1.4, 1.4)):
        lhs = indicator_matrix(r, t) @ J_MATRIX
        rhs = J_MATRIX.T @ indicator_matrix(t, r)
        np.testing.assert_allclose(lhs, rhs, atol=0.0)
    assert chi(1.0, 2.0) == 1.0 and chi(2.0, 1.0) == 0.0


# ---------------------------------------------------------------------------
# full 4x4 bases
# ---------------------------------------------------------------------------


def test_power_column_leading_entry():
    m = preset("nonadia-exp")
    p = mode_params(m, "high-degree-exp", zeta=8.0, sigma=2.0)
    basis = full_asymptotic_matrix(m, p, "high-degree-exp")
    for r in (1.2, 1.6, 2.0):
        got = basis.columns[0].value(r)[3]
        assert got == pytest.approx(r ** (-8.0 - 1.5), rel=1e-10)


def test_high_frequency_potential_row_value():
    # fourth column, potential row, at the inner endpoint: -1/sigma^2
    m = preset("adia-exp")
    p = mode_params(m, "high-frequency", sigma=10.0)
    basis = full_asymptotic_matrix(m, p, "high-frequency")
    got = basis.columns[3].value(1.0)[2]
    assert got == pytest.approx(-0.01, rel=1e-12)


def test_adiabatic_columns_decouple_without_back_coupling():
    m = preset("adia-exp")
    p = mode_params(m, "high-degree-adiabatic", zeta=12.0, lambda_switch=0.0)
    basis = full_asymptotic_matrix(m, p, "high-degree-adiabatic")
    for r in (1.1, 1.8):
        v1 = basis.columns[0].value(r)
        v3 = basis.columns[2].value(r)
        np.testing.assert_allclose(v1[:2], 0.0, atol=1e-15)
        np.testing.assert_allclose(v3[:2], 0.0, atol=1e-15)
        # the potential rows survive
        assert abs(v1[2]) > 0.0 and abs(v1[3]) > 0.0


def test_full_basis_defects_decay_with_rate():
    m = preset("nonadia-exp")
    rel = []
    for zeta in (20.0, 40.0):
        p = mode_params(m, "high-degree-exp", zeta=zeta, sigma=2.0)
        basis = full_asymptotic_matrix(m, p, "high-degree-exp")
        rel.append(basis_defect(m, p, basis, n=31))
    assert rel[0] < 0.5
    assert rel[1] < 1.2 * rel[0]


def test_matched_deviation_halves_with_zeta():
    m = preset("adia-exp")
    devs = []
    for zeta in (40.0, 80.0):
        p = mode_params(m, "high-degree-adiabatic", zeta=zeta)
        out = matched_deviation(m, p, "high-degree-adiabatic", n_nodes=33)
        devs.append(out["deviation"])
    assert devs[0] < 0.1
    ratio = devs[0] / devs[1]
    assert 1.4 < ratio < 2.9
