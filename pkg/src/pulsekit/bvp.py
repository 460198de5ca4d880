"""Boundary-condition machinery for the shell problems.

Covers separated self-adjoint conditions on scalar SL operators (with a
Pruefer-angle shooting eigensolver), component-wise two-point conditions on
the first-order systems, and the 4x4 multi-point determinants used for the
admissibility checks of the potential rows.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import BracketFailure, DomainError, GapFailure, SingularBVP
from .propagate import integrate_fundamental, quad_gl
from .slog import slog_det
from .asymptotics import AsymptoticBasis


# ---------------------------------------------------------------------------
# boundary-condition types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SLBC:
    """Separated self-adjoint conditions -cos(t) w + p sin(t) w' = 0.

    theta1 applies at the left endpoint, theta2 at the right; p is the SL
    leading coefficient (used in the derivative covector).
    """

    theta1: float
    theta2: float
    p: object = None

    def __post_init__(self):
        if not (0.0 <= self.theta1 < math.pi):
            raise DomainError("theta1 must lie in [0, pi)")
        if not (0.0 < self.theta2 <= math.pi):
            raise DomainError("theta2 must lie in (0, pi]")

    def covector(self, end, p_value):
        theta = self.theta1 if end == "a" else self.theta2
        return np.array([-math.cos(theta), p_value * math.sin(theta)])


@dataclass(frozen=True)
class PiBC:
    """Component j fixed at the left endpoint, component k at the right."""

    j: int
    k: int
    A: float = 0.0
    B: float = 0.0
    endpoints: tuple = None

    def __post_init__(self):
        if self.j not in (1, 2) or self.k not in (1, 2):
            raise DomainError("component indices must be 1 or 2")


@dataclass(frozen=True)
class MultiPointSpec:
    """Row/point layout for the 4x4 determinants.

    kind = "potential-pair": potential and potential-derivative rows at two
    points (rows ordered row3(p1), row3(p2), row4(p1), row4(p2)).
    kind = "mixed-quad": rows 1..4 at four points r1..r4.
    """

    kind: str
    points: tuple

    def __post_init__(self):
        if self.kind == "potential-pair":
            if len(self.points) != 2:
                raise DomainError("potential-pair needs two points")
        elif self.kind == "mixed-quad":
            if len(self.points) != 4:
                raise DomainError("mixed-quad needs four points")
        else:
            raise DomainError(f"unknown multi-point kind {self.kind!r}")

    def rows_and_points(self):
        if self.kind == "potential-pair":
            p1, p2 = self.points
            return ((2, p1), (2, p2), (3, p1), (3, p2))
        r1, r2, r3, r4 = self.points
        return ((0, r1), (1, r2), (2, r3), (3, r4))


def beta_interval(a, z, alpha, sigma, b=None):
    """Shrunken right endpoint a + z * sigma^(-alpha)."""
    if z <= 0.0:
        raise DomainError("z must be positive")
    if alpha not in (0.5, 1.0):
        raise DomainError("alpha must be 1/2 or 1")
    if sigma <= 0.0:
        raise DomainError("sigma must be positive")
    beta = a + z * sigma ** (-alpha)
    if b is not None and beta > b:
        raise DomainError(f"beta = {beta} exceeds the right endpoint {b}")
    return beta


def power_pair_det(r, alpha1, alpha2, eps):
    """r^a1 (r+e)^a2 - (r+e)^a1 r^a2; first order (a2-a1) r^(a1+a2-1) e."""
    return r**alpha1 * (r + eps) ** alpha2 - (r + eps) ** alpha1 * r**alpha2


# ---------------------------------------------------------------------------
# two-point machinery on the first-order systems
# ---------------------------------------------------------------------------


def _column_entry_slog(basis_or_solution, col, row, point, node_index=None):
    """(mantissa, log) of one matrix entry, from either representation."""
    if isinstance(basis_or_solution, AsymptoticBasis):
        c = basis_or_solution.columns[col]
        return float(np.asarray(c.vec(point))[row]), float(c.logmag(point))
    c = basis_or_solution.columns[col]
    return float(c.values[node_index][row]), float(c.logscale[node_index])


def _locate_node(nodes, point):
    i = int(np.argmin(np.abs(nodes - point)))
    if abs(nodes[i] - point) > 1e-9 * max(1.0, abs(point)):
        raise DomainError(f"point {point} is not a node of the solution")
    return i


def _n_columns(basis_or_solution):
    return len(basis_or_solution.columns)


def _entry_matrices(basis_or_solution, rows_points):
    """Stack (mantissa, logexp) for the requested (row, point) functionals."""
    ncols = _n_columns(basis_or_solution)
    mant = np.zeros((len(rows_points), ncols))
    logs = np.zeros((len(rows_points), ncols))
    is_basis = isinstance(basis_or_solution, AsymptoticBasis)
    for i, (row, point) in enumerate(rows_points):
        idx = None if is_basis else _locate_node(basis_or_solution.nodes, point)
        for l in range(ncols):
            mant[i, l], logs[i, l] = _column_entry_slog(
                basis_or_solution, l, row, point, idx
            )
    return mant, logs


def residual_bvp_det(basis, j, k, endpoints=None):
    """Scaled determinant of [u-row at point j, eta-row at point k].

    Point index 1 is the left endpoint, 2 the right.  For an integrated
    solution the endpoints default to its first and last nodes.
    """
    if j not in (1, 2) or k not in (1, 2):
        raise DomainError("point indices must be 1 or 2")
    if endpoints is None:
        if isinstance(basis, AsymptoticBasis):
            raise DomainError("endpoints required for a closed-form basis")
        endpoints = (float(basis.nodes[0]), float(basis.nodes[-1]))
    r_of = {1: endpoints[0], 2: endpoints[1]}
    mant, logs = _entry_matrices(basis, ((0, r_of[j]), (1, r_of[k])))
    return slog_det(mant, logs)


def _normalized_det(mant, logs):
    """Scale-free solvability measure of the boundary matrix in [0, 1].

    Column log-scales are factored out, rows are equilibrated by their max
    entries, and the inverse condition number of the result is returned.
    Column mantissas are unit scale over the interval by construction, so
    a column that is tiny in every boundary row nearly solves the
    homogeneous problem and correctly drives the measure to zero; rescaling
    columns here would mask exactly that resonance.
    """
    scaled = mant * np.exp(logs - np.max(logs, axis=0)[None, :])
    row_max = np.max(np.abs(scaled), axis=1)
    if np.any(row_max == 0.0):
        return 0.0
    scaled = scaled / row_max[:, None]
    sv = np.linalg.svd(scaled, compute_uv=False)
    if sv[0] == 0.0:
        return 0.0
    return float(sv[-1] / sv[0])


def solve_two_point(model, params, bc, which="residual", data=None,
                    basis=None, nodes=None, rtol=1e-10, atol=1e-10,
                    det_floor=1e-10):
    """Superpose fundamental columns to match two-point boundary data.

    bc is either PiBC (component conditions on a 2x2 system) or a
    MultiPointSpec with a 4-vector of data.  A closed-form basis can stand
    in for the integrated fundamental solution.
    """
    if isinstance(bc, PiBC):
        endpoints = bc.endpoints or (model.a, model.b)
        rows_points = ((bc.j - 1, endpoints[0]), (bc.k - 1, endpoints[1]))
        data_vec = np.array([bc.A, bc.B])
        span = endpoints
        n_cond = 2
    else:
        rows_points = bc.rows_and_points()
        if data is None:
            data_vec = np.zeros(4)
        else:
            data_vec = np.asarray(data, dtype=float)
        span = (min(bc.points), max(bc.points))
        n_cond = 4
    if data_vec.shape != (n_cond,):
        raise DomainError(f"boundary data must have length {n_cond}")

    if nodes is None:
        nodes = np.union1d(np.linspace(span[0], span[1], 129),
                           [p for _, p in rows_points])
    if basis is None:
        source = integrate_fundamental(model, params, which=which, nodes=nodes,
                                       rtol=rtol, atol=atol, track_det=False)
        n_cols = len(source.columns)
    else:
        source = basis
        n_cols = len(source.columns)
    if n_cols != n_cond:
        raise DomainError(
            f"{n_cond} boundary conditions need a {n_cond}-column "
            f"fundamental, got {n_cols} columns"
        )

    mant, logs = _entry_matrices(source, rows_points)
    norm_det = _normalized_det(mant, logs)
    if norm_det < det_floor:
        raise SingularBVP(
            f"boundary determinant {norm_det:.3e} below floor {det_floor:.1e}"
        )

    # solve with per-column scale factored out, then restore it
    col_ref = np.max(logs, axis=0)
    m_hat = mant * np.exp(logs - col_ref[None, :])
    c_hat = np.linalg.solve(m_hat, data_vec)
    coeff_log = -col_ref

    if isinstance(source, AsymptoticBasis):
        dim = len(np.asarray(source.columns[0].vec(nodes[0])))
        values = np.zeros((len(nodes), dim))
        for i, r in enumerate(nodes):
            acc = np.zeros(dim)
            for l, c in enumerate(source.columns):
                acc += c_hat[l] * np.asarray(c.vec(r)) * math.exp(
                    c.logmag(r) + coeff_log[l]
                )
            values[i] = acc
    else:
        dim = source.dim
        values = np.zeros((len(nodes), dim))
        for i in range(len(nodes)):
            acc = np.zeros(dim)
            for l, c in enumerate(source.columns):
                acc += c_hat[l] * c.values[i] * math.exp(
                    c.logscale[i] + coeff_log[l]
                )
            values[i] = acc

    # boundary residual in the data scale
    residual = float(np.max(np.abs(m_hat @ c_hat - data_vec)))
    scale = max(1.0, float(np.max(np.abs(data_vec))))
    return {
        "nodes": np.asarray(nodes, dtype=float),
        "values": values,
        "coefficients": c_hat * np.exp(coeff_log),
        "normalized_det": norm_det,
        "boundary_residual": residual / scale,
    }


def det_full_multipoint(fundamental, spec, pair_rotation=0.0):
    """Scaled determinant of the 4x4 multi-point matrix.

    pair_rotation (radians) mixes the last two columns by a rotation before
    taking the determinant; it implements the free additive phase constant
    of the oscillatory wave pair and leaves |det| of a consistent pair
    unchanged only at leading order.
    """
    mant, logs = _entry_matrices(fundamental, spec.rows_and_points())
    if pair_rotation != 0.0:
        if not np.allclose(logs[:, 2], logs[:, 3], atol=1e-12):
            raise DomainError("pair rotation needs equal column scales")
        c, s = math.cos(pair_rotation), math.sin(pair_rotation)
        m2 = mant.copy()
        m2[:, 2] = c * mant[:, 2] + s * mant[:, 3]
        m2[:, 3] = -s * mant[:, 2] + c * mant[:, 3]
        mant = m2
    return slog_det(mant, logs)


def best_pair_rotation(fundamental, spec, n_grid=64):
    """Rotation angle of the wave pair maximizing |det| (1-D grid search)."""
    best = (0.0, -math.inf)
    for delta in np.linspace(0.0, math.pi, n_grid, endpoint=False):
        sgn, logmag = det_full_multipoint(fundamental, spec, pair_rotation=delta)
        if sgn != 0.0 and logmag > best[1]:
            best = (float(delta), logmag)
    return best[0]


# ---------------------------------------------------------------------------
# Sturm-Liouville eigenvalues by Pruefer shooting
# ---------------------------------------------------------------------------
#
# The angle is advanced interval by interval with midpoint-frozen
# coefficients, for which the transfer is exact (a rotation in scaled
# variables on oscillatory intervals, a hyperbolic map otherwise).  The
# frozen-coefficient error is O(h^2) and smooth, so one Richardson pass
# over a doubled mesh gives O(h^4) at a cost independent of lambda.


def _pruefer_angle_ode(p, q, w, a, b, theta1, lam, rtol=1e-10, atol=1e-12):
    """Reference angle via direct integration; used for cross-checks."""

    def rhs(r, phi):
        s, c = math.sin(phi[0]), math.cos(phi[0])
        return [c * c / p(r) + (lam * w(r) - q(r)) * s * s]

    sol = solve_ivp(rhs, (a, b), [theta1], method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise BracketFailure(f"angle integration failed at lambda = {lam}")
    return float(sol.y[0, -1])


def _midpoint_mesh(p, q, w, a, b, n):
    edges = np.linspace(a, b, n + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    ones = np.ones_like(mids)
    return (np.asarray(p(mids), dtype=float) * ones,
            np.asarray(q(mids), dtype=float) * ones,
            np.asarray(w(mids), dtype=float) * ones,
            np.diff(edges))


def _frozen_angle(mesh, theta1, lam):
    """Continuous Pruefer angle at b for the frozen-coefficient problem."""
    pbar, qbar, wbar, hs = mesh
    omsq = (lam * wbar - qbar) / pbar
    frac = float(theta1)
    m = 0
    for i in range(hs.size):
        h = float(hs[i])
        o2 = float(omsq[i])
        pb = float(pbar[i])
        if o2 * h * h > 1e-8:
            # oscillatory: exact rotation of the scaled pair
            om = math.sqrt(o2)
            k = pb * om
            psi = math.atan2(k * math.sin(frac), math.cos(frac))
            total = psi + om * h
            steps = math.floor(total / math.pi)
            rem = total - steps * math.pi
            frac = math.atan2(math.sin(rem), k * math.cos(rem))
            if frac < 0.0:
                frac += math.pi
            m += steps
        else:
            # hyperbolic or nearly flat: direct transfer of (y, p y')
            y, z = math.sin(frac), math.cos(frac)
            x = o2 * h * h
            if x >= 0.0:
                arg = math.sqrt(x)
                cs = math.cos(arg)
                snc = 1.0 if arg < 1e-8 else math.sin(arg) / arg
            else:
                arg = math.sqrt(-x)
                cs = math.cosh(arg)
                snc = 1.0 if arg < 1e-8 else math.sinh(arg) / arg
            y_new = cs * y + h * snc * z / pb
            z_new = -pb * o2 * h * snc * y + cs * z
            frac = math.atan2(y_new, z_new)
            if frac < 0.0:
                frac += math.pi
                m += 1
            scale = math.hypot(y_new, z_new)
            if scale == 0.0:
                raise BracketFailure("degenerate transfer in angle sweep")
    return m * math.pi + frac


def _richardson_angle(mesh_pair, theta1, lam):
    coarse = _frozen_angle(mesh_pair[0], theta1, lam)
    fine = _frozen_angle(mesh_pair[1], theta1, lam)
    return (4.0 * fine - coarse) / 3.0


def _bracketed_root(fn, lo, hi, f_lo, f_hi, width, label):
    tries = 0
    while f_lo > 0.0 or f_hi < 0.0:
        tries += 1
        if tries > 60:
            raise BracketFailure(f"no bracket for {label} after {tries} tries")
        if f_lo > 0.0:
            lo -= width
            f_lo = fn(lo)
        if f_hi < 0.0:
            hi += width
            f_hi = fn(hi)
        width *= 1.6
    return brentq(fn, lo, hi, xtol=1e-13, rtol=1e-15)


def pruefer_eigenvalues(p, q, w, a, b, bc, indices, mesh=256, phase_tol=1e-9):
    """Eigenvalues of -(p y')' + q y = lam w y under bc, by oscillation count.

    indices are 1-based: the n-th eigenfunction has n-1 interior zeros.
    Roots are solved on successive Richardson levels; the phase gap between
    consecutive levels is 15/16 of the coarser level's error, so gap/15
    estimates the accepted root's boundary-functional residual, which must
    come out below phase_tol.
    """
    meshes = [_midpoint_mesh(p, q, w, a, b, mesh * 2**k) for k in range(7)]
    travel = quad_gl(lambda r: np.sqrt(np.maximum(w(r) / p(r), 0.0)), a, b)
    root_step = math.pi / travel
    xs = np.linspace(a, b, 257)
    q_shift = float(np.min(q(xs) / w(xs)))
    out = []
    for n in indices:
        target = bc.theta2 + (n - 1) * math.pi

        def g_level(level):
            pair = (meshes[level], meshes[level + 1])
            return lambda lam: _richardson_angle(pair, bc.theta1, lam) - target

        g_prev = g_level(0)
        guess_root = (target - bc.theta1) / travel
        lam_mid = guess_root * abs(guess_root) + q_shift
        width = max(4.0 * root_step * max(abs(guess_root), root_step), 10.0)
        lo, hi = lam_mid - width, lam_mid + width
        lam = _bracketed_root(g_prev, lo, hi, g_prev(lo), g_prev(hi), width,
                              f"eigenvalue index {n}")

        accepted = False
        for level in (1, 2, 3, 4, 5):
            g_next = g_level(level)
            delta = max(1e-8 * abs(lam), 1e-8)
            lam_next = _bracketed_root(g_next, lam - delta, lam + delta,
                                       g_next(lam - delta), g_next(lam + delta),
                                       delta, f"level-{level} index {n}")
            residual = abs(math.sin(g_prev(lam_next))) / 15.0
            lam, g_prev = lam_next, g_next
            if residual <= phase_tol:
                accepted = True
                break
        if not accepted:
            raise BracketFailure(
                f"boundary functional residual {residual:.3e} at index {n}"
            )
        out.append(float(lam))
    return out


_SL_FORMS = ("J", "L", "F")


def sl_operator(model, tag, sigma=None):
    """(p, q, w) in the standard form -(p y')' + q y = lam w y.

    J: leading part of the radial displacement operator, weight h.
    L: potential operator, returned eigenvalues are the degree-like values
       (descending), realized here by q = -kappa h with unit weight.
    F: shifted displacement operator with density weight (needs sigma).
    """
    if tag == "J":
        p = lambda r: r * r * model.rho(r)
        q = lambda r: np.zeros_like(np.asarray(r, dtype=float))
        w = lambda r: model.h(r)
    elif tag == "L":
        p = lambda r: r * r * np.ones_like(np.asarray(r, dtype=float))
        q = lambda r: -model.kappa * model.h(r)
        w = lambda r: np.ones_like(np.asarray(r, dtype=float))
    elif tag == "F":
        if sigma is None:
            raise DomainError("tag F needs sigma")
        p = lambda r: r * r * model.rho(r)
        q = lambda r: -sigma**2 * (r * r / model.c(r) ** 2) * model.rho(r)
        w = lambda r: model.rho(r)
    else:
        raise DomainError(f"unknown operator tag {tag!r}")
    return p, q, w


def sl_eigenvalues(model, tag, bc, indices, sigma=None, interval=None,
                   mesh=256, phase_tol=1e-9):
    """Model-aware eigenvalues; tags L and F return sign-flipped values
    (descending), so the first index is the greatest eigenvalue of the
    original operator."""
    p, q, w = sl_operator(model, tag, sigma=sigma)
    a, b = interval if interval is not None else (model.a, model.b)
    lams = pruefer_eigenvalues(p, q, w, a, b, bc, indices, mesh=mesh,
                               phase_tol=phase_tol)
    if tag in ("L", "F"):
        return [-v for v in lams]
    return lams


def choose_sigma_bc(model, sigma, theta_pair=(math.pi / 2.0, math.pi / 2.0),
                    sigma_min=5.0, n_pad=2, mesh=256):
    """Frequency-dependent BC choice keeping sigma^2 away from the spectrum.

    Returns (SLBC, verified gap).  The alternative family (theta1 = 0)
    is offset by half a step, so one of the two always keeps the distance
    pi/(4L) in square-root units; the verified gap must then exceed
    sigma*pi/(12 L).
    """
    if sigma < sigma_min:
        raise DomainError(f"sigma below the asymptotic floor {sigma_min}")
    theta1, theta2 = theta_pair
    if math.sin(theta1) == 0.0 or math.sin(theta2) == 0.0:
        raise DomainError("generic pair needs sin(theta1) sin(theta2) != 0")
    L = model.length_scale("frequency")
    p, q, w = sl_operator(model, "J")
    bc_alt = SLBC(0.0, theta2, p)
    bc_gen = SLBC(theta1, theta2, p)

    n_mid = max(1, int(round(sigma * L / math.pi)))
    lo = max(1, n_mid - n_pad)
    idx = list(range(lo, n_mid + n_pad + 1))
    mu = pruefer_eigenvalues(p, q, w, model.a, model.b, bc_alt, idx,
                             mesh=mesh, phase_tol=1e-6)
    near_mu = min(abs(sigma - math.sqrt(max(v, 0.0))) for v in mu)

    chosen = bc_gen if near_mu < math.pi / (4.0 * L) else bc_alt
    lam = pruefer_eigenvalues(p, q, w, model.a, model.b, chosen, idx,
                              mesh=mesh, phase_tol=1e-6)
    gap = min(abs(sigma**2 - v) for v in lam)
    bound = sigma * math.pi / (12.0 * L)
    if gap < bound:
        raise GapFailure(f"verified gap {gap:.6g} below bound {bound:.6g}")
    return chosen, float(gap)


# ---------------------------------------------------------------------------
# closed-form comparison spectrum on shrunken intervals
# ---------------------------------------------------------------------------


def tilde_L_spectrum(a, beta, j_max):
    """Eigenvalues (j pi / Y(beta))^2 for the substitute operator with
    Y(r) = 1/a - 1/r; also the monotone lower bound tau = first eigenvalue."""
    if not (0.0 < a < beta):
        raise DomainError("need 0 < a < beta")
    upsilon_beta = 1.0 / a - 1.0 / beta
    roots = np.array([j * math.pi / upsilon_beta for j in range(1, j_max + 1)])
    lams = roots**2
    return {
        "upsilon_beta": upsilon_beta,
        "sqrt_eigenvalues": roots,
        "eigenvalues": lams,
        "tau": float(lams[0]),
    }


def tilde_L_mode(a, beta, j):
    """The j-th closed-form eigenfunction r -> sin(sqrt(lam_j) Y(r))."""
    upsilon_beta = 1.0 / a - 1.0 / beta
    root = j * math.pi / upsilon_beta

    def phi(r):
        r = np.asarray(r, dtype=float)
        return np.sin(root * (1.0 / a - 1.0 / r))

    return phi
