"""Green's matrix of the residual two-point problem and the induced
gravity-coupling kernel.

The residual pair (u, eta) with component j pinned at the left endpoint
and component k at the right has a rank-one Green's matrix built from two
solutions, one satisfying the left condition and one the right.  Sandwiched
between the coupling rows it collapses to a scalar kernel F(r, t); at
leading order in the large parameter this kernel has a closed symmetric
form assembled from sinh/cosh (or sine/cosine) patterns and four
coefficient products.  Everything here keeps column scales in log form so
exponentially growing solutions never materialize.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .asymptotics import (
    AsymptoticBasis,
    PhaseKind,
    SplitColumn,
    _hyperbolic_pattern,
    _residual_family,
    _trig_sigma_pattern,
    _trig_zeta_pattern,
    make_theta,
    phase_total,
    residual_delta,
)
from .bvp import PiBC, _entry_matrices, _locate_node, _normalized_det
from .errors import DomainError, SingularBVP, StepFailure
from .model import curly_h
from .propagate import Grid, _panel_nodes
from .systems import assemble_residual_matrix, coupling_C, coupling_G

_GL32 = np.polynomial.legendre.leggauss(32)


# ---------------------------------------------------------------------------
# grids and kernel tables
# ---------------------------------------------------------------------------


def gauss_grid(a, b, n_nodes=128):
    """Composite Gauss-Legendre grid; n_nodes must be a multiple of 8."""
    if not (a < b):
        raise DomainError("need a < b")
    if n_nodes <= 0 or n_nodes % 8 != 0:
        raise DomainError("n_nodes must be a positive multiple of 8")
    rule = np.polynomial.legendre.leggauss(8)
    nodes, weights = _panel_nodes(a, b, n_nodes // 8, rule)
    return Grid(nodes=nodes, weights=weights)


@dataclass
class KernelGrid:
    """Kernel samples on a shared product grid.

    F holds the kernel tabulated from a Green evaluator, Fs the closed
    leading-order form.  coeffs carries the coefficient samples (u, v, w, f
    and the stretch factor) used to build Fs, delta the (sign, log)
    determinant that normalizes it.
    """

    grid: Grid
    F: np.ndarray | None = None
    Fs: np.ndarray | None = None
    coeffs: dict = field(default_factory=dict)
    delta: tuple | None = None
    regime: str = ""
    bc: tuple = (1, 2)

    def table(self, name="F"):
        arr = {"F": self.F, "Fs": self.Fs}.get(name)
        if arr is None:
            raise DomainError(f"kernel table {name!r} is not stored")
        return arr

    def _l2(self, k):
        w = self.grid.weights
        return float(np.sqrt(np.einsum("i,j,ij->", w, w, k * k)))

    def l2(self, name="F"):
        return self._l2(self.table(name))

    def sup(self, name="F"):
        return float(np.max(np.abs(self.table(name))))

    def asymmetry(self, name="F"):
        """Relative L2 size of the antisymmetric part, 0 for a zero table."""
        k = self.table(name)
        den = self._l2(k)
        if den == 0.0:
            return 0.0
        return self._l2(k - k.T) / den

    def rel_l2_diff(self):
        """|F - Fs| / |Fs| in the grid L2 norm; needs both tables."""
        num = self._l2(self.table("F") - self.table("Fs"))
        return num / self._l2(self.table("Fs"))

    def to_csv(self, path, name="F"):
        k = self.table(name)
        nodes = self.grid.nodes
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "t", name])
            for i, r in enumerate(nodes):
                for j, t in enumerate(nodes):
                    writer.writerow([f"{r:.17g}", f"{t:.17g}", f"{k[i, j]:.17g}"])


# ---------------------------------------------------------------------------
# dense numeric fundamentals
# ---------------------------------------------------------------------------


def _dense_column(model, params, x0, forward=True, n_seg=64, rtol=1e-11,
                  atol=1e-13):
    """One residual solution with per-segment dense output and rescaling."""
    rhs = lambda r, v: assemble_residual_matrix(model, params, r) @ v
    edges = np.linspace(model.a, model.b, n_seg + 1)
    x = np.asarray(x0, dtype=float).copy()
    nrm = float(np.linalg.norm(x))
    if nrm == 0.0:
        raise DomainError("zero initial column")
    x /= nrm
    logs = math.log(nrm)
    interps = [None] * n_seg
    shifts = np.zeros(n_seg)
    order = range(n_seg) if forward else range(n_seg - 1, -1, -1)
    for i in order:
        lo, hi = edges[i], edges[i + 1]
        t0, t1 = (lo, hi) if forward else (hi, lo)
        seg = solve_ivp(rhs, (t0, t1), x, method="DOP853", dense_output=True,
                        rtol=rtol, atol=atol)
        if not seg.success:
            raise StepFailure(f"integration failed near r = {t0:.6g}: {seg.message}")
        interps[i] = seg.sol
        shifts[i] = logs
        x = seg.y[:, -1].copy()
        nrm = float(np.linalg.norm(x))
        x /= nrm
        logs += math.log(nrm)

    def locate(r):
        r = float(r)
        if not (edges[0] - 1e-12 <= r <= edges[-1] + 1e-12):
            raise DomainError(f"r = {r:.6g} lies outside [{edges[0]}, {edges[-1]}]")
        return min(max(int(np.searchsorted(edges, r)) - 1, 0), n_seg - 1)

    def vec(r):
        return np.asarray(interps[locate(r)](float(r)), dtype=float)

    def logmag(r):
        return float(shifts[locate(r)])

    return SplitColumn(vec=vec, logmag=logmag)


def dense_residual_fundamental(model, params, bc=None, inits=None, n_seg=64,
                               rtol=1e-11, atol=1e-13):
    """Integrated residual pair evaluable anywhere on [a, b].

    With bc given (a PiBC), column 1 starts at a inside the null space of
    the row-j condition and column 2 starts at b inside the null space of
    the row-k condition (integrated right to left), so the pair feeds
    greens_matrix with no cancellation at any rate.  Without bc, inits must
    be a 2x2 matrix of starting columns at a.
    """
    if (bc is None) == (inits is None):
        raise DomainError("give exactly one of bc or inits")
    if bc is not None:
        if not isinstance(bc, PiBC):
            raise DomainError("bc must be a PiBC")
        start = {1: np.array([0.0, 1.0]), 2: np.array([1.0, 0.0])}
        cols = (
            _dense_column(model, params, start[bc.j], forward=True,
                          n_seg=n_seg, rtol=rtol, atol=atol),
            _dense_column(model, params, start[bc.k], forward=False,
                          n_seg=n_seg, rtol=rtol, atol=atol),
        )
    else:
        inits = np.asarray(inits, dtype=float)
        if inits.shape != (2, 2):
            raise DomainError("inits must be a 2x2 matrix of starting columns")
        cols = tuple(
            _dense_column(model, params, inits[:, i], forward=True,
                          n_seg=n_seg, rtol=rtol, atol=atol)
            for i in range(2)
        )
    return AsymptoticBasis(regime=params.regime, frame="residual-dense",
                           large_parameter="zeta", columns=cols)


# ---------------------------------------------------------------------------
# the Green evaluator
# ---------------------------------------------------------------------------


def _as_split_columns(fundamental):
    if isinstance(fundamental, AsymptoticBasis):
        return list(fundamental.columns)
    nodes = np.asarray(fundamental.nodes)
    out = []
    for c in fundamental.columns:
        def vec(r, c=c):
            return np.asarray(c.values[_locate_node(nodes, r)], dtype=float)

        def logmag(r, c=c):
            return float(c.logscale[_locate_node(nodes, r)])

        out.append(SplitColumn(vec=vec, logmag=logmag))
    return out


def _null_combination(columns, row_mant, row_logs):
    """Combination of two scaled columns annihilating a boundary functional."""
    coef = np.array([-row_mant[1], row_mant[0]])
    clog = np.array([row_logs[1], row_logs[0]])
    live = [i for i in range(2) if coef[i] != 0.0]
    if not live:
        raise SingularBVP("boundary row vanishes on both columns")
    ref = max(clog[i] for i in live)

    def slog(r):
        parts = []
        for i in live:
            v = np.asarray(columns[i].vec(r), dtype=float)
            parts.append((coef[i], v, clog[i] - ref + float(columns[i].logmag(r))))
        top = max(l for _, _, l in parts)
        vec = np.zeros(2)
        for c, v, l in parts:
            vec += c * v * math.exp(l - top)
        return vec, top

    return SplitColumn(vec=lambda r: slog(r)[0], logmag=lambda r: slog(r)[1])


class GreensEvaluator:
    """Pointwise Green matrix M(r, t) of the residual two-point problem.

    left/right are scaled solutions satisfying the endpoint conditions of
    bc at a and b respectively.  The matrix is rank one on each side of the
    diagonal; at r = t both one-sided pieces are summed, matching the
    indicator convention diag(-chi(r<=t), chi(t<=r)).
    """

    def __init__(self, model, params, bc, left, right, solvability,
                 det_floor=1e-10):
        self.model = model
        self.params = params
        self.bc = bc
        self._left = left
        self._right = right
        self.solvability = float(solvability)
        self.det_floor = float(det_floor)

    def left_slog(self, r):
        return np.asarray(self._left.vec(r), dtype=float), float(self._left.logmag(r))

    def right_slog(self, r):
        return np.asarray(self._right.vec(r), dtype=float), float(self._right.logmag(r))

    def det_slog(self, t):
        vl, ll = self.left_slog(t)
        vr, lr = self.right_slog(t)
        dm = vl[0] * vr[1] - vl[1] * vr[0]
        scale = float(np.hypot(vl[0], vl[1]) * np.hypot(vr[0], vr[1]))
        if not math.isfinite(dm) or scale == 0.0 \
                or abs(dm) < self.det_floor * scale:
            raise SingularBVP(f"solution pair degenerate at r = {t:.6g}")
        return float(dm), ll + lr

    def matrix(self, r, t):
        """M(r, t) as a plain 2x2 array (bounded, scales cancelled)."""
        dm, _ = self.det_slog(t)
        vl_t, ll_t = self.left_slog(t)
        vr_t, lr_t = self.right_slog(t)
        out = np.zeros((2, 2))
        if r <= t:
            vl_r, ll_r = self.left_slog(r)
            adj = np.array([vr_t[1], -vr_t[0]])
            out -= np.outer(vl_r, adj) * (math.exp(ll_r - ll_t) / dm)
        if r >= t:
            vr_r, lr_r = self.right_slog(r)
            adj = np.array([-vl_t[1], vl_t[0]])
            out += np.outer(vr_r, adj) * (math.exp(lr_r - lr_t) / dm)
        return out

    def apply_G(self, r, t):
        """M(r, t) applied to the gravity forcing column at t."""
        g = self.params.lambda_switch * coupling_G(self.model, self.params, t)
        return self.matrix(r, t) @ g

    def kernel_value(self, r, t):
        """Scalar kernel F(r, t) = mu C(r) . M(r, t) lambda G(t)."""
        c = self.params.mu_switch * coupling_C(self.model, self.params, r)
        return float(c @ self.apply_G(r, t))

    def particular(self, phi, n_panels=8):
        """Y_p(r) = int_a^b M(r, t) lambda G(t) phi(t) dt as a callable.

        The quadrature splits at t = r where the kernel jumps; the scale
        ratio between r and t stays inside the integrand so nothing
        over- or underflows.
        """
        model, params = self.model, self.params
        lam = params.lambda_switch

        def integrate(lo, hi, weight_fn):
            if hi <= lo:
                return 0.0
            nodes, weights = _panel_nodes(lo, hi, n_panels, _GL32)
            return sum(w * weight_fn(t) for t, w in zip(nodes, weights))

        def yp(r):
            r = float(r)
            vl_r, ll_r = self.left_slog(r)
            vr_r, lr_r = self.right_slog(r)

            def upper(t):
                vr_t, lr_t = self.right_slog(t)
                vl_t, ll_t = self.left_slog(t)
                dm = vl_t[0] * vr_t[1] - vl_t[1] * vr_t[0]
                g = coupling_G(model, params, t)
                cross = vr_t[1] * g[0] - vr_t[0] * g[1]
                return cross * lam * float(phi(t)) * math.exp(ll_r - ll_t) / dm

            def lower(t):
                vr_t, lr_t = self.right_slog(t)
                vl_t, ll_t = self.left_slog(t)
                dm = vl_t[0] * vr_t[1] - vl_t[1] * vr_t[0]
                g = coupling_G(model, params, t)
                cross = -vl_t[1] * g[0] + vl_t[0] * g[1]
                return cross * lam * float(phi(t)) * math.exp(lr_r - lr_t) / dm

            acc = -vl_r * integrate(r, model.b, upper)
            acc = acc + vr_r * integrate(model.a, r, lower)
            return acc

        return yp

    def apply_kernel(self, phi, r, n_panels=8):
        """int_a^b F(r, t) phi(t) dt with the quadrature split at t = r."""
        total = 0.0
        for lo, hi in ((self.model.a, float(r)), (float(r), self.model.b)):
            if hi <= lo:
                continue
            nodes, weights = _panel_nodes(lo, hi, n_panels, _GL32)
            total += sum(w * self.kernel_value(r, t) * float(phi(t))
                         for t, w in zip(nodes, weights))
        return total


def greens_matrix(model, params, fundamental, bc, det_floor=1e-10):
    """Build the Green evaluator from a two-column residual fundamental.

    fundamental is an AsymptoticBasis (closed form or dense numeric) or a
    two-column ScaledMatrixSolution whose nodes contain every evaluation
    point.  bc is the PiBC pinning component j at a and component k at b.
    The scale-free solvability measure of the two-point boundary matrix
    must clear det_floor, otherwise the problem is flagged as singular.
    """
    if not isinstance(bc, PiBC):
        raise DomainError("bc must be a PiBC")
    if len(fundamental.columns) != 2:
        raise DomainError("residual Green matrix needs a two-column fundamental")
    endpoints = bc.endpoints or (model.a, model.b)
    rows_points = ((bc.j - 1, endpoints[0]), (bc.k - 1, endpoints[1]))
    mant, logs = _entry_matrices(fundamental, rows_points)
    meas = _normalized_det(mant, logs)
    if meas < det_floor:
        raise SingularBVP(
            f"two-point determinant measure {meas:.3e} below floor {det_floor:.1e}"
        )
    columns = _as_split_columns(fundamental)
    left = _null_combination(columns, mant[0], logs[0])
    right = _null_combination(columns, mant[1], logs[1])
    return GreensEvaluator(model, params, bc, left, right, meas,
                           det_floor=det_floor)


# ---------------------------------------------------------------------------
# kernel tabulation
# ---------------------------------------------------------------------------


def kernel_F(model, params, evaluator, grid=None, n_nodes=128):
    """Tabulate the scalar kernel F(r, t) on a product grid.

    The two-sided rank-one structure is vectorized with the scale ratios
    masked before exponentiation, so the table is exact up to rounding even
    when the underlying solutions span hundreds of e-folds.
    """
    if grid is None:
        grid = gauss_grid(model.a, model.b, n_nodes)
    nodes = grid.nodes
    n = len(nodes)
    VL = np.zeros((n, 2))
    LL = np.zeros(n)
    VR = np.zeros((n, 2))
    LR = np.zeros(n)
    C = np.zeros((n, 2))
    G = np.zeros((n, 2))
    for i, r in enumerate(nodes):
        VL[i], LL[i] = evaluator.left_slog(r)
        VR[i], LR[i] = evaluator.right_slog(r)
        C[i] = coupling_C(model, params, r)
        G[i] = coupling_G(model, params, r)
    dm = VL[:, 0] * VR[:, 1] - VL[:, 1] * VR[:, 0]
    scale = np.hypot(VL[:, 0], VL[:, 1]) * np.hypot(VR[:, 0], VR[:, 1])
    if np.any(~np.isfinite(dm)) or np.any(scale == 0.0) \
            or np.any(np.abs(dm) < evaluator.det_floor * scale):
        raise SingularBVP("solution pair degenerate on the kernel grid")
    lam = params.lambda_switch
    mu = params.mu_switch
    sCL = mu * np.einsum("ij,ij->i", C, VL)
    sCR = mu * np.einsum("ij,ij->i", C, VR)
    cR = lam * (VR[:, 1] * G[:, 0] - VR[:, 0] * G[:, 1])
    cL = lam * (-VL[:, 1] * G[:, 0] + VL[:, 0] * G[:, 1])
    idx = np.arange(n)
    on_upper = idx[:, None] <= idx[None, :]
    on_lower = idx[:, None] >= idx[None, :]
    exp_u = np.exp(np.where(on_upper, LL[:, None] - LL[None, :], -np.inf))
    exp_l = np.exp(np.where(on_lower, LR[:, None] - LR[None, :], -np.inf))
    F = -np.outer(sCL, cR / dm) * exp_u + np.outer(sCR, cL / dm) * exp_l
    return KernelGrid(grid=grid, F=F, Fs=None, coeffs={}, delta=None,
                      regime=params.regime, bc=(evaluator.bc.j, evaluator.bc.k))


# ---------------------------------------------------------------------------
# closed leading-order kernel
# ---------------------------------------------------------------------------

_SYMMETRIC_REGIMES = (
    "high-degree-adiabatic",
    "high-degree-exp",
    "high-degree-osc",
    "high-frequency",
)


def kernel_coefficients(model, params, regime, r):
    """Coefficient samples u, v, w, f and the stretch factor at radii r.

    u carries the buoyancy weight N^2 sqrt(rho/H)/g, f = h sqrt(H/rho) the
    forcing weight, v = f, and w = r u is the printed variant of u.  For
    the high-frequency regime the stretch factor is c/r^2; the buoyancy
    regimes use the exp or osc branch of sqrt(|1 - N^2/sigma^2|)/r.
    """
    family = _residual_family(regime)
    r = np.asarray(r, dtype=float)
    rho = np.asarray(model.rho(r), dtype=float)
    g = np.asarray(model.g(r), dtype=float)
    nsq = np.asarray(model.nsq(r), dtype=float)
    h = np.asarray(model.h(r), dtype=float)
    if family == "trig-sigma":
        H = np.asarray(model.c(r), dtype=float) / r**2
    else:
        branch = "exp" if family == "hyperbolic" else "osc"
        H = np.asarray(curly_h(model, params.sigma, r, branch=branch), dtype=float)
    u = nsq / g * np.sqrt(rho / H)
    f = h * np.sqrt(H / rho)
    return {"u": u, "v": f.copy(), "f": f, "w": r * u, "stretch": H}


def _family_phase(model, params, family):
    if family == "trig-sigma":
        return PhaseKind("frequency", model.a), params.sigma
    if family == "trig-zeta":
        return PhaseKind("buoyancy-osc", model.a), params.zeta
    return PhaseKind("buoyancy-exp", model.a), params.zeta


def _pattern_samples(model, params, regime, j, k, nodes):
    """Pattern mantissas and log scales at the grid nodes.

    Column-1 patterns (index j) are phased from a, column-2 patterns
    (index k) from b.  Hyperbolic mantissas carry log scale |phase|; the
    trigonometric families have unit scale.  The trig-sigma family uses the
    sign convention that solves the system.
    """
    family = _residual_family(regime)
    kind, rate = _family_phase(model, params, family)
    th = make_theta(model, kind, params)
    tvals = np.asarray(th(nodes), dtype=float)
    alpha = rate * tvals
    beta = rate * (tvals - float(th(model.b)))
    if family == "hyperbolic":
        pj = np.stack([_hyperbolic_pattern(j, x) for x in alpha])
        pk = np.stack([_hyperbolic_pattern(k, x) for x in beta])
        la, lb = np.abs(alpha), np.abs(beta)
    elif family == "trig-zeta":
        pj = np.stack([_trig_zeta_pattern(j, x) for x in alpha])
        pk = np.stack([_trig_zeta_pattern(k, x) for x in beta])
        la = np.zeros(len(nodes))
        lb = np.zeros(len(nodes))
    else:
        pj = np.stack([_trig_sigma_pattern(j, x, False) for x in alpha])
        pk = np.stack([_trig_sigma_pattern(k, x, False) for x in beta])
        la = np.zeros(len(nodes))
        lb = np.zeros(len(nodes))
    return pj, la, pk, lb


def _block_arrays(pj, la, pk, lb, m, n):
    """Scaled samples of the (m, n) entry of M(r) X(r, t) adj(M(t)).

    Returns (mant, logs) with logs symmetric; the diagonal sums both
    one-sided pieces, matching the indicator convention.
    """
    size = len(la)
    idx = np.arange(size)
    iu = idx[:, None] < idx[None, :]
    il = idx[:, None] > idx[None, :]
    dg = idx[:, None] == idx[None, :]
    if n == 1:
        upper = -np.outer(pj[:, m - 1], pk[:, 1])
        lower = -np.outer(pk[:, m - 1], pj[:, 1])
    else:
        upper = np.outer(pj[:, m - 1], pk[:, 0])
        lower = np.outer(pk[:, m - 1], pj[:, 0])
    mant = np.where(iu, upper, 0.0) + np.where(il, lower, 0.0) \
        + np.where(dg, upper + lower, 0.0)
    logs_u = la[:, None] + lb[None, :]
    logs_l = lb[:, None] + la[None, :]
    logs = np.where(idx[:, None] <= idx[None, :], logs_u, logs_l)
    return mant, logs


def pattern_kernel_block(model, params, regime, bc, m, n, grid=None,
                         n_nodes=64):
    """Scaled table of one indicator-split pattern product on the grid.

    The entry is E_m^T M(r) X(r, t) adj(M(t)) E_n where column 1 of M
    carries pattern bc.j phased from a and column 2 pattern bc.k phased
    from b.  Returns (mant, logs, grid) with the true value
    mant * exp(logs).
    """
    if m not in (1, 2) or n not in (1, 2):
        raise DomainError("entry indices must be 1 or 2")
    if regime not in _SYMMETRIC_REGIMES:
        raise DomainError(f"regime mismatch: no closed kernel for {regime!r}")
    if bc is None:
        bc = PiBC(1, 2)
    if grid is None:
        grid = gauss_grid(model.a, model.b, n_nodes)
    pj, la, pk, lb = _pattern_samples(model, params, regime, bc.j, bc.k,
                                      grid.nodes)
    mant, logs = _block_arrays(pj, la, pk, lb, m, n)
    return mant, logs, grid


def symmetric_kernel(model, params, regime, bc=None, grid=None, n_nodes=128,
                     a12_as_printed=False):
    """Closed leading-order kernel table with its coefficient products.

    The kernel is kappa/Delta times the sum over entries (m, n) of
    (rate/sigma^2)^(n-m) A_mn(r, t) times the pattern block, with
    A_11 = u(r) v(t), A_12 = -u(r) u(t), A_21 = f(r) f(t) and
    A_22 = -f(r) u(t); rate is the buoyancy parameter for the high-degree
    regimes and sigma itself at high frequency.  a12_as_printed=True swaps
    A_12 for -w(r) w(t) with w = r u; that variant keeps the symmetry but
    not the 1/rate agreement with the true kernel.
    """
    if regime not in _SYMMETRIC_REGIMES:
        raise DomainError(f"regime mismatch: no closed kernel for {regime!r}")
    if bc is None:
        bc = PiBC(1, 2)
    if grid is None:
        grid = gauss_grid(model.a, model.b, n_nodes)
    family = _residual_family(regime)
    rate = params.sigma if family == "trig-sigma" else params.zeta
    sgn_d, log_d = residual_delta(model, params, regime, bc.j, bc.k,
                                  as_printed=False)
    if sgn_d == 0.0:
        raise SingularBVP("pattern determinant vanishes for this pair")
    nodes = grid.nodes
    pj, la, pk, lb = _pattern_samples(model, params, regime, bc.j, bc.k, nodes)
    co = kernel_coefficients(model, params, regime, nodes)
    u, f, w = co["u"], co["f"], co["w"]
    products = {
        (1, 1): np.outer(u, co["v"]),
        (1, 2): -np.outer(w, w) if a12_as_printed else -np.outer(u, u),
        (2, 1): np.outer(f, f),
        (2, 2): -np.outer(f, u),
    }
    base = params.mu_switch * params.lambda_switch * model.kappa * sgn_d
    s2 = params.sigma**2
    Fs = np.zeros((len(nodes), len(nodes)))
    for (m, n), prod in products.items():
        mant, logs = _block_arrays(pj, la, pk, lb, m, n)
        Fs += base * (rate / s2) ** (n - m) * prod * mant * np.exp(logs - log_d)
    return KernelGrid(grid=grid, F=None, Fs=Fs, coeffs=co,
                      delta=(sgn_d, log_d), regime=regime, bc=(bc.j, bc.k))


def delta_pair_report(model, params, regime="high-degree-exp"):
    """Report the pattern determinant against (e^x - 1)/2 per pattern pair.

    x is the full phase rate * Theta(b).  Returns, for each (j, k), the log
    determinant, the log bound, the slack, and whether the bound is met.
    """
    family = _residual_family(regime)
    if family != "hyperbolic":
        raise DomainError("the determinant lower bound is a hyperbolic-family statement")
    kind, rate = _family_phase(model, params, family)
    x = rate * phase_total(model, kind, params)
    if x <= 0.0:
        raise DomainError("the phase across the interval must be positive")
    log_bound = x + math.log1p(-math.exp(-x)) - math.log(2.0)
    report = {}
    for j in (1, 2):
        for k in (1, 2):
            sgn, lm = residual_delta(model, params, regime, j, k)
            report[(j, k)] = {
                "log_delta": lm,
                "log_bound": log_bound,
                "slack": lm - log_bound,
                "attains": sgn != 0.0 and lm >= log_bound - 1e-12,
            }
    return report
