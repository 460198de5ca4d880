"""Linear-system propagation with per-column rescaling, plus quadrature
helpers and integration self-checks.

Columns of a fundamental matrix can swing over hundreds of orders of
magnitude across the shell, so each column is carried as a unit-ish raw
vector together with an accumulated log scale factor.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepFailure
from .slog import slog_det_columns
from .systems import assemble_full_matrix, assemble_lw_matrix, assemble_residual_matrix

RESCALE_LO = 1e-4
RESCALE_HI = 1e4

_GL16 = np.polynomial.legendre.leggauss(16)
_GL64 = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class Grid:
    """Nodes spanning an interval plus quadrature weights for L2 products."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 2 or np.any(np.diff(nodes) <= 0.0):
            raise ValueError("grid nodes must be strictly increasing")
        if np.any(weights <= 0.0) or len(weights) != len(nodes):
            raise ValueError("grid weights must be positive, one per node")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def a(self):
        return float(self.nodes[0])

    @property
    def b(self):
        return float(self.nodes[-1])


def _clenshaw_curtis(n):
    """Weights on [-1, 1] for the n Chebyshev points cos(pi k / (n-1))."""
    m = n - 1
    theta = np.pi * np.arange(n) / m
    w = np.zeros(n)
    v = np.ones(n - 2)
    if m % 2 == 0:
        w[0] = w[-1] = 1.0 / (m * m - 1.0)
        for k in range(1, m // 2):
            v -= 2.0 * np.cos(2.0 * k * theta[1:-1]) / (4.0 * k * k - 1.0)
        v -= np.cos(m * theta[1:-1]) / (m * m - 1.0)
    else:
        w[0] = w[-1] = 1.0 / (m * m)
        for k in range(1, (m - 1) // 2 + 1):
            v -= 2.0 * np.cos(2.0 * k * theta[1:-1]) / (4.0 * k * k - 1.0)
    w[1:-1] = 2.0 * v / m
    return w


def chebyshev_grid(a, b, n=257):
    """Endpoint-clustered default grid with Clenshaw-Curtis weights."""
    if not (a < b):
        raise ValueError("need a < b")
    theta = np.pi * np.arange(n) / (n - 1)
    nodes = a + 0.5 * (b - a) * (1.0 - np.cos(theta))
    # CC weights are symmetric, so the orientation flip does not reorder them
    weights = 0.5 * (b - a) * _clenshaw_curtis(n)
    return Grid(nodes=nodes, weights=weights)


def system_matrix(model, params, which="full", as_printed=True):
    """Return A(r) as a callable for the requested frame."""
    if which == "full":
        return lambda r: assemble_full_matrix(model, params, r)
    if which == "residual":
        return lambda r: assemble_residual_matrix(model, params, r)
    if which == "lw":
        return lambda r: assemble_lw_matrix(model, params, r, as_printed=as_printed)
    raise ValueError(f"unknown system {which!r}")


@dataclass(frozen=True)
class ColumnTrajectory:
    """One column on a node set: raw vectors plus log scale per node."""

    nodes: np.ndarray
    values: np.ndarray
    logscale: np.ndarray
    renorms: int = 0

    def slog_at(self, i):
        return self.values[i], float(self.logscale[i])

    def at(self, i):
        return self.values[i] * np.exp(self.logscale[i])


@dataclass(frozen=True)
class ScaledMatrixSolution:
    """Several columns propagated on a shared node set.

    det_signs / det_logs, when present, carry the determinant accumulated
    through per-segment QR factors; that route stays accurate even when the
    stored column directions align to machine precision.
    """

    nodes: np.ndarray
    columns: tuple
    det_signs: np.ndarray | None = None
    det_logs: np.ndarray | None = None
    tag: str = ""

    @property
    def dim(self):
        return self.columns[0].values.shape[1]

    @property
    def renorm_count(self):
        return sum(c.renorms for c in self.columns)

    def matrix_at(self, i, rescale=True):
        cols = [c.at(i) if rescale else c.values[i] for c in self.columns]
        return np.stack(cols, axis=1)

    def det_slog(self, i):
        """Sign and log magnitude of det at node i (square solutions only)."""
        if self.det_logs is not None:
            return float(self.det_signs[i]), float(self.det_logs[i])
        return self.det_slog_from_columns(i)

    def det_slog_from_columns(self, i):
        """Determinant straight from stored directions and column scales."""
        raw = np.stack([c.values[i] for c in self.columns], axis=1)
        logs = np.array([c.logscale[i] for c in self.columns])
        return slog_det_columns(raw, logs)


def propagate_column(afun, nodes, x0, rtol=1e-10, atol=1e-10, logscale0=0.0):
    """Carry one column node to node, renormalizing when it leaves
    [1e-4, 1e4] in euclidean norm."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    logs = float(logscale0)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        raise ValueError("zero initial column")
    if not (RESCALE_LO < nrm < RESCALE_HI):
        x /= nrm
        logs += np.log(nrm)
    values = np.empty((len(nodes), len(x)))
    logscale = np.empty(len(nodes))
    values[0] = x
    logscale[0] = logs
    renorms = 0
    rhs = lambda r, v: afun(r) @ v
    for i in range(len(nodes) - 1):
        seg = solve_ivp(rhs, (nodes[i], nodes[i + 1]), x, method="DOP853",
                        rtol=rtol, atol=atol, dense_output=False)
        if not seg.success:
            raise StepFailure(f"integration failed near r = {nodes[i]:.6g}: {seg.message}")
        x = seg.y[:, -1].copy()
        nrm = np.linalg.norm(x)
        if not (RESCALE_LO < nrm < RESCALE_HI):
            x /= nrm
            logs += np.log(nrm)
            renorms += 1
        values[i + 1] = x
        logscale[i + 1] = logs
    return ColumnTrajectory(nodes=nodes, values=values, logscale=logscale,
                            renorms=renorms)


def _qr_det_track(afun, nodes, inits, rtol, atol):
    """Per-node slog determinant of the solution started at inits.

    Carries an orthonormal frame across each internode segment and absorbs
    the segment growth through a QR factor, so the determinant survives
    arbitrarily stiff column alignment.
    """
    n = inits.shape[0]
    q, r0 = np.linalg.qr(inits)
    sign = float(np.sign(np.linalg.det(q)) * np.prod(np.sign(np.diag(r0))))
    logmag = float(np.sum(np.log(np.abs(np.diag(r0)))))
    signs = np.empty(len(nodes))
    logs = np.empty(len(nodes))
    signs[0], logs[0] = sign, logmag
    rhs = lambda r, v: (afun(r) @ v.reshape(n, n)).ravel()
    for i in range(len(nodes) - 1):
        seg = solve_ivp(rhs, (nodes[i], nodes[i + 1]), q.ravel(), method="DOP853",
                        rtol=rtol, atol=atol, dense_output=False)
        if not seg.success:
            raise StepFailure(f"integration failed near r = {nodes[i]:.6g}: {seg.message}")
        w = seg.y[:, -1].reshape(n, n)
        q_new, r_seg = np.linalg.qr(w)
        # det of the segment propagator restricted to the carried frame
        sign *= float(np.sign(np.linalg.det(q_new)) * np.sign(np.linalg.det(q))
                      * np.prod(np.sign(np.diag(r_seg))))
        logmag += float(np.sum(np.log(np.abs(np.diag(r_seg)))))
        q = q_new
        signs[i + 1], logs[i + 1] = sign, logmag
    return signs, logs


def integrate_fundamental(model, params, which="full", nodes=None, inits=None,
                          rtol=1e-10, atol=1e-10, as_printed=True, track_det=True):
    """Propagate a basis of columns for the requested system.

    inits defaults to the identity.  nodes default to the 257-point
    endpoint-clustered grid; descending nodes integrate inward.  For square
    inits the determinant is tracked segment by segment unless disabled.
    """
    afun = system_matrix(model, params, which, as_printed=as_printed)
    dim = 2 if which == "residual" else 4
    if nodes is None:
        nodes = chebyshev_grid(model.a, model.b, 257).nodes
    nodes = np.asarray(nodes, dtype=float)
    if inits is None:
        inits = np.eye(dim)
    inits = np.asarray(inits, dtype=float)
    if inits.ndim == 1:
        inits = inits[:, None]
    cols = tuple(propagate_column(afun, nodes, inits[:, j], rtol=rtol, atol=atol)
                 for j in range(inits.shape[1]))
    det_signs = det_logs = None
    if track_det and inits.shape[0] == inits.shape[1]:
        det_signs, det_logs = _qr_det_track(afun, nodes, inits, rtol, atol)
    return ScaledMatrixSolution(nodes=nodes, columns=cols,
                                det_signs=det_signs, det_logs=det_logs,
                                tag=which)


def solve_linear_ivp(afun, r_span, x0, r_eval=None, rtol=1e-10, atol=1e-10):
    """Unscaled convenience wrapper returning the scipy result with dense output."""
    rhs = lambda r, v: afun(r) @ v
    sol = solve_ivp(rhs, r_span, np.asarray(x0, dtype=float), method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True, t_eval=r_eval)
    if not sol.success:
        raise StepFailure(f"integration failed: {sol.message}")
    return sol


def ode_defect(sol, afun, n_check=101):
    """Max over check points of |X' - A X| / (1 + |X|), X' from central
    differences of the dense interpolant."""
    t0, t1 = sol.t[0], sol.t[-1]
    ts = np.linspace(t0, t1, n_check + 2)[1:-1]
    h = 1e-6 * abs(t1 - t0)
    worst = 0.0
    for t in ts:
        x = sol.sol(t)
        dx = (sol.sol(t + h) - sol.sol(t - h)) / (2.0 * h)
        res = np.linalg.norm(dx - afun(t) @ x) / (1.0 + np.linalg.norm(x))
        worst = max(worst, res)
    return worst


# ---------------------------------------------------------------------------
# quadrature helpers
# ---------------------------------------------------------------------------


def _panel_nodes(a, b, n_panels, rule):
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    xs, ws = rule
    edges = np.linspace(a, b, n_panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(0.5 * (lo + hi) + half * xs)
        weights.append(half * ws)
    return np.concatenate(nodes), np.concatenate(weights)


def quad_gl(fn, a, b, n_panels=8):
    nodes, weights = _panel_nodes(a, b, n_panels, _GL64)
    return float(np.dot(weights, fn(nodes)))


def _on_grid(f, grid):
    return np.asarray(f(grid.nodes) if callable(f) else f, dtype=float)


def l2_inner(f, g, a, b=None, n_panels=8):
    """Inner product over an interval (callables) or a Grid (third argument)."""
    if isinstance(a, Grid):
        return float(np.dot(a.weights, _on_grid(f, a) * _on_grid(g, a)))
    nodes, weights = _panel_nodes(a, b, n_panels, _GL64)
    return float(np.dot(weights, np.asarray(f(nodes)) * np.asarray(g(nodes))))


def l2_norm(f, a, b=None, n_panels=8):
    return float(np.sqrt(max(l2_inner(f, f, a, b, n_panels=n_panels), 0.0)))


def sup_norm(f, a, b=None, n=2001):
    """Max of |f|; on a Grid one refinement pass samples around the argmax."""
    if isinstance(a, Grid):
        grid = a
        vals = np.abs(_on_grid(f, grid))
        best = float(np.max(vals))
        if callable(f):
            k = int(np.argmax(vals))
            lo = grid.nodes[max(k - 1, 0)]
            hi = grid.nodes[min(k + 1, len(grid.nodes) - 1)]
            fine = np.abs(np.asarray(f(np.linspace(lo, hi, 33)), dtype=float))
            best = max(best, float(np.max(fine)))
        return best
    r = np.linspace(a, b, n)
    return float(np.max(np.abs(f(r))))


# ---------------------------------------------------------------------------
# integration self-check
# ---------------------------------------------------------------------------


def trace_integral_cumulative(afun, nodes):
    """Cumulative integral of tr A between consecutive nodes (16-pt GL each)."""
    xs, ws = _GL16
    out = np.zeros(len(nodes))
    acc = 0.0
    for i in range(len(nodes) - 1):
        lo, hi = nodes[i], nodes[i + 1]
        half = 0.5 * (hi - lo)
        pts = 0.5 * (lo + hi) + half * xs
        acc += half * float(np.dot(ws, [np.trace(afun(p)) for p in pts]))
        out[i + 1] = acc
    return out


def liouville_defect(solution, afun):
    """Max gap between log |det Y| growth and the cumulative trace integral.

    For a square fundamental solution this is the standard determinant
    identity; the gap approximates the relative determinant error.
    """
    nodes = solution.nodes
    trints = trace_integral_cumulative(afun, nodes)
    _, logdet0 = solution.det_slog(0)
    worst = 0.0
    for i in range(len(nodes)):
        _, logdet = solution.det_slog(i)
        gap = abs((logdet - logdet0) - trints[i])
        worst = max(worst, gap)
    return worst
