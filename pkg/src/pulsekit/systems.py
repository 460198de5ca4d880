"""Coefficient matrices of the coupled system, its residual part, and the
pressure-variable reformulation, plus state-frame conversions.

The coupled first-order system acts on X = (u, eta, phi, dphi).  Rows 1-2
carry the residual block and the coupling column lambda*G; row 3 defines
dphi; row 4 is the potential equation written in first-order form,
(r^2 phi')' - (Lambda - kappa*h) phi = mu * C . Y.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .model import StellarModel

REGIMES = (
    "high-degree-adiabatic",
    "high-degree-exp",
    "high-degree-osc",
    "high-frequency",
    "mixed-i",
    "mixed-ii",
)


@dataclass(frozen=True)
class ModeParams:
    zeta: float
    Lambda: float
    sigma: float
    lambda_switch: float = 1.0
    mu_switch: float = 1.0
    regime: str = "high-degree-adiabatic"
    z: float = 0.0
    alpha: float = 0.5

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise DomainError("sigma must be positive")
        if self.zeta <= 0.0:
            raise DomainError("zeta must be positive")
        if self.Lambda < 0.0:
            raise DomainError("Lambda must be nonnegative")
        if self.regime not in REGIMES:
            raise DomainError(f"unknown regime {self.regime!r}")


def mode_params(model, regime, zeta=None, sigma=None, Lambda=None,
                lambda_switch=1.0, mu_switch=1.0, z=0.0, alpha=0.5):
    """Build ModeParams with the regime's parametrization and consistency checks.

    high-degree regimes:  Lambda = zeta^2, sigma fixed.
    high-frequency:       sigma is the large parameter (zeta tracks it),
                          Lambda fixed (defaults to 2, the lowest degree).
    mixed-i:              Lambda = zeta^2, sigma^2 = z*zeta.
    mixed-ii:             Lambda = z*zeta^(3/2), sigma = zeta.
    """
    grid = np.linspace(model.a, model.b, 201)
    nsq = model.nsq(grid)
    if regime == "high-degree-adiabatic":
        if zeta is None:
            raise DomainError("zeta required")
        sigma = 1.0 if sigma is None else sigma
        Lambda = zeta**2 if Lambda is None else Lambda
        if not model.adiabatic:
            raise DomainError("adiabatic regime needs an adiabatic model")
    elif regime == "high-degree-exp":
        if zeta is None or sigma is None:
            raise DomainError("zeta and sigma required")
        Lambda = zeta**2 if Lambda is None else Lambda
        if not np.all(nsq < sigma**2):
            raise DomainError("exponential regime needs N^2 < sigma^2 on [a, b]")
        if not np.all(nsq > 0.0):
            raise DomainError("exponential regime needs N^2 > 0 on [a, b]")
    elif regime == "high-degree-osc":
        if zeta is None or sigma is None:
            raise DomainError("zeta and sigma required")
        Lambda = zeta**2 if Lambda is None else Lambda
        if not np.all(nsq > sigma**2):
            raise DomainError("oscillatory regime needs N^2 > sigma^2 on [a, b]")
    elif regime == "high-frequency":
        if sigma is None:
            raise DomainError("sigma required")
        zeta = sigma if zeta is None else zeta
        Lambda = 2.0 if Lambda is None else Lambda
    elif regime == "mixed-i":
        if zeta is None or z <= 0.0:
            raise DomainError("zeta and positive z required")
        Lambda = zeta**2
        sigma = np.sqrt(z * zeta)
    elif regime == "mixed-ii":
        if zeta is None or z <= 0.0:
            raise DomainError("zeta and positive z required")
        Lambda = z * zeta**1.5
        sigma = zeta
    else:
        raise DomainError(f"unknown regime {regime!r}")
    return ModeParams(zeta=float(zeta), Lambda=float(Lambda), sigma=float(sigma),
                      lambda_switch=float(lambda_switch), mu_switch=float(mu_switch),
                      regime=regime, z=float(z), alpha=float(alpha))


@dataclass(frozen=True)
class StateVector:
    u: float
    eta: float
    phi: float
    dphi: float

    @property
    def Y(self):
        return np.array([self.u, self.eta])

    @property
    def Phi(self):
        return np.array([self.phi, self.dphi])

    def as_array(self):
        return np.array([self.u, self.eta, self.phi, self.dphi])

    @classmethod
    def from_array(cls, x):
        return cls(*(float(v) for v in np.asarray(x).ravel()))


# ---------------------------------------------------------------------------
# coefficient matrices
# ---------------------------------------------------------------------------


def coupling_G(model, params, r):
    """Forcing direction G = (r^2/c^2, -N^2/(sigma^2 g)); multiplies phi."""
    r = np.asarray(r, dtype=float)
    c2 = model.c(r) ** 2
    return np.array([r * r / c2,
                     -model.nsq(r) / (params.sigma**2 * model.g(r))])

def coupling_C(model, params, r):
    """Row vector C = (kappa N^2 rho / g, sigma^2 kappa h); multiplies Y."""
    r = np.asarray(r, dtype=float)
    k = model.kappa
    return np.array([k * model.nsq(r) * model.rho(r) / model.g(r),
                     params.sigma**2 * k * model.h(r)])


def assemble_residual_matrix(model, params, r):
    """The 2x2 block acting on (u, eta)."""
    nsq = float(model.nsq(r))
    c2 = float(model.c(r)) ** 2
    g = float(model.g(r))
    s2 = params.sigma**2
    return np.array([
        [g / c2, params.Lambda - s2 * r * r / c2],
        [(1.0 - nsq / s2) / (r * r), nsq / g],
    ])


def assemble_full_matrix(model, params, r):
    """The 4x4 matrix acting on (u, eta, phi, dphi).

    Row 4 implements (r^2 phi')' - (Lambda - kappa h) phi = mu * C . Y, i.e.
    corner (Lambda - kappa h)/r^2 and the C row divided by r^2.
    """
    A = np.zeros((4, 4))
    A[:2, :2] = assemble_residual_matrix(model, params, r)
    G = coupling_G(model, params, r)
    A[0, 2] = params.lambda_switch * G[0]
    A[1, 2] = params.lambda_switch * G[1]
    A[2, 3] = 1.0
    C = coupling_C(model, params, r)
    h = float(model.h(r))
    A[3, 0] = params.mu_switch * C[0] / (r * r)
    A[3, 1] = params.mu_switch * C[1] / (r * r)
    A[3, 2] = (params.Lambda - model.kappa * h) / (r * r)
    A[3, 3] = -2.0 / r
    return A


def assemble_lw_matrix(model, params, r, as_printed=True):
    """Matrix for the pressure frame (u, y, phi, dphi) with y = sigma^2 eta - phi.

    as_printed=True reproduces the displayed entries, including the (1,3)
    entry lambda*Lambda^2/sigma^2 and the (2,4) entry +lambda.  as_printed=False
    returns the exact conjugation T A T^{-1} of the coupled matrix, which
    differs in those two entries (Lambda/sigma^2 and -1 at lambda = 1) and in
    the mu-dependence of the (4,3) corner.
    """
    nsq = float(model.nsq(r))
    rho = float(model.rho(r))
    c2 = float(model.c(r)) ** 2
    g = float(model.g(r))
    s2 = params.sigma**2
    lam = params.lambda_switch
    mu = params.mu_switch
    L = params.Lambda
    k = model.kappa
    h = float(model.h(r))
    A = np.zeros((4, 4))
    A[0, 0] = g / c2
    A[0, 1] = L / s2 - r * r / c2
    A[1, 0] = (s2 - nsq) / (r * r)
    A[1, 1] = nsq / g
    A[2, 3] = 1.0
    A[3, 0] = mu * k * nsq * rho / (r * r * g)
    A[3, 3] = -2.0 / r
    if as_printed:
        A[0, 2] = lam * L**2 / s2
        A[1, 3] = lam
        A[3, 1] = mu * k * rho / c2
        A[3, 2] = L / (r * r)
    else:
        A[0, 2] = L / s2 + (lam - 1.0) * r * r / c2
        A[1, 2] = (1.0 - lam) * nsq / g
        A[1, 3] = -1.0
        A[3, 1] = mu * k * h / (r * r)
        A[3, 2] = (L - (1.0 - mu) * k * h) / (r * r)
    return A


def _lw_T(sigma):
    T = np.eye(4)
    T[1, 1] = sigma**2
    T[1, 2] = -1.0
    return T


def es_to_lw(state, sigma):
    """Replace the eta slot by y = sigma^2 eta - phi."""
    return replace(state, eta=sigma**2 * state.eta - state.phi)


def lw_to_es(state, sigma):
    """Inverse of es_to_lw: eta = (y + phi)/sigma^2."""
    return replace(state, eta=(state.eta + state.phi) / sigma**2)


def lw_matrix_conjugacy_gap(model, params, r, as_printed):
    """Max-norm gap between T A T^{-1} and the requested pressure-frame matrix.

    Exposed so both variants' residuals can be recorded side by side.
    """
    T = _lw_T(params.sigma)
    A = assemble_full_matrix(model, params, r)
    conj = T @ A @ np.linalg.inv(T)
    B = assemble_lw_matrix(model, params, r, as_printed=as_printed)
    return float(np.max(np.abs(conj - B)))
