"""Equilibrium coefficient profiles on a radius interval [a, b].

A model carries the density rho, sound speed c, gravity g and the coupling
constant kappa as closed-form numpy-vectorized closures.  The buoyancy
frequency is always derived from the definition N^2 = -g*(g/c^2 + rho'/rho);
the adiabatic case is the identity g/c^2 = -rho'/rho, which makes N^2 vanish.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegeneracyError, DomainError

TOL_MODEL = 1e-12
TOL_TURNING = 1e-6
_FD_STEP = 1e-4
_FD_TOL = 1e-6


@dataclass(frozen=True)
class StellarModel:
    a: float
    b: float
    rho: Callable
    rho_prime: Callable
    c: Callable
    g: Callable
    kappa: float = 1.0
    adiabatic: bool = False
    nsq_sign: str = "unknown"

    def nsq(self, r):
        """Buoyancy frequency squared, N^2 = -g*(g/c^2 + rho'/rho)."""
        r = np.asarray(r, dtype=float)
        gv = self.g(r)
        return -gv * (gv / self.c(r) ** 2 + self.rho_prime(r) / self.rho(r))

    def h(self, r):
        """Coefficient h = r^2 rho / c^2."""
        r = np.asarray(r, dtype=float)
        return r * r * self.rho(r) / self.c(r) ** 2

    def length_scale(self, kind="frequency"):
        """L = integral of 1/c (frequency kind) or 1/t (degree kind)."""
        from .asymptotics import theta, PhaseKind

        return theta(self, PhaseKind(kind, self.a), None, self.b)


@dataclass(frozen=True)
class CoefficientSample:
    r: float
    rho: float
    c: float
    g: float
    nsq: float
    h: float
    curlyH_exp: float | None
    curlyH_osc: float | None


def _validation_grid(a, b, n=201):
    return np.linspace(a, b, n)


def _check_derivative(rho, rho_prime, grid):
    # central finite difference on interior points, relative tolerance
    interior = grid[1:-1]
    step = _FD_STEP * (grid[-1] - grid[0])
    fd = (rho(interior + step) - rho(interior - step)) / (2.0 * step)
    claimed = rho_prime(interior)
    scale = np.maximum(np.abs(claimed), np.abs(fd))
    bad = np.abs(fd - claimed) > _FD_TOL * np.maximum(scale, 1e-300)
    if np.any(bad):
        worst = np.max(np.abs(fd - claimed) / np.maximum(scale, 1e-300))
        raise DomainError(
            "rho_prime disagrees with finite differences of rho "
            f"(worst relative gap {worst:.3e})"
        )


def _check_positive(fn, grid, name):
    vals = np.asarray(fn(grid), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DomainError(f"{name} is not finite everywhere on [a, b]")
    if np.any(vals <= 0.0):
        raise DomainError(f"{name} must be positive on [a, b]")


def _classify_nsq(model, grid):
    vals = model.nsq(grid)
    scale = np.max(np.abs(model.g(grid)) * (
        np.abs(model.g(grid)) / model.c(grid) ** 2
        + np.abs(model.rho_prime(grid) / model.rho(grid))
    ))
    if np.all(np.abs(vals) < TOL_MODEL * max(scale, 1.0)):
        return "zero"
    if np.all(vals > 0.0):
        return "positive"
    if np.all(vals < 0.0):
        return "negative"
    return "mixed"


def make_adiabatic_model(rho, rho_prime, c, a, b, kappa=1.0):
    """Model with g = -c^2 rho'/rho so that N^2 vanishes identically."""
    if not (0.0 < a < b):
        raise DomainError("require 0 < a < b")
    if kappa <= 0.0:
        raise DomainError("kappa must be positive")
    grid = _validation_grid(a, b)
    _check_positive(rho, grid, "rho")
    _check_positive(c, grid, "c")
    _check_derivative(rho, rho_prime, grid)
    if np.any(np.asarray(rho_prime(grid)) >= 0.0):
        raise DomainError("rho' >= 0 somewhere on the grid: g would be nonpositive")

    def g(r):
        r = np.asarray(r, dtype=float)
        return -c(r) ** 2 * rho_prime(r) / rho(r)

    model = StellarModel(a, b, rho, rho_prime, c, g, kappa, True, "zero")
    sign = _classify_nsq(model, grid)
    if sign != "zero":
        raise DomainError("adiabatic construction produced nonzero N^2")
    return model


def make_nonadiabatic_model(rho, rho_prime, c, g, a, b, kappa=1.0):
    """Model with independently supplied gravity; N^2 from the definition."""
    if not (0.0 < a < b):
        raise DomainError("require 0 < a < b")
    if kappa <= 0.0:
        raise DomainError("kappa must be positive")
    grid = _validation_grid(a, b)
    _check_positive(rho, grid, "rho")
    _check_positive(c, grid, "c")
    _check_positive(g, grid, "g")
    _check_derivative(rho, rho_prime, grid)
    probe = StellarModel(a, b, rho, rho_prime, c, g, kappa, False, "unknown")
    if not np.all(np.isfinite(probe.nsq(grid))):
        raise DomainError("derived N^2 is not finite on the grid")
    sign = _classify_nsq(probe, grid)
    return StellarModel(a, b, rho, rho_prime, c, g, kappa, False, sign)


def sample(model, sigma, r):
    """All derived coefficients at one radius, for a given frequency."""
    if sigma is not None and sigma <= 0.0:
        raise DomainError("sigma must be positive")
    if r < model.a or r > model.b:
        raise DomainError(f"radius {r} outside [{model.a}, {model.b}]")
    nsq = float(model.nsq(r))
    exp_part = None
    osc_part = None
    if sigma is not None:
        if abs(nsq - sigma**2) < TOL_TURNING:
            raise DegeneracyError(
                f"turning point: |N^2 - sigma^2| = {abs(nsq - sigma**2):.3e} at r = {r}"
            )
        ratio = nsq / sigma**2
        if ratio < 1.0:
            exp_part = np.sqrt(1.0 - ratio) / r
        else:
            osc_part = np.sqrt(ratio - 1.0) / r
    return CoefficientSample(
        r=float(r),
        rho=float(model.rho(r)),
        c=float(model.c(r)),
        g=float(model.g(r)),
        nsq=nsq,
        h=float(model.h(r)),
        curlyH_exp=exp_part,
        curlyH_osc=osc_part,
    )


def curly_h(model, sigma, r, branch="auto"):
    """Vectorized curly-H: sqrt(|1 - N^2/sigma^2|)/r on the requested branch."""
    r = np.asarray(r, dtype=float)
    ratio = model.nsq(r) / sigma**2
    if branch == "exp" or (branch == "auto" and np.all(ratio < 1.0)):
        if np.any(ratio >= 1.0):
            raise DegeneracyError("exp branch requested but N^2 >= sigma^2 somewhere")
        return np.sqrt(1.0 - ratio) / r
    if branch == "osc" or (branch == "auto" and np.all(ratio > 1.0)):
        if np.any(ratio <= 1.0):
            raise DegeneracyError("osc branch requested but N^2 <= sigma^2 somewhere")
        return np.sqrt(ratio - 1.0) / r
    raise DegeneracyError("N^2 - sigma^2 changes sign on the requested radii")


# ---------------------------------------------------------------------------
# shipped presets and the config-file profile catalog
# ---------------------------------------------------------------------------


def preset(name):
    if name == "adia-exp":
        return make_adiabatic_model(
            rho=lambda r: np.exp(-(np.asarray(r, dtype=float) - 1.0)),
            rho_prime=lambda r: -np.exp(-(np.asarray(r, dtype=float) - 1.0)),
            c=lambda r: np.ones_like(np.asarray(r, dtype=float)),
            a=1.0,
            b=2.0,
            kappa=1.0,
        )
    if name == "nonadia-exp":
        return make_nonadiabatic_model(
            rho=lambda r: np.exp(-2.0 * (np.asarray(r, dtype=float) - 1.0)),
            rho_prime=lambda r: -2.0 * np.exp(-2.0 * (np.asarray(r, dtype=float) - 1.0)),
            c=lambda r: np.ones_like(np.asarray(r, dtype=float)),
            g=lambda r: np.ones_like(np.asarray(r, dtype=float)),
            a=1.0,
            b=2.0,
            kappa=1.0,
        )
    raise DomainError(f"unknown preset {name!r}")


def _profile_from_family(spec, a):
    kind = spec.get("kind")
    if kind == "exponential":
        amp = float(spec.get("amplitude", 1.0))
        decay = float(spec["decay"])
        fn = lambda r: amp * np.exp(-decay * (np.asarray(r, dtype=float) - a))
        dfn = lambda r: -decay * amp * np.exp(-decay * (np.asarray(r, dtype=float) - a))
        return fn, dfn
    if kind == "power-law":
        amp = float(spec.get("amplitude", 1.0))
        power = float(spec["power"])
        fn = lambda r: amp * np.asarray(r, dtype=float) ** power
        dfn = lambda r: amp * power * np.asarray(r, dtype=float) ** (power - 1.0)
        return fn, dfn
    if kind == "constant":
        value = float(spec["value"])
        fn = lambda r: value * np.ones_like(np.asarray(r, dtype=float))
        dfn = lambda r: np.zeros_like(np.asarray(r, dtype=float))
        return fn, dfn
    raise DomainError(f"unknown profile family {kind!r}")


def model_from_config(cfg):
    """Build a model from a config mapping (see the cli module for schema).

    Either {"preset": name} or a profile description with families drawn from
    a fixed catalog (exponential, power-law, constant) for rho and c, and for
    g either a family or the tag "derived-adiabatic".
    """
    if "preset" in cfg:
        return preset(cfg["preset"])
    a = float(cfg["a"])
    b = float(cfg["b"])
    kappa = float(cfg.get("kappa", 1.0))
    rho, rho_prime = _profile_from_family(cfg["rho"], a)
    c, _ = _profile_from_family(cfg["c"], a)
    g_spec = cfg.get("g", "derived-adiabatic")
    if g_spec == "derived-adiabatic":
        return make_adiabatic_model(rho, rho_prime, c, a, b, kappa)
    g, _ = _profile_from_family(g_spec, a)
    return make_nonadiabatic_model(rho, rho_prime, c, g, a, b, kappa)
