"""Sign/log scaled arithmetic for quantities far outside float range.

A scaled value is a pair (sign, logmag) with sign in {-1.0, 0.0, +1.0} and
logmag = log|x| (logmag = -inf when sign = 0).  Determinants of matrices whose
entries carry per-entry exponents are expanded over permutations and combined
with a signed log-sum-exp, so magnitudes like e^(zeta*L) with zeta*L in the
hundreds never materialize as floats.
"""

import itertools
import math

import numpy as np
from scipy.special import logsumexp

NEG_INF = -math.inf


def slog_of(x):
    """Scaled representation (sign, logmag) of a finite float."""
    if x == 0.0:
        return 0.0, NEG_INF
    return math.copysign(1.0, x), math.log(abs(x))


def slog_float(sign, logmag):
    """Back to an ordinary float; overflows to +-inf rather than raising."""
    if sign == 0.0 or logmag == NEG_INF:
        return 0.0
    if logmag > 709.0:
        return math.inf * sign
    return sign * math.exp(logmag)


def slog_mul(a, b):
    sa, la = a
    sb, lb = b
    s = sa * sb
    if s == 0.0:
        return 0.0, NEG_INF
    return s, la + lb


def slog_sum(signs, logs):
    """Signed log-sum-exp of many scaled terms; returns (sign, logmag)."""
    signs = np.asarray(signs, dtype=float)
    logs = np.asarray(logs, dtype=float)
    mask = signs != 0.0
    if not np.any(mask):
        return 0.0, NEG_INF
    total, sign = logsumexp(logs[mask], b=signs[mask], return_sign=True)
    if sign == 0.0:
        return 0.0, NEG_INF
    return float(sign), float(total)


def slog_det(mantissa, logexp):
    """Determinant of a small matrix with per-entry scale factors.

    The matrix entries are mantissa[i, j] * exp(logexp[i, j]).  Expansion over
    all n! permutations (n <= 4 in this library) with signed log-sum-exp keeps
    everything in scaled form.
    """
    mantissa = np.asarray(mantissa, dtype=float)
    logexp = np.asarray(logexp, dtype=float)
    n = mantissa.shape[0]
    term_signs = []
    term_logs = []
    for perm in itertools.permutations(range(n)):
        parity = 1.0
        seen = list(perm)
        # count inversions for the permutation sign
        inv = sum(
            1
            for i in range(n)
            for j in range(i + 1, n)
            if seen[i] > seen[j]
        )
        parity = -1.0 if inv % 2 else 1.0
        s = parity
        l = 0.0
        for i in range(n):
            v = mantissa[i, perm[i]]
            if v == 0.0:
                s = 0.0
                break
            s *= math.copysign(1.0, v)
            l += math.log(abs(v)) + logexp[i, perm[i]]
        if s != 0.0:
            term_signs.append(s)
            term_logs.append(l)
    return slog_sum(term_signs, term_logs)


def slog_det_columns(directions, col_logmags):
    """Determinant of a matrix stored as unit columns with column exponents."""
    d = np.asarray(directions, dtype=float)
    base = np.linalg.det(d)
    s, l = slog_of(base)
    if s == 0.0:
        return 0.0, NEG_INF
    return s, l + float(np.sum(col_logmags))
