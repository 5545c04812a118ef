"""Independent system-norm oracles.

These deliberately avoid the LMI machinery: the quadratic norm comes from
Lyapunov equations, the peak gain from a dense frequency sweep with local
refinement.  They serve as the second route when checking synthesized or
analyzed gains.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg


def spectral_abscissa(A):
    return float(np.max(np.real(np.linalg.eigvals(A)))) if A.size else -np.inf


def spectral_radius(A):
    return float(np.max(np.abs(np.linalg.eigvals(A)))) if A.size else 0.0


def is_stable(A, domain, margin=0.0):
    if domain == "ct":
        return spectral_abscissa(A) < -margin
    return spectral_radius(A) < 1.0 - margin


def h2_norm(A, B, C, D=None, domain="ct"):
    """Quadratic norm via the observability Gramian.

    Continuous time requires D = 0 (otherwise the norm is unbounded);
    discrete time adds the direct term.
    """
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    C = np.atleast_2d(C)
    if not is_stable(A, domain):
        return np.inf
    if domain == "ct":
        if D is not None and np.max(np.abs(D)) > 0:
            return np.inf
        X = scipy.linalg.solve_continuous_lyapunov(A.T, -C.T @ C)
        return float(np.sqrt(max(np.trace(B.T @ X @ B), 0.0)))
    X = scipy.linalg.solve_discrete_lyapunov(A.T, C.T @ C)
    extra = float(np.trace(D.T @ D)) if D is not None else 0.0
    return float(np.sqrt(max(np.trace(B.T @ X @ B) + extra, 0.0)))


def _ct_gain(A, B, C, D, w):
    n = A.shape[0]
    G = C @ np.linalg.solve(1j * w * np.eye(n) - A, B) + D
    return float(np.linalg.norm(G, 2))


def _dt_gain(A, B, C, D, theta):
    n = A.shape[0]
    z = np.exp(1j * theta)
    G = C @ np.linalg.solve(z * np.eye(n) - A, B) + D
    return float(np.linalg.norm(G, 2))


def _refine(gain, lo, hi, iters=80):
    """Golden-section refinement of a bracketed peak."""
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = gain(c), gain(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = gain(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = gain(d)
    return max(fc, fd)


def hinf_norm(A, B, C, D=None, domain="ct", grid=2000):
    """Peak frequency-response gain by sweep plus golden-section refinement."""
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    C = np.atleast_2d(C)
    if D is None:
        D = np.zeros((C.shape[0], B.shape[1]))
    D = np.atleast_2d(D)
    if not is_stable(A, domain):
        return np.inf
    if B.size == 0 or C.size == 0:
        return float(np.linalg.norm(D, 2)) if D.size else 0.0

    if domain == "ct":
        scales = np.abs(np.linalg.eigvals(A))
        lo = max(np.min(scales[scales > 0], initial=1.0) * 1e-3, 1e-6)
        hi = max(np.max(scales, initial=1.0) * 1e3, 1.0)
        ws = np.concatenate(([0.0], np.logspace(np.log10(lo), np.log10(hi), grid),
                             np.abs(np.imag(np.linalg.eigvals(A)))))
        ws = np.unique(ws[np.isfinite(ws)])
        gain = lambda w: _ct_gain(A, B, C, D, w)
    else:
        ws = np.linspace(0.0, np.pi, grid)
        gain = lambda th: _dt_gain(A, B, C, D, th)

    vals = np.array([gain(w) for w in ws])
    best = float(np.max(vals))
    order = np.argsort(vals)[::-1][:3]
    for k in order:
        lo_i = ws[max(k - 1, 0)]
        hi_i = ws[min(k + 1, len(ws) - 1)]
        if hi_i > lo_i:
            best = max(best, _refine(gain, lo_i, hi_i))
    return best
