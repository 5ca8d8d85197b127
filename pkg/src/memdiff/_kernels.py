"""Hot numerical loops, in paired numba / pure-NumPy implementations.

Every function here operates on plain float64 arrays.  The public names at
the bottom of the module are bound to one of the two implementations
according to ``memdiff._backend.NUMBA_ENABLED``; both variants are kept
importable so tests and the benchmark can cross-check them.

Conventions: a kernel is represented by its cell integrals ``b`` with
``b[p] = integral of the kernel over [p*tau, (p+1)*tau]``, and a sampled
function by its right-endpoint values ``v[j-1] = v(t_j)``, ``j = 1..J``.
"""

import numpy as np

from ._backend import NUMBA_ENABLED

# ---------------------------------------------------------------------------
# pure NumPy implementations
# ---------------------------------------------------------------------------


def convolve_np(b, v):
    """Product-integration convolution: out[j-1] = sum_{i=1}^{j} b[j-i] v[i-1]."""
    return np.convolve(b, v)[: v.shape[0]]


def memory_np(b, du, j):
    """Memory load sum_{i=1}^{j-1} b[j-i] * du[i-1] for a field history.

    ``du`` has shape (J, ndof) with row i-1 holding u^i - u^{i-1}.
    """
    if j <= 1:
        return np.zeros(du.shape[1])
    return b[1:j][::-1] @ du[: j - 1]


def lower_volterra_np(bl, f, n):
    """Forward substitution for y_j + n*sum_{i<=j} bl[j-i] y_i = f_j.

    The system is lower triangular with diagonal 1 + n*bl[0] > 0, so the
    solve is exact up to roundoff.
    """
    J = bl.shape[0]
    y = np.empty(J)
    d = 1.0 + n * bl[0]
    for j in range(J):
        acc = n * np.dot(bl[1 : j + 1][::-1], y[:j]) if j else 0.0
        y[j] = (f[j] - acc) / d
    return y


def deconvolve_np(bk, tau):
    """Weights bl with sum_{p=0}^{q} bk[q-p] bl[p] = tau for every q."""
    J = bk.shape[0]
    bl = np.empty(J)
    bl[0] = tau / bk[0]
    for q in range(1, J):
        acc = np.dot(bk[1 : q + 1][::-1], bl[:q])
        bl[q] = (tau - acc) / bk[0]
    return bl


def power_ode_np(b, tau, lam, m, v0):
    """Implicit product-integration march for dt-memory v' = -lam*v^m.

    Each step solves (b0/tau)*v_j + lam*v_j^m = const by bisection-guarded
    Newton on the bracket (0, v_{j-1}]; const > 0 keeps iterates positive.
    """
    J = b.shape[0]
    v = np.empty(J)
    dv = np.empty(J)
    c0 = b[0] / tau
    vprev = v0
    for j in range(1, J + 1):
        mem = np.dot(b[1:j][::-1], dv[: j - 1]) if j > 1 else 0.0
        const = c0 * vprev - mem / tau
        v[j - 1] = _scalar_root_np(c0, lam, m, const, vprev)
        dv[j - 1] = v[j - 1] - vprev
        vprev = v[j - 1]
    return v


def _scalar_root_np(c0, lam, m, const, vprev):
    lo, hi = 0.0, vprev
    w = vprev
    for _ in range(200):
        g = c0 * w + lam * w**m - const
        if g > 0.0:
            hi = w
        else:
            lo = w
        if w > 0.0:
            wn = w - g / (c0 + lam * m * w ** (m - 1.0))
        else:
            wn = 0.5 * (lo + hi)
        if not (lo < wn < hi):
            wn = 0.5 * (lo + hi)
        if abs(wn - w) <= 1e-15 * max(1.0, abs(w)):
            return wn
        w = wn
    return w


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:
    from numba import njit

    @njit(cache=True)
    def convolve_nb(b, v):
        J = v.shape[0]
        out = np.zeros(J)
        for j in range(J):
            acc = 0.0
            for i in range(j + 1):
                acc += b[j - i] * v[i]
            out[j] = acc
        return out

    @njit(cache=True)
    def memory_nb(b, du, j):
        n = du.shape[1]
        out = np.zeros(n)
        for i in range(1, j):
            w = b[j - i]
            row = du[i - 1]
            for c in range(n):
                out[c] += w * row[c]
        return out

    @njit(cache=True)
    def lower_volterra_nb(bl, f, n):
        J = bl.shape[0]
        y = np.empty(J)
        d = 1.0 + n * bl[0]
        for j in range(J):
            acc = 0.0
            for i in range(j):
                acc += bl[j - i] * y[i]
            y[j] = (f[j] - n * acc) / d
        return y

    @njit(cache=True)
    def deconvolve_nb(bk, tau):
        J = bk.shape[0]
        bl = np.empty(J)
        bl[0] = tau / bk[0]
        for q in range(1, J):
            acc = 0.0
            for p in range(q):
                acc += bk[q - p] * bl[p]
            bl[q] = (tau - acc) / bk[0]
        return bl

    @njit(cache=True)
    def power_ode_nb(b, tau, lam, m, v0):
        J = b.shape[0]
        v = np.empty(J)
        dv = np.empty(J)
        c0 = b[0] / tau
        vprev = v0
        for j in range(1, J + 1):
            mem = 0.0
            for i in range(1, j):
                mem += b[j - i] * dv[i - 1]
            const = c0 * vprev - mem / tau
            lo = 0.0
            hi = vprev
            w = vprev
            for _ in range(200):
                g = c0 * w + lam * w**m - const
                if g > 0.0:
                    hi = w
                else:
                    lo = w
                if w > 0.0:
                    wn = w - g / (c0 + lam * m * w ** (m - 1.0))
                else:
                    wn = 0.5 * (lo + hi)
                if not (lo < wn < hi):
                    wn = 0.5 * (lo + hi)
                scale = 1.0 if abs(w) < 1.0 else abs(w)
                if abs(wn - w) <= 1e-15 * scale:
                    w = wn
                    break
                w = wn
            v[j - 1] = w
            dv[j - 1] = w - vprev
            vprev = w
        return v

    convolve = convolve_nb
    memory_load = memory_nb
    lower_volterra = lower_volterra_nb
    deconvolve = deconvolve_nb
    power_ode_march = power_ode_nb
else:
    convolve = convolve_np
    memory_load = memory_np
    lower_volterra = lower_volterra_np
    deconvolve = deconvolve_np
    power_ode_march = power_ode_np
