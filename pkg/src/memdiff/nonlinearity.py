"""Monotone nonlinearities for the diffusion flux, with C1 regularization.

The admissible nonlinearities are odd, strictly increasing, and vanish at
the origin.  The power law |r|^(m-1) r is singular at 0 for m < 1 (infinite
slope) and degenerate for m > 1 (zero slope); the implicit solvers require
two-sided slope bounds, which :func:`regularize` provides by splicing a
linear segment of slope phi'(1/n) through the origin and capping the slope
at phi'(M) beyond |r| = M, with exact algebraic shifts so that value and
derivative are continuous at the knots to roundoff.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = ["Nonlinearity", "power_law", "regularize"]


@dataclass(frozen=True)
class Nonlinearity:
    """Odd strictly increasing flux function with derivative and inverse.

    ``deriv_lower``/``deriv_upper`` are global slope bounds (0 or inf when
    unbounded); solvers demand both finite and positive.
    ``derivative_at_zero`` is the one-sided slope at 0: may be ``inf`` for
    singular laws, in which case implicit solves must regularize first.
    """

    kind: str
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    inverse_derivative: Callable[[np.ndarray], np.ndarray]
    deriv_lower: float
    deriv_upper: float
    derivative_at_zero: float
    exponent: float | None = None

    @property
    def has_bounded_slopes(self) -> bool:
        return self.deriv_lower > 0.0 and np.isfinite(self.deriv_upper)


def power_law(m: float) -> Nonlinearity:
    """Odd power law r -> |r|^(m-1) r with derivative m|r|^(m-1).

    The derivative at 0 is reported as inf for m < 1 and 0 for m > 1 rather
    than a large/small float, so solvers must branch explicitly instead of
    silently propagating garbage.
    """
    if not (m > 0.0):
        raise DomainError(f"power-law exponent must be positive, got {m}")

    d0 = 1.0 if m == 1.0 else (np.inf if m < 1.0 else 0.0)

    def value(r):
        r = np.asarray(r, dtype=np.float64)
        return np.sign(r) * np.abs(r) ** m

    def derivative(r):
        r = np.asarray(r, dtype=np.float64)
        a = np.abs(r)
        with np.errstate(divide="ignore"):
            out = np.where(a > 0.0, m * a ** (m - 1.0), d0)
        return out

    def inverse(y):
        y = np.asarray(y, dtype=np.float64)
        return np.sign(y) * np.abs(y) ** (1.0 / m)

    def inverse_derivative(y):
        y = np.asarray(y, dtype=np.float64)
        a = np.abs(y)
        dinv0 = 0.0 if m < 1.0 else (np.inf if m > 1.0 else 1.0)
        with np.errstate(divide="ignore"):
            out = np.where(a > 0.0, (1.0 / m) * a ** (1.0 / m - 1.0), dinv0)
        return out

    return Nonlinearity(
        kind=f"power_law({m})",
        value=value,
        derivative=derivative,
        inverse=inverse,
        inverse_derivative=inverse_derivative,
        deriv_lower=1.0 if m == 1.0 else 0.0,
        deriv_upper=1.0 if m == 1.0 else np.inf,
        derivative_at_zero=d0,
        exponent=m,
    )


def regularize(phi: Nonlinearity, cap: float, n: int) -> Nonlinearity:
    """Two-stage C1 regularization: linear through 0, slope-capped beyond cap.

    With a_n = phi(1/n)/phi'(1/n), the result is linear of slope phi'(1/n)
    on [-a_n, a_n], follows phi shifted by 1/n - a_n up to |r| = cap - shift,
    and continues linearly with slope phi'(cap) beyond.  The slopes stay in
    [min(phi'(1/n), phi'(cap)), max(phi'(1/n), phi'(cap))], so the result
    has the two-sided bounds the implicit solvers require.
    """
    if not (cap > 0.0):
        raise DomainError(f"cap must be positive, got {cap}")
    if n < 1:
        raise DomainError(f"regularization index must be >= 1, got {n}")
    if 1.0 / n > cap:
        raise DomainError(f"need 1/n <= cap, got n={n}, cap={cap}")

    phi_1n = float(phi.value(1.0 / n))
    dphi_1n = float(phi.derivative(1.0 / n))
    if not (np.isfinite(dphi_1n) and dphi_1n > 0.0):
        raise DomainError("base nonlinearity must have positive finite slope at 1/n")
    a_n = phi_1n / dphi_1n
    shift = 1.0 / n - a_n
    phi_cap = float(phi.value(cap))
    dphi_cap = float(phi.derivative(cap))
    r_knee = cap - shift  # where the slope cap takes over, in the new variable

    def value(r):
        r = np.asarray(r, dtype=np.float64)
        a = np.abs(r)
        core = a + shift
        out = np.where(
            a <= a_n,
            dphi_1n * a,
            np.where(
                core <= cap,
                phi.value(np.maximum(core, 1.0 / n)),
                dphi_cap * (core - cap) + phi_cap,
            ),
        )
        return np.sign(r) * out

    def derivative(r):
        r = np.asarray(r, dtype=np.float64)
        a = np.abs(r)
        core = a + shift
        return np.where(
            a <= a_n,
            dphi_1n,
            np.where(core <= cap, phi.derivative(np.maximum(core, 1.0 / n)), dphi_cap),
        )

    def inverse(y):
        y = np.asarray(y, dtype=np.float64)
        a = np.abs(y)
        out = np.where(
            a <= phi_1n,
            a / dphi_1n,
            np.where(
                a <= phi_cap,
                phi.inverse(np.maximum(a, phi_1n)) - shift,
                (a - phi_cap) / dphi_cap + r_knee,
            ),
        )
        return np.sign(y) * out

    def inverse_derivative(y):
        y = np.asarray(y, dtype=np.float64)
        a = np.abs(y)
        return np.where(
            a <= phi_1n,
            1.0 / dphi_1n,
            np.where(
                a <= phi_cap,
                phi.inverse_derivative(np.maximum(a, phi_1n)),
                1.0 / dphi_cap,
            ),
        )

    lo = min(dphi_1n, dphi_cap)
    hi = max(dphi_1n, dphi_cap)
    # For non-power bases the extreme slope may sit inside [1/n, cap].
    if phi.exponent is None:
        samples = phi.derivative(np.geomspace(1.0 / n, cap, 512))
        lo = min(lo, float(np.min(samples)))
        hi = max(hi, float(np.max(samples)))

    return Nonlinearity(
        kind=f"regularized({phi.kind}, cap={cap}, n={n})",
        value=value,
        derivative=derivative,
        inverse=inverse,
        inverse_derivative=inverse_derivative,
        deriv_lower=lo,
        deriv_upper=hi,
        derivative_at_zero=dphi_1n,
        exponent=phi.exponent,
    )
