"""Implicit time stepping for diffusion with a memory time derivative.

The scheme discretizes  d/dt (k*[u - u0]) = lap(Phi(u))  on a Dirichlet box:
the memory derivative uses the product-integration weights of k in the
difference form (1/tau) * sum_{i<=j} b[j-i] (u^i - u^{i-1}), the diffusion
term is fully implicit, and past states enter explicitly (the system is
lower triangular in time).  With nonincreasing nonnegative weights the step
operator inherits the comparison and L1-contraction structure of the
continuous flow, which is what the verification suites exercise.

Each step solves an M-matrix nonlinear system by damped Newton, either in
the primal variable u (bounded Phi') or in the flux variable w = Phi(u)
(bounded slope of the inverse; the right choice for fast diffusion).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .errors import ConfigurationError, GridMismatchError, StepFailureError, SupportError
from .kernels import (
    KernelWeights,
    SampledFunction,
    TimeGrid,
    numeric_complement,
    rl_weights,
)
from .nonlinearity import Nonlinearity, power_law, regularize
from .spatial import SpaceGrid, build_laplacian, gaussian, torsion_zeta

__all__ = ["SolveConfig", "StateHistory", "solve", "step", "weak_residual", "diagnostics"]

DEFAULT_REG_INDEX = 1000


@dataclass(frozen=True)
class SolveConfig:
    """Everything a solve needs: kernel pair, flux law, grids, Newton knobs."""

    kernel: KernelWeights
    complement: KernelWeights
    phi: Nonlinearity
    grid: SpaceGrid
    tgrid: TimeGrid
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    newton_damping_floor: float = 2.0**-20
    solve_in: str = "auto"
    max_steps: int = 10_000  # dense O(J^2) history; no compression

    def __post_init__(self):
        if self.kernel.grid != self.tgrid or self.complement.grid != self.tgrid:
            raise GridMismatchError("kernel weights must live on the solve time grid")
        if not self.phi.has_bounded_slopes:
            raise ConfigurationError(
                "flux law needs two-sided slope bounds; regularize() it first"
            )
        if not (self.newton_tol > 0.0):
            raise ConfigurationError("newton tolerance must be positive")
        if self.solve_in not in ("auto", "u", "w"):
            raise ConfigurationError(f"unknown solve variable {self.solve_in!r}")
        if self.tgrid.steps > self.max_steps:
            raise ConfigurationError(
                f"{self.tgrid.steps} steps exceed the configured cap "
                f"{self.max_steps}; raise max_steps explicitly for long runs"
            )

    @property
    def variable(self) -> str:
        """Newton variable: flux for steep-at-0 laws, primal otherwise."""
        if self.solve_in != "auto":
            return self.solve_in
        m = self.phi.exponent
        if m is not None:
            return "w" if m < 1.0 else "u"
        return "w" if self.phi.derivative_at_zero > 1.0 else "u"

    @classmethod
    def for_power_law(
        cls,
        alpha: float,
        m: float,
        grid: SpaceGrid,
        tgrid: TimeGrid,
        u0=None,
        cap: float | None = None,
        reg_index: int = DEFAULT_REG_INDEX,
        **newton,
    ) -> "SolveConfig":
        """Power-kernel / power-law configuration with automatic regularization.

        The slope cap defaults to max|u0| + 1; m = 1 needs no regularization.
        The complement is the numeric deconvolution of the kernel, so the
        discrete pair convolves to 1 exactly.
        """
        k = rl_weights(alpha, tgrid)
        ell = numeric_complement(k)
        base = power_law(m)
        if m == 1.0:
            phi = base
        else:
            if cap is None:
                if u0 is None:
                    raise ConfigurationError("need u0 or an explicit cap to regularize")
                cap = float(np.max(np.abs(u0))) + 1.0
            phi = regularize(base, cap=cap, n=reg_index)
        return cls(kernel=k, complement=ell, phi=phi, grid=grid, tgrid=tgrid, **newton)


@dataclass(frozen=True)
class StateHistory:
    """Dense history u^0..u^J of interior fields plus per-step diagnostics."""

    config: SolveConfig
    fields: np.ndarray
    newton_iterations: np.ndarray
    newton_residuals: np.ndarray

    def __post_init__(self):
        self.fields.setflags(write=False)

    @property
    def times(self) -> np.ndarray:
        return self.config.tgrid.nodes()

    def __len__(self) -> int:
        return self.fields.shape[0]


# ---------------------------------------------------------------------------
# linear algebra helpers
# ---------------------------------------------------------------------------


class _LinearSolver:
    """Solves (diag(d) - scale_cols(L, c)) x = rhs for the Newton updates.

    1D goes through the banded LAPACK routine; 2D assembles CSR and
    factorizes per solve.
    """

    def __init__(self, grid: SpaceGrid, lap_matrix):
        self.grid = grid
        self.L = lap_matrix
        if grid.dim == 1:
            self.h2 = grid.h**2

    def solve(self, d: np.ndarray, c: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        if self.grid.dim == 1:
            n = rhs.shape[0]
            ab = np.zeros((3, n))
            ab[1] = d + 2.0 * c / self.h2
            ab[0, 1:] = -c[1:] / self.h2
            ab[2, :-1] = -c[:-1] / self.h2
            return sla.solve_banded((1, 1), ab, rhs)
        A = sp.diags(d) - self.L.multiply(c[np.newaxis, :])
        return spla.spsolve(A.tocsc(), rhs)


def _newton(residual, lin_solve, x0, tol, max_iter, floor):
    """Damped Newton with step halving; returns (x, iterations, residual)."""
    x = x0
    F = residual(x)
    res = float(np.max(np.abs(F)))
    for it in range(max_iter):
        if res < tol:
            return x, it, res
        dx = lin_solve(x, -F)
        lam = 1.0
        while True:
            xn = x + lam * dx
            Fn = residual(xn)
            rn = float(np.max(np.abs(Fn)))
            if rn < res:
                break
            lam *= 0.5
            if lam < floor:
                raise StepFailureError(
                    f"damping stalled at residual {res:.3e}", residual=res
                )
        x, F, res = xn, Fn, rn
    if res < tol:
        return x, max_iter, res
    raise StepFailureError(
        f"no convergence in {max_iter} iterations (residual {res:.3e})",
        residual=res,
    )


def _advance(config, lin, c0, u_prev, rhs):
    """One implicit step: solve (c0)*u - lap(Phi(u)) = rhs for u."""
    phi = config.phi
    if config.variable == "w":

        def residual(w):
            return c0 * phi.inverse(w) - lin.L @ w - rhs

        def lsolve(w, b):
            return lin.solve(c0 * phi.inverse_derivative(w), np.ones_like(w), b)

        w0 = np.asarray(phi.value(u_prev), dtype=np.float64)
        w, its, res = _newton(
            residual, lsolve, w0, config.newton_tol, config.newton_max_iter,
            config.newton_damping_floor,
        )
        return np.asarray(phi.inverse(w), dtype=np.float64), its, res

    def residual(u):
        return c0 * u - lin.L @ phi.value(u) - rhs

    def lsolve(u, b):
        return lin.solve(np.full_like(u, c0), phi.derivative(u), b)

    u, its, res = _newton(
        residual, lsolve, u_prev.copy(), config.newton_tol, config.newton_max_iter,
        config.newton_damping_floor,
    )
    return u, its, res


# ---------------------------------------------------------------------------
# public drivers
# ---------------------------------------------------------------------------


def solve(config: SolveConfig, u0: np.ndarray) -> StateHistory:
    """March the implicit scheme over the whole time grid.

    Deterministic: identical config and data reproduce the history bitwise
    (per backend).  Raises StepFailureError if some step's Newton iteration
    stalls; the error carries the offending residual.
    """
    u0 = np.ascontiguousarray(u0, dtype=np.float64)
    if u0.shape != (config.grid.size,):
        raise GridMismatchError(
            f"initial data has shape {u0.shape}, grid wants ({config.grid.size},)"
        )
    if not np.all(np.isfinite(u0)):
        raise ConfigurationError("initial data must be finite")

    J = config.tgrid.steps
    tau = config.tgrid.tau
    b = config.kernel.b
    c0 = b[0] / tau
    lap = build_laplacian(config.grid)
    lin = _LinearSolver(config.grid, lap.matrix)

    fields = np.empty((J + 1, u0.shape[0]))
    fields[0] = u0
    du = np.zeros((J, u0.shape[0]))
    iters = np.zeros(J, dtype=np.int64)
    resids = np.zeros(J)

    u = u0
    for j in range(1, J + 1):
        mem = _kernels.memory_load(b, du, j)
        rhs = c0 * u - mem / tau
        try:
            u_next, its, res = _advance(config, lin, c0, u, rhs)
        except StepFailureError as exc:
            exc.step = j
            raise
        du[j - 1] = u_next - u
        fields[j] = u_next
        iters[j - 1] = its
        resids[j - 1] = res
        u = u_next
    return StateHistory(
        config=config, fields=fields, newton_iterations=iters, newton_residuals=resids
    )


def step(config: SolveConfig, history) -> np.ndarray:
    """Advance one step from an explicit list/array of past fields u^0..u^{j-1}.

    Recomputes the memory load from the supplied history; used to cross-check
    the incremental bookkeeping inside :func:`solve`.
    """
    hist = np.asarray(history, dtype=np.float64)
    if hist.ndim != 2 or hist.shape[1] != config.grid.size:
        raise GridMismatchError("history must be (j, grid.size)")
    j = hist.shape[0]  # number of known fields = next step index
    if j > config.tgrid.steps:
        raise ConfigurationError("history already spans the full time grid")
    tau = config.tgrid.tau
    b = config.kernel.b
    c0 = b[0] / tau
    du = np.diff(hist, axis=0)
    mem = b[1:j][::-1] @ du if j > 1 else np.zeros(config.grid.size)
    rhs = c0 * hist[-1] - mem / tau
    lap = build_laplacian(config.grid)
    lin = _LinearSolver(config.grid, lap.matrix)
    u_next, _, _ = _advance(config, lin, c0, hist[-1], rhs)
    return u_next


def _interior_boundary_layer(grid: SpaceGrid) -> np.ndarray:
    """Mask of interior nodes adjacent to the Dirichlet boundary."""
    if grid.dim == 1:
        n = grid.shape[0]
        m = np.zeros(n, dtype=bool)
        m[0] = m[-1] = True
        return m
    nx, ny = grid.shape
    m = np.zeros((nx, ny), dtype=bool)
    m[0, :] = m[-1, :] = True
    m[:, 0] = m[:, -1] = True
    return m.ravel()


def weak_residual(
    history: StateHistory, test: np.ndarray, ell: KernelWeights
) -> SampledFunction:
    """Residual of the integral identity defining weak solutions.

    r_j = <u^j - u^0, test> - (ell * g)_j  with  g_i = <Phi(u^i), lap(test)>,
    all inner products by midpoint quadrature and the convolution by product
    integration.  The test field must vanish on the interior layer adjacent
    to the boundary so the discrete integration by parts is exact.
    """
    config = history.config
    if ell.grid != config.tgrid:
        raise GridMismatchError("complement weights must live on the solve grid")
    test = np.asarray(test, dtype=np.float64)
    if test.shape != (config.grid.size,):
        raise GridMismatchError("test field does not match the space grid")
    layer = _interior_boundary_layer(config.grid)
    scale = float(np.max(np.abs(test))) or 1.0
    if np.any(np.abs(test[layer]) > 1e-13 * scale):
        raise SupportError("test field must vanish adjacent to the boundary")

    lap = build_laplacian(config.grid)
    lap_test = lap.apply(test)
    meas = config.grid.cell_measure
    phi_vals = config.phi.value(history.fields[1:])
    g = (phi_vals @ lap_test) * meas
    rhs = _kernels.convolve(ell.b, g)
    lhs = ((history.fields[1:] - history.fields[0]) @ test) * meas
    return SampledFunction(grid=config.tgrid, values=lhs - rhs)


def diagnostics(history: StateHistory) -> dict:
    """Time series of the integral quantities the suites monitor."""
    grid = history.config.grid
    f = history.fields
    meas = grid.cell_measure
    G = gaussian(grid)
    zeta = torsion_zeta(grid)
    return {
        "t": history.times,
        "mass": f.sum(axis=1) * meas,
        "l1": np.abs(f).sum(axis=1) * meas,
        "l2": np.sqrt((f**2).sum(axis=1) * meas),
        "linf": np.abs(f).max(axis=1),
        "mass_gaussian": (f @ G) * meas,
        "l1_torsion": (np.abs(f) @ zeta) * meas,
    }
