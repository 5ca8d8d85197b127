"""Dirichlet boxes, the five/three-point Laplacian, and weight fields.

Fields are flat float64 arrays over the interior nodes of a uniform grid on
a 1D interval or 2D box; boundary nodes carry the homogeneous Dirichlet
value and are never stored.  Quadrature is the midpoint rule with cell
measure h^dim.  Weight fields (torsion solution, parabolic bump, smooth
cutoff, Gaussian) keep their radial formulas evaluated on the box.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, GridMismatchError

__all__ = [
    "SpaceGrid",
    "build_laplacian",
    "DirichletLaplacian",
    "torsion_zeta",
    "bump_weight",
    "cutoff",
    "gaussian",
    "weighted_l1",
    "lq_norm",
    "mass",
]


@dataclass(frozen=True)
class SpaceGrid:
    """Uniform grid with zero Dirichlet boundary on an interval or box."""

    lo: tuple
    hi: tuple
    h: float

    def __post_init__(self):
        if not (self.h > 0.0):
            raise DomainError(f"mesh width must be positive, got {self.h}")
        if len(self.lo) != len(self.hi) or len(self.lo) not in (1, 2):
            raise DomainError("grids are 1D intervals or 2D boxes")
        for a, b in zip(self.lo, self.hi):
            span = b - a
            n = span / self.h
            if span <= 0.0 or abs(n - round(n)) > 1e-8 * max(1.0, abs(n)):
                raise DomainError(
                    f"extent [{a}, {b}] is not a positive multiple of h={self.h}"
                )
            if round(n) < 2:
                raise DomainError("need at least one interior node per axis")

    @classmethod
    def interval(cls, a: float, b: float, h: float) -> "SpaceGrid":
        return cls(lo=(a,), hi=(b,), h=h)

    @classmethod
    def box(cls, radius: float, h: float, dim: int = 1) -> "SpaceGrid":
        """Symmetric box [-radius, radius]^dim."""
        return cls(lo=(-radius,) * dim, hi=(radius,) * dim, h=h)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple:
        return tuple(
            int(round((b - a) / self.h)) - 1 for a, b in zip(self.lo, self.hi)
        )

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_measure(self) -> float:
        return self.h**self.dim

    def axis_nodes(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        return self.lo[axis] + self.h * np.arange(1, n + 1)

    def points(self) -> np.ndarray:
        """Interior node coordinates, shape (size, dim), row-major."""
        if self.dim == 1:
            return self.axis_nodes(0)[:, None]
        X, Y = np.meshgrid(self.axis_nodes(0), self.axis_nodes(1), indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def radius(self) -> np.ndarray:
        """Euclidean distance of each interior node from the origin."""
        pts = self.points()
        return np.sqrt(np.sum(pts**2, axis=1))


def _check_field(grid: SpaceGrid, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (grid.size,):
        raise GridMismatchError(f"field has shape {u.shape}, grid wants ({grid.size},)")
    return u


class DirichletLaplacian:
    """Second-order centered Laplacian with zero boundary values.

    Symmetric and negative definite on interior fields.  ``matrix`` is the
    sparse CSR representation used both to apply the operator and to
    assemble the implicit solver's Jacobians.
    """

    def __init__(self, grid: SpaceGrid):
        self.grid = grid
        self.matrix = _laplacian_csr(grid)

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ _check_field(self.grid, u)

    def solve_poisson(self, rhs: np.ndarray) -> np.ndarray:
        """Solve -lap(u) = rhs with zero boundary values."""
        rhs = _check_field(self.grid, rhs)
        return spla.spsolve((-self.matrix).tocsc(), rhs)


def _laplacian_csr(grid: SpaceGrid) -> sp.csr_matrix:
    h2 = grid.h**2
    if grid.dim == 1:
        n = grid.shape[0]
        main = -2.0 * np.ones(n) / h2
        off = np.ones(n - 1) / h2
        return sp.diags([off, main, off], [-1, 0, 1], format="csr")
    nx, ny = grid.shape

    def lap1(n):
        main = -2.0 * np.ones(n) / h2
        off = np.ones(n - 1) / h2
        return sp.diags([off, main, off], [-1, 0, 1], format="csr")

    Ix = sp.identity(nx, format="csr")
    Iy = sp.identity(ny, format="csr")
    return (sp.kron(lap1(nx), Iy) + sp.kron(Ix, lap1(ny))).tocsr()


@lru_cache(maxsize=32)
def _laplacian_cached(grid: SpaceGrid) -> DirichletLaplacian:
    return DirichletLaplacian(grid)


def build_laplacian(grid: SpaceGrid) -> DirichletLaplacian:
    return _laplacian_cached(grid)


# ---------------------------------------------------------------------------
# weight fields
# ---------------------------------------------------------------------------


def torsion_zeta(grid: SpaceGrid) -> np.ndarray:
    """Solution of -lap(zeta) = 1 with zero boundary values; positive inside.

    On an interval (0, L) the three-point stencil reproduces x(L-x)/2
    exactly, since the truncation error of a quadratic vanishes.
    """
    lap = build_laplacian(grid)
    return lap.solve_poisson(np.ones(grid.size))


def bump_weight(n: float, grid: SpaceGrid) -> np.ndarray:
    """Parabolic bump [1 - |x|^2/n^2]_+; scaled by n^2/(2*dim) it solves
    -lap(.) = 1 inside |x| < n."""
    if n < 1:
        raise DomainError(f"bump index must be >= 1, got {n}")
    r = grid.radius()
    return np.maximum(0.0, 1.0 - (r / n) ** 2)


def _quintic_ramp(s: np.ndarray) -> np.ndarray:
    """C2 monotone ramp: 1 at s<=0 down to 0 at s>=1."""
    s = np.clip(s, 0.0, 1.0)
    return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s**2)


def cutoff(n: float, grid: SpaceGrid) -> np.ndarray:
    """Smooth radial cutoff: 1 for |x| <= n-1, 0 for |x| >= n, C2 ramp between."""
    if n < 1:
        raise DomainError(f"cutoff index must be >= 1, got {n}")
    r = grid.radius()
    return _quintic_ramp(r - (n - 1.0))


def gaussian(grid: SpaceGrid) -> np.ndarray:
    """Gaussian weight exp(-|x|^2); satisfies lap(G) >= -2*dim*G."""
    r = grid.radius()
    return np.exp(-(r**2))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def mass(u: np.ndarray, grid: SpaceGrid) -> float:
    """Midpoint-rule integral of u over the domain."""
    return float(np.sum(_check_field(grid, u)) * grid.cell_measure)


def weighted_l1(u: np.ndarray, w: np.ndarray, grid: SpaceGrid) -> float:
    """Integral of |u| * w (w a nonnegative weight field)."""
    u = _check_field(grid, u)
    w = _check_field(grid, w)
    return float(np.sum(np.abs(u) * w) * grid.cell_measure)


def lq_norm(u: np.ndarray, q: float, grid: SpaceGrid) -> float:
    """L^q norm with midpoint quadrature; q = inf is the max norm."""
    u = _check_field(grid, u)
    if q == np.inf:
        return float(np.max(np.abs(u))) if u.size else 0.0
    if q < 1:
        raise DomainError(f"norm exponent must be >= 1, got {q}")
    return float((np.sum(np.abs(u) ** q) * grid.cell_measure) ** (1.0 / q))
