"""Discretised L2([0, 1]) primitives: grids, inner products, moments, covariances.

Curves are stored as raw values on the grid and are never pre-multiplied by
the quadrature weights; every inner product and operator action goes through
the weights explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import GridMismatchError

SYMMETRY_RTOL = 1e-10
PSD_EPS = 1e-8


@dataclass(frozen=True, eq=False)
class Grid:
    """Quadrature grid on [0, 1].

    Parameters
    ----------
    points : array_like
        Strictly increasing abscissae in [0, 1].
    weights : array_like
        Positive quadrature weights, one per point.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if points.ndim != 1 or weights.shape != points.shape:
            raise ValueError("points and weights must be 1-d arrays of equal length")
        if points.size < 2:
            raise ValueError("a grid needs at least two points")
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(weights))):
            raise ValueError("grid points and weights must be finite")
        if np.any(np.diff(points) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if points[0] < 0.0 or points[-1] > 1.0:
            raise ValueError("grid points must lie in [0, 1]")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def m(self) -> int:
        return self.points.size

    def compatible(self, other: Grid) -> bool:
        if other is self:
            return True
        return (
            other.m == self.m
            and np.array_equal(other.points, self.points)
            and np.array_equal(other.weights, self.weights)
        )

    def check(self, other: Grid) -> None:
        if not self.compatible(other):
            raise GridMismatchError("objects live on different grids")

    def check_curve(self, values, name="curve") -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.m,):
            raise ValueError(f"{name} has shape {values.shape}, grid expects ({self.m},)")
        return values


def make_grid(m: int = 101, scheme: str = "trapezoid") -> Grid:
    """Equispaced grid on [0, 1].

    ``trapezoid`` uses the endpoints and weights (h/2, h, ..., h, h/2) with
    h = 1/(m-1); ``midpoint`` uses the centres of m cells of width 1/m.
    """
    if int(m) != m or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m}")
    m = int(m)
    if scheme == "trapezoid":
        h = 1.0 / (m - 1)
        points = np.linspace(0.0, 1.0, m)
        weights = np.full(m, h)
        weights[0] = weights[-1] = h / 2
    elif scheme == "midpoint":
        points = (np.arange(m) + 0.5) / m
        weights = np.full(m, 1.0 / m)
    else:
        raise ValueError(f"unknown quadrature scheme {scheme!r}")
    return Grid(points, weights)


def trapezoid_grid(points) -> Grid:
    """Trapezoid weights on arbitrary strictly increasing nodes in [0, 1]."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 1 or points.size < 2:
        raise ValueError("need at least two grid points")
    h = np.diff(points)
    weights = np.zeros_like(points)
    weights[:-1] += h / 2
    weights[1:] += h / 2
    return Grid(points, weights)


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """``n`` curves tabulated on a shared grid (row j is X_j)."""

    grid: Grid
    curves: np.ndarray

    def __post_init__(self):
        curves = np.array(self.curves, dtype=float)
        if curves.ndim != 2 or curves.shape[1] != self.grid.m:
            raise ValueError(
                f"curves must have shape (n, {self.grid.m}), got {curves.shape}")
        if not np.all(np.isfinite(curves)):
            raise ValueError("curves contain non-finite values")
        curves.setflags(write=False)
        object.__setattr__(self, "curves", curves)

    @property
    def n(self) -> int:
        return self.curves.shape[0]

    @property
    def m(self) -> int:
        return self.curves.shape[1]

    def shifted(self, g) -> FunctionalSample:
        """The sample with the fixed curve ``g`` added to every curve."""
        g = self.grid.check_curve(g, "shift")
        return FunctionalSample(self.grid, self.curves + g)

    def centred(self) -> np.ndarray:
        return self.curves - self.curves.mean(axis=0)


@dataclass(frozen=True, eq=False)
class CovarianceOperator:
    """Discretised covariance kernel ``K[i, j] = c(t_i, t_j)``.

    Construction checks symmetry and that the weighted matrix
    W^1/2 K W^1/2 is positive semidefinite up to ``PSD_EPS * lambda_max``.
    """

    grid: Grid
    kernel: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        kernel = np.array(self.kernel, dtype=float)
        m = self.grid.m
        if kernel.shape != (m, m):
            raise ValueError(f"kernel must have shape ({m}, {m}), got {kernel.shape}")
        if not np.all(np.isfinite(kernel)):
            raise ValueError("kernel contains non-finite values")
        if self.validate:
            scale = max(np.abs(kernel).max(), np.finfo(float).tiny)
            if np.abs(kernel - kernel.T).max() > SYMMETRY_RTOL * scale:
                raise ValueError("kernel is not symmetric")
            sw = np.sqrt(self.grid.weights)
            eig = np.linalg.eigvalsh(sw[:, None] * kernel * sw[None, :])
            if eig[0] < -PSD_EPS * max(eig[-1], 0.0) - 1e-300:
                raise ValueError(
                    f"kernel is not positive semidefinite (min eigenvalue {eig[0]:.3e}, "
                    f"max {eig[-1]:.3e})")
        kernel.setflags(write=False)
        object.__setattr__(self, "kernel", kernel)

    def weighted(self) -> np.ndarray:
        """W K W, the matrix of the bilinear form in raw curve coordinates."""
        w = self.grid.weights
        return w[:, None] * self.kernel * w[None, :]

    def lambda_max(self) -> float:
        sw = np.sqrt(self.grid.weights)
        return float(np.linalg.eigvalsh(sw[:, None] * self.kernel * sw[None, :])[-1])


def inner_product(f, g, grid: Grid) -> float:
    """Quadrature approximation sum_i w_i f_i g_i of the L2 inner product."""
    f = grid.check_curve(f, "f")
    g = grid.check_curve(g, "g")
    return float(np.dot(grid.weights * f, g))


def sample_mean(sample: FunctionalSample) -> np.ndarray:
    if sample.n < 1:
        raise ValueError("sample is empty")
    return sample.curves.mean(axis=0)


def sample_covariance(sample: FunctionalSample) -> CovarianceOperator:
    """Sample covariance kernel with divisor n (not n - 1)."""
    if sample.n < 2:
        raise ValueError(f"need n >= 2 curves for a covariance, got {sample.n}")
    xc = sample.centred()
    kernel = xc.T @ xc / sample.n
    # symmetrise away rounding in the matmul
    kernel = 0.5 * (kernel + kernel.T)
    return CovarianceOperator(sample.grid, kernel)


def cov_bilinear(op: CovarianceOperator, f, g) -> float:
    """Quadrature form of <C f, g>: sum_{i,k} w_i f_i K_ik w_k g_k."""
    f = op.grid.check_curve(f, "f")
    g = op.grid.check_curve(g, "g")
    w = op.grid.weights
    return float((w * f) @ op.kernel @ (w * g))


def cov_quad_form(op: CovarianceOperator, f) -> float:
    return cov_bilinear(op, f, f)
