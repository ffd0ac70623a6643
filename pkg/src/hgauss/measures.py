"""Centred Gaussian measures on the grid: probe measures and process samplers.

Any centred Gaussian measure with a non-degenerate covariance charges every
ball of L2, which is what makes the statistic consistent; the families below
all qualify.  Wiener paths are built from exact independent increments;
every other family is sampled through a spectral factor of its pointwise
kernel matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .exceptions import NumericalError, NumericalWarning
from .fda import CovarianceOperator, FunctionalSample, Grid

FAMILIES = ("wiener", "ornstein_uhlenbeck", "brownian_bridge", "custom_kernel")
ALIASES = {"ou": "ornstein_uhlenbeck", "bridge": "brownian_bridge", "custom": "custom_kernel"}

# clipped negative eigenvalue mass tolerated silently, relative to the trace
CLIP_TOL = 1e-6


def canonical_family(name: str) -> str:
    family = ALIASES.get(name, name)
    if family not in FAMILIES:
        raise ValueError(f"unknown Gaussian family {name!r}; choose from {FAMILIES}")
    return family


@dataclass(frozen=True, eq=False)
class GaussianMeasure:
    """Centred Gaussian measure on the grid.

    ``param`` is the variance scale for ``wiener`` and ``brownian_bridge``
    (kernel ``param * min(s, t)`` etc.) and the decay rate ``theta`` of the
    stationary Ornstein-Uhlenbeck kernel ``exp(-theta |s - t|)``.  The
    ``custom_kernel`` family takes an explicit pointwise kernel matrix.
    """

    grid: Grid
    family: str = "wiener"
    param: float = 1.0
    kernel: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))
        if not np.isfinite(self.param) or self.param <= 0:
            raise ValueError(f"measure parameter must be positive, got {self.param}")
        if self.family == "custom_kernel":
            if self.kernel is None:
                raise ValueError("custom_kernel measures need an explicit kernel matrix")
            # validated (symmetric, near-PSD) by CovarianceOperator
            op = CovarianceOperator(self.grid, self.kernel)
            object.__setattr__(self, "kernel", op.kernel)
        elif self.kernel is not None:
            raise ValueError(f"family {self.family!r} does not take a kernel matrix")

    def describe(self) -> dict:
        return {"family": self.family, "param": float(self.param)}


def kernel_matrix(measure: GaussianMeasure) -> CovarianceOperator:
    t = measure.grid.points
    s, u = np.meshgrid(t, t, indexing="ij")
    if measure.family == "wiener":
        kernel = measure.param * np.minimum(s, u)
    elif measure.family == "ornstein_uhlenbeck":
        kernel = np.exp(-measure.param * np.abs(s - u))
    elif measure.family == "brownian_bridge":
        kernel = measure.param * (np.minimum(s, u) - s * u)
    else:
        kernel = measure.kernel
    return CovarianceOperator(measure.grid, kernel)


@dataclass(frozen=True, eq=False)
class SpectralFactor:
    """``factor @ factor.T`` reproduces a kernel matrix after eigenvalue clipping."""

    factor: np.ndarray
    clipped_mass: float
    trace: float

    @property
    def rank(self) -> int:
        return self.factor.shape[1]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((n, self.rank))
        return z @ self.factor.T


def spectral_factor(cov: CovarianceOperator) -> SpectralFactor:
    """Symmetric eigendecomposition of the pointwise kernel, negatives clipped to 0."""
    kernel = cov.kernel
    try:
        evals, evecs = np.linalg.eigh(kernel)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition failed for {kernel.shape} kernel "
            f"(trace={np.trace(kernel):.6g}, max|K|={np.abs(kernel).max():.6g}): {exc}"
        ) from exc
    trace = float(np.trace(kernel))
    clipped = float(-evals[evals < 0].sum())
    if clipped > CLIP_TOL * max(trace, 0.0) and clipped > 0:
        warnings.warn(
            f"clipped negative eigenvalue mass {clipped:.3e} exceeds "
            f"{CLIP_TOL:g} x trace ({trace:.3e})", NumericalWarning, stacklevel=2)
    lam_max = max(evals[-1], 0.0)
    keep = evals > kernel.shape[0] * np.finfo(float).eps * lam_max
    evecs = evecs[:, keep]
    # fix eigenvector signs so rounding-level input changes cannot flip draws
    lead = evecs[np.abs(evecs).argmax(axis=0), np.arange(evecs.shape[1])]
    evecs = evecs * np.where(lead < 0, -1.0, 1.0)
    factor = evecs * np.sqrt(evals[keep])
    return SpectralFactor(np.ascontiguousarray(factor), clipped, trace)


@dataclass(frozen=True, eq=False)
class ProbeSet:
    """``M`` probe functions drawn from a Gaussian measure (row = one probe)."""

    grid: Grid
    probes: np.ndarray
    seed_record: dict = field(default_factory=dict)

    def __post_init__(self):
        probes = np.array(self.probes, dtype=float)
        if probes.ndim != 2 or probes.shape[0] < 1 or probes.shape[1] != self.grid.m:
            raise ValueError(f"probes must have shape (M >= 1, {self.grid.m})")
        if not np.all(np.isfinite(probes)):
            raise ValueError("probes contain non-finite values")
        probes.setflags(write=False)
        object.__setattr__(self, "probes", probes)

    @property
    def M(self) -> int:
        return self.probes.shape[0]


def _wiener_paths(grid: Grid, count: int, scale: float, rng: np.random.Generator):
    dt = np.diff(grid.points, prepend=0.0)
    z = rng.standard_normal((count, grid.m))
    return np.sqrt(scale) * np.cumsum(z * np.sqrt(dt), axis=1)


def sample_probes(measure: GaussianMeasure, M: int, seed, stream=(seeding.PROBES,)) -> ProbeSet:
    """Draw ``M`` probes f ~ Q from stream ``stream`` of ``seed``."""
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    M = int(M)
    rng = seeding.generator(seed, *stream)
    if measure.family == "wiener":
        probes = _wiener_paths(measure.grid, M, measure.param, rng)
    else:
        probes = spectral_factor(kernel_matrix(measure)).sample(M, rng)
    record = {"stream": list(stream), **measure.describe()}
    if not isinstance(seed, np.random.Generator):
        record["seed"] = int(seed) if not isinstance(seed, np.random.SeedSequence) else None
    return ProbeSet(measure.grid, probes, record)


def sample_gaussian_process(cov: CovarianceOperator, n: int, seed) -> FunctionalSample:
    """``n`` iid centred Gaussian curves whose pointwise covariance is ``cov.kernel``."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    rng = seeding.generator(seed)
    return FunctionalSample(cov.grid, spectral_factor(cov).sample(int(n), rng))
