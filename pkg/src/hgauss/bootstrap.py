"""Parametric bootstrap calibration of n*T_n.

Each replicate draws X*_1..X*_n iid from N(0, C_n), recomputes the mean and
covariance from the resample and evaluates the same statistic.  Replicate
``b`` owns the stream ``(seed, BOOTSTRAP, b)``; replicates are evaluated in
fixed-size chunks, so the result does not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .fda import FunctionalSample, sample_covariance
from .measures import GaussianMeasure, ProbeSet, kernel_matrix, sample_probes, spectral_factor
from .statistic import (
    StatisticValue,
    _nonneg,
    closed_form_values,
    mc_values,
    nt_closed_form,
    nt_mc,
)

MIN_B = 19
CHUNK = 25
CLOSED_FORM_MAX_M = 512


@dataclass(frozen=True, eq=False)
class TestResult:
    observed: StatisticValue
    boot_stats: np.ndarray
    p_value: float
    alpha: float
    reject: bool
    config: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return {
            "observed": self.observed.to_dict(),
            "boot_stats": [float(x) for x in self.boot_stats],
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "config": dict(self.config),
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> TestResult:
        return cls(
            observed=StatisticValue(**d["observed"]),
            boot_stats=np.asarray(d["boot_stats"], dtype=float),
            p_value=d["p_value"],
            alpha=d["alpha"],
            reject=d["reject"],
            config=dict(d["config"]),
            diagnostics=dict(d.get("diagnostics", {})),
        )


def p_value(observed: float, boot_stats) -> float:
    """Add-one bootstrap p-value; ties count as exceedances."""
    boot_stats = np.asarray(boot_stats, dtype=float)
    return (1 + int(np.count_nonzero(boot_stats >= observed))) / (boot_stats.size + 1)


def percentile(boot_stats, alpha: float) -> float:
    """Upper ``alpha`` bootstrap critical value.

    Returns the ceil((1 - alpha)(B + 1))-th order statistic, or ``inf`` when
    alpha is too small for B replicates to resolve.
    """
    stats = np.sort(np.asarray(boot_stats, dtype=float))
    if stats.size == 0:
        raise ValueError("percentile of an empty bootstrap distribution")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    k = math.ceil((1.0 - alpha) * (stats.size + 1) - 1e-9)
    if k > stats.size:
        return math.inf
    return float(stats[max(k, 1) - 1])


def resolve_method(method: str, m: int) -> str:
    aliases = {"mc": "monte_carlo", "closed": "closed_form"}
    method = aliases.get(method, method)
    if method == "auto":
        return "closed_form" if m <= CLOSED_FORM_MAX_M else "monte_carlo"
    if method not in ("monte_carlo", "closed_form"):
        raise ValueError(f"unknown statistic method {method!r}")
    return method


def bootstrap_test(
    sample: FunctionalSample,
    measure: GaussianMeasure,
    M: int = 1000,
    B: int = 200,
    alpha: float = 0.05,
    seed: int = 0,
    method: str = "auto",
    fresh_probes: bool = False,
    threads: int = 1,
) -> TestResult:
    """Bootstrap test of Gaussianity for ``sample``.

    Parameters
    ----------
    sample : FunctionalSample
        The observed curves, n >= 2.
    measure : GaussianMeasure
        Probe measure Q on the sample's grid.
    M : int
        Number of probes for the Monte Carlo statistic (ignored by closed form).
    B : int
        Number of bootstrap replicates, at least 19.
    alpha : float
        Nominal level.
    seed : int
        Master seed; probes and every replicate derive their own streams.
    method : {"auto", "closed_form", "monte_carlo", "closed", "mc"}
        How n*T_n is evaluated.  ``auto`` uses the closed form for grids of up
        to 512 points.
    fresh_probes : bool
        Draw a new probe set for each replicate instead of reusing the
        observed one (Monte Carlo only).
    threads : int
        Worker threads for the replicate chunks.

    Returns
    -------
    TestResult
    """
    if sample.n < 2:
        raise ValueError(f"need n >= 2 curves, got {sample.n}")
    if int(B) != B or B < MIN_B:
        raise ValueError(f"B must be an integer >= {MIN_B}, got {B}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    sample.grid.check(measure.grid)
    B, M = int(B), int(M)
    method = resolve_method(method, sample.m)
    n, grid = sample.n, sample.grid

    probes = None
    if method == "closed_form":
        wkw = kernel_matrix(measure).weighted()
        observed = nt_closed_form(sample, measure)
    else:
        probes = sample_probes(measure, M, seed, stream=(seeding.PROBES, 0))
        observed = nt_mc(sample, probes)

    factor = spectral_factor(sample_covariance(sample))

    def run_chunk(start):
        stop = min(start + CHUNK, B)
        draws = np.stack([
            factor.sample(n, seeding.generator(seed, seeding.BOOTSTRAP, b))
            for b in range(start, stop)
        ])
        centred = draws - draws.mean(axis=1, keepdims=True)
        if method == "closed_form":
            return closed_form_values(centred, wkw)
        if not fresh_probes:
            v = mc_values(centred, grid.weights, probes.probes)
            return (v ** 2).mean(axis=1)
        out = np.empty(stop - start)
        for i, b in enumerate(range(start, stop)):
            own = _fresh_probes(measure, M, seed, b)
            out[i] = (mc_values(centred[i], grid.weights, own.probes) ** 2).mean()
        return out

    starts = range(0, B, CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(run_chunk, starts))
    else:
        chunks = [run_chunk(s) for s in starts]
    boot = np.concatenate(chunks)
    boot = np.array([_nonneg(v, n) for v in boot])

    pv = p_value(observed.n_T_n, boot)
    config = {
        "n": n, "m": sample.m, "M": M, "B": B, "alpha": float(alpha),
        "measure": measure.family, "measure_param": float(measure.param),
        "seed": int(seed), "method": method, "fresh_probes": bool(fresh_probes),
        "quadrature_weights_sum": float(grid.weights.sum()),
    }
    diagnostics = {
        "covariance_rank": factor.rank,
        "clipped_eigenvalue_mass": factor.clipped_mass,
        "covariance_trace": factor.trace,
    }
    return TestResult(observed, boot, pv, float(alpha), pv <= alpha, config, diagnostics)


def _fresh_probes(measure: GaussianMeasure, M: int, seed: int, b: int) -> ProbeSet:
    return sample_probes(measure, M, seed, stream=(seeding.PROBES, b + 1))
