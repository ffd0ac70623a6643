"""The characteristic-functional statistic n*T_n and its analytic companions.

n*T_n = integral of V_n(f)^2 Q(df), with

    V_n(f) = n^{-1/2} sum_j { cos<f, X_j - Xbar> + sin<f, X_j - Xbar>
                              - exp(-<C_n f, f> / 2) }.

Two evaluation routes are provided.  ``nt_mc`` averages V_n^2 over probes
f_1..f_M drawn from Q.  ``nt_closed_form`` evaluates the Q-integrals exactly
for a Gaussian Q on the grid: every term reduces to the n x n Gram matrix
G = Y K_Q Y' of the centred, weighted curves Y = (X - Xbar) W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .exceptions import NumericalError
from .fda import (
    CovarianceOperator,
    FunctionalSample,
    cov_bilinear,
    inner_product,
    sample_covariance,
    sample_mean,
)
from .measures import GaussianMeasure, ProbeSet, kernel_matrix

EXP_FLOOR = _accel.EXP_FLOOR
METHODS = ("monte_carlo", "closed_form")


@dataclass(frozen=True)
class StatisticValue:
    """The statistic on the n*T_n scale plus how it was computed."""

    n_T_n: float
    method: str
    M: int | None = None
    mc_std_error: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.n_T_n < 0:
            raise ValueError("n_T_n must be nonnegative")
        if (self.mc_std_error is not None) != (self.method == "monte_carlo"):
            raise ValueError("mc_std_error is present exactly for Monte Carlo values")

    def to_dict(self) -> dict:
        return {"n_T_n": self.n_T_n, "method": self.method, "M": self.M,
                "mc_std_error": self.mc_std_error}


def _exp(x):
    return np.exp(np.maximum(x, EXP_FLOOR))


def _nonneg(value: float, scale: float) -> float:
    # rounding can push an exact zero slightly negative
    if value < 0:
        if value < -1e-10 * max(scale, 1.0):
            raise NumericalError(f"statistic evaluated to {value!r} (scale {scale!r})")
        return 0.0
    return float(value)


# --------------------------------------------------------------------------
# scalar building blocks


def ecf(sample: FunctionalSample, f) -> complex:
    """Empirical characteristic functional n^{-1} sum_j exp(i <f, X_j>)."""
    f = sample.grid.check_curve(f, "f")
    proj = sample.curves @ (sample.grid.weights * f)
    return complex(np.mean(np.exp(1j * proj)))


def gaussian_cf(mean, cov: CovarianceOperator, f) -> complex:
    """exp(i <mean, f> - <C f, f> / 2)."""
    grid = cov.grid
    mean = grid.check_curve(mean, "mean")
    loc = inner_product(mean, f, grid)
    return complex(np.exp(1j * loc - 0.5 * cov_bilinear(cov, f, f)))


def v_n(sample: FunctionalSample, f, center=None, cov: CovarianceOperator | None = None) -> float:
    """V_n(f).  ``center``/``cov`` default to the sample mean and covariance."""
    grid = sample.grid
    f = grid.check_curve(f, "f")
    center = sample_mean(sample) if center is None else grid.check_curve(center, "center")
    if cov is None:
        cov = sample_covariance(sample)
    grid.check(cov.grid)
    proj = (sample.curves - center) @ (grid.weights * f)
    sig2 = cov_bilinear(cov, f, f)
    terms = np.cos(proj) + np.sin(proj) - math.exp(max(-0.5 * sig2, EXP_FLOOR))
    return float(terms.sum() / math.sqrt(sample.n))


def null_cov_kernel(cov: CovarianceOperator, f, g) -> float:
    """Covariance kernel of the limiting Gaussian element under the null."""
    sff = cov_bilinear(cov, f, f)
    sgg = cov_bilinear(cov, g, g)
    sfg = cov_bilinear(cov, f, g)
    return _null_kernel(sff, sgg, sfg)


def _null_kernel(sff, sgg, sfg):
    # expm1(s) - s - s^2/2 loses everything to cancellation for small s
    brace = np.where(np.abs(sfg) < 1e-3,
                     sfg ** 3 / 6 + sfg ** 4 / 24 + sfg ** 5 / 120,
                     np.expm1(sfg) - sfg - 0.5 * sfg ** 2)
    out = np.exp(-0.5 * (sff + sgg)) * brace
    return float(out) if np.ndim(out) == 0 else out


def influence_null(f, x, cov: CovarianceOperator) -> float:
    """Psi(f, x); with cov = C_n this is the bootstrap analogue Psi_hat_n."""
    grid = cov.grid
    f = grid.check_curve(f, "f")
    x = grid.check_curve(x, "x")
    p = inner_product(f, x, grid)
    sig2 = cov_bilinear(cov, f, f)
    return float(math.cos(p) + math.sin(p)
                 - math.exp(-0.5 * sig2) * (1.0 + p - 0.5 * (p * p - sig2)))


def influence_null_matrix(proj, sig2):
    """Psi for a block of projections ``proj[j, k] = <f_k, x_j>``."""
    damp = np.exp(-0.5 * np.asarray(sig2))
    return np.cos(proj) + np.sin(proj) - damp * (1.0 + proj - 0.5 * (proj ** 2 - sig2))


def z_hat(sample: FunctionalSample, f) -> float:
    """Plug-in z(f), centred by the sample mean; equals V_n(f) / sqrt(n)."""
    if sample.n < 2:
        raise ValueError("z_hat needs n >= 2")
    return v_n(sample, f) / math.sqrt(sample.n)


def influence_alt(f, x, sample: FunctionalSample) -> float:
    """Plug-in xi_hat(f, x) driving the limit law under alternatives."""
    grid = sample.grid
    f = grid.check_curve(f, "f")
    x = grid.check_curve(x, "x")
    proj = sample.centred() @ (grid.weights * f)
    mc = np.cos(proj).mean()
    ms = np.sin(proj).mean()
    sig2 = float(np.mean(proj ** 2))
    p = inner_product(f, x, grid)
    return float(math.cos(p) - mc + math.sin(p) - ms + p * (ms - mc)
                 + 0.5 * math.exp(-0.5 * sig2) * (p * p - sig2))


# --------------------------------------------------------------------------
# batched engines shared with the bootstrap


def projections(centred, weights, probes):
    """<f_k, x_j> for every curve/probe pair; leading batch axes are kept."""
    return centred @ (probes * weights).T


def mc_values(centred, weights, probes):
    """V_n(f_k) for a batch of centred samples, shape (B, M)."""
    centred = np.asarray(centred, dtype=float)
    if centred.ndim == 2:
        centred = centred[None]
    proj = np.ascontiguousarray(projections(centred, weights, probes))
    return _accel.vn_batch(proj)


def closed_form_from_gram(gram) -> np.ndarray:
    """n*T_n for each Gram matrix G = Y K_Q Y' in a (B, n, n) stack."""
    gram = np.asarray(gram, dtype=float)
    if gram.ndim == 2:
        gram = gram[None]
    gram = 0.5 * (gram + np.swapaxes(gram, 1, 2))
    n = gram.shape[-1]
    eye = np.eye(n)
    a1 = eye + gram / n
    try:
        sign1, logdet1 = np.linalg.slogdet(a1)
        sign2, logdet2 = np.linalg.slogdet(eye + 2.0 * gram / n)
        h = np.linalg.solve(a1, gram)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"closed-form factorisation failed (n={n}): {exc}") from exc
    if np.any(sign1 <= 0) or np.any(sign2 <= 0):
        raise NumericalError("closed-form determinant is not positive; Gram matrix is not PSD "
                             f"(min diagonal {np.diagonal(gram, axis1=1, axis2=2).min():.3e})")
    quad = np.diagonal(gram, axis1=1, axis2=2) - np.einsum("bkj,bkj->bj", gram, h) / n
    pair = _accel.pair_exp_sum(np.ascontiguousarray(gram))
    middle = np.exp(-0.5 * logdet1) * _exp(-0.5 * quad).sum(axis=1)
    return pair / n - 2.0 * middle + n * np.exp(-0.5 * logdet2)


def gram_matrices(centred, weighted_kernel):
    centred = np.asarray(centred, dtype=float)
    if centred.ndim == 2:
        centred = centred[None]
    return centred @ weighted_kernel @ np.swapaxes(centred, 1, 2)


def closed_form_values(centred, weighted_kernel) -> np.ndarray:
    return closed_form_from_gram(gram_matrices(centred, weighted_kernel))


# --------------------------------------------------------------------------
# public statistic evaluations


def nt_mc(sample: FunctionalSample, probes: ProbeSet) -> StatisticValue:
    """Monte Carlo n*T_n: the average of V_n(f_m)^2 over the probes."""
    sample.grid.check(probes.grid)
    v = mc_values(sample.centred(), sample.grid.weights, probes.probes)[0]
    return _mc_value(v ** 2)


def _mc_value(v2) -> StatisticValue:
    M = v2.size
    se = float(v2.std(ddof=1) / math.sqrt(M)) if M >= 2 else float("nan")
    return StatisticValue(float(v2.mean()), "monte_carlo", M, se)


def nt_closed_form(sample: FunctionalSample, measure: GaussianMeasure) -> StatisticValue:
    """Exact n*T_n for a Gaussian probe measure on the sample's grid."""
    sample.grid.check(measure.grid)
    wkw = kernel_matrix(measure).weighted()
    value = closed_form_values(sample.centred(), wkw)[0]
    return StatisticValue(_nonneg(value, sample.n), "closed_form")


def tau_hat(sample: FunctionalSample, probes: ProbeSet) -> float:
    """Plug-in estimate of the almost-sure limit tau_Q = ||z||_Q^2."""
    return nt_mc(sample, probes).n_T_n / sample.n


def alternative_terms(sample: FunctionalSample, probes: ProbeSet):
    """(z_hat per probe, xi_hat matrix [j, k] evaluated at X_j - Xbar)."""
    sample.grid.check(probes.grid)
    proj = projections(sample.centred(), sample.grid.weights, probes.probes)
    cos, sin = np.cos(proj), np.sin(proj)
    mc, ms = cos.mean(axis=0), sin.mean(axis=0)
    sig2 = np.mean(proj ** 2, axis=0)
    damp = _exp(-0.5 * sig2)
    z = mc + ms - damp
    xi = cos - mc + sin - ms + proj * (ms - mc) + 0.5 * damp * (proj ** 2 - sig2)
    return z, xi


def sigma2_hat(sample: FunctionalSample, probes: ProbeSet) -> float:
    """Plug-in asymptotic variance of sqrt(n) (T_n - tau_Q) under alternatives.

    The Monte Carlo double integral 4 M^-2 sum_{a,b} K*(f_a, f_b) z(f_a) z(f_b)
    with K* estimated by n^-1 sum_j xi(f_a, .) xi(f_b, .) factorises into
    4 / (n M^2) sum_j (sum_a xi_ja z_a)^2, so no M x M matrix is formed.
    """
    if probes.M < 2:
        raise ValueError("sigma2_hat needs M >= 2 probes")
    z, xi = alternative_terms(sample, probes)
    s = xi @ z
    return float(4.0 * np.dot(s, s) / (sample.n * probes.M ** 2))
