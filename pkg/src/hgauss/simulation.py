"""Data-generating processes and the level/power experiment runner.

Null processes are the standard Wiener process and the stationary
Ornstein-Uhlenbeck process with kernel exp(-|s - t|).  Alternatives are
random Fourier series

    Z(t) = A0 + sqrt(2) sum_{j<=5} C_j cos(2 pi j t) + sqrt(2) sum_{j<=5} S_j sin(2 pi j t)

where a model-dependent subset of the eleven coefficients follows a
non-normal law (half-normal, a half-normal/normal mixture, or Laplace) and
the rest are standard normal.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import seeding
from .bootstrap import bootstrap_test, resolve_method
from .fda import FunctionalSample, Grid, make_grid
from .measures import GaussianMeasure, _wiener_paths, kernel_matrix, sample_gaussian_process

NULL_PROCESSES = ("wiener", "ou")
MODELS = ("alt1", "alt2", "alt3")
VARIANTS = ("base", "mixture", "laplace")
OU_RATE = 1.0
LAPLACE_SCALE = 1.0

# coefficient order: A0, C1..C5, S1..S5
COEFFICIENT_NAMES = ("A0",) + tuple(f"C{j}" for j in range(1, 6)) + tuple(f"S{j}" for j in range(1, 6))
_NONNORMAL = {
    "alt1": COEFFICIENT_NAMES,
    "alt2": ("A0", "C1", "C2", "C3", "S1", "S2", "S3"),
    "alt3": ("A0", "C1", "S1"),
}


@dataclass(frozen=True)
class AlternativeSpec:
    model: str
    variant: str = "base"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    def nonnormal_mask(self) -> np.ndarray:
        chosen = _NONNORMAL[self.model]
        return np.array([name in chosen for name in COEFFICIENT_NAMES])


def gen_null(process: str, n: int, grid: Grid, seed) -> FunctionalSample:
    """``n`` paths of the standard Wiener process or the stationary OU process."""
    if process not in NULL_PROCESSES:
        raise ValueError(f"null process must be one of {NULL_PROCESSES}, got {process!r}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    rng = seeding.generator(seed)
    if process == "wiener":
        return FunctionalSample(grid, _wiener_paths(grid, int(n), 1.0, rng))
    cov = kernel_matrix(GaussianMeasure(grid, "ornstein_uhlenbeck", OU_RATE))
    return sample_gaussian_process(cov, int(n), rng)


def fourier_basis(grid: Grid) -> np.ndarray:
    """The eleven basis functions (rows) in coefficient order A0, C1..C5, S1..S5."""
    t = grid.points
    j = np.arange(1, 6)[:, None]
    return np.vstack([
        np.ones_like(t),
        math.sqrt(2) * np.cos(2 * np.pi * j * t),
        math.sqrt(2) * np.sin(2 * np.pi * j * t),
    ])


def draw_coefficients(spec: AlternativeSpec, n: int, seed) -> np.ndarray:
    """(n, 11) coefficient matrix.

    Coefficient ``c`` always reads its own substream ``(c,)`` and draws the
    same normal, uniform and Laplace variates whatever its law, so models
    sharing a seed differ only in the coefficients whose law switches.
    """
    mask = spec.nonnormal_mask()
    out = np.empty((n, len(COEFFICIENT_NAMES)))
    for c, nonnormal in enumerate(mask):
        rng = seeding.generator(seeding.seed_sequence(seed, c))
        z = rng.standard_normal(n)
        coin = rng.random(n)
        lap = rng.laplace(0.0, LAPLACE_SCALE, n)
        if not nonnormal:
            out[:, c] = z
        elif spec.variant == "base":
            out[:, c] = np.abs(z)
        elif spec.variant == "mixture":
            out[:, c] = np.where(coin < 0.5, np.abs(z), z)
        else:
            out[:, c] = lap
    return out


def gen_alternative(spec: AlternativeSpec, n: int, grid: Grid, seed) -> FunctionalSample:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    coefs = draw_coefficients(spec, int(n), seed)
    return FunctionalSample(grid, coefs @ fourier_basis(grid))


@dataclass(frozen=True)
class ExperimentConfig:
    """One row of a level/power study.

    ``dgp`` is a null process name or an alternative model; ``variant`` only
    applies to alternatives.
    """

    dgp: str
    n: int
    reps: int
    variant: str | None = None
    M: int = 1000
    B: int = 200
    alphas: tuple = (0.05, 0.10)
    m: int = 101
    measure: str = "wiener"
    measure_param: float = 1.0
    method: str = "auto"
    seed: int = 0
    fresh_probes: bool = False

    def __post_init__(self):
        if self.dgp in NULL_PROCESSES:
            if self.variant is not None:
                raise ValueError(f"variant does not apply to null process {self.dgp!r}")
        elif self.dgp in MODELS:
            if self.variant is None:
                object.__setattr__(self, "variant", "base")
            AlternativeSpec(self.dgp, self.variant)
        else:
            raise ValueError(f"unknown dgp {self.dgp!r}")
        for name in ("n", "reps", "M", "B", "m"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}")
        alphas = tuple(float(a) for a in self.alphas)
        if not alphas or not all(0 < a < 1 for a in alphas):
            raise ValueError("alphas must be a nonempty list of levels in (0, 1)")
        object.__setattr__(self, "alphas", alphas)

    def label(self) -> str:
        if self.dgp in NULL_PROCESSES:
            return self.dgp
        return {"base": self.dgp, "mixture": self.dgp + "'", "laplace": self.dgp + '"'}[self.variant]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alphas"] = list(self.alphas)
        d["resolved_method"] = resolve_method(self.method, self.m)
        d["ou_rate"] = OU_RATE
        d["laplace_scale"] = LAPLACE_SCALE
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        keys = {f for f in cls.__dataclass_fields__}
        kwargs = {k: v for k, v in d.items() if k in keys}
        kwargs["alphas"] = tuple(kwargs.get("alphas", (0.05, 0.10)))
        return cls(**kwargs)


@dataclass
class PowerRow:
    config: ExperimentConfig
    rates: dict
    std_errors: dict
    wall_time: float
    records: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "rates": {str(a): r for a, r in self.rates.items()},
            "std_errors": {str(a): s for a, s in self.std_errors.items()},
            "wall_time": self.wall_time,
            "records": list(self.records),
        }

    @classmethod
    def from_dict(cls, d: dict) -> PowerRow:
        return cls(
            config=ExperimentConfig.from_dict(d["config"]),
            rates={float(a): r for a, r in d["rates"].items()},
            std_errors={float(a): s for a, s in d["std_errors"].items()},
            wall_time=d["wall_time"],
            records=list(d.get("records", [])),
        )


class ExperimentAborted(RuntimeError):
    """A replication failed; ``records`` holds everything completed before it."""

    def __init__(self, message, records, partial_path=None):
        super().__init__(message)
        self.records = records
        self.partial_path = partial_path


def replication_seed(master_seed: int, rep: int) -> int:
    return seeding.derive_int(master_seed, seeding.REPLICATION, rep)


def generate(config: ExperimentConfig, grid: Grid, rep_seed: int) -> FunctionalSample:
    data_seed = seeding.seed_sequence(rep_seed, seeding.DATA)
    if config.dgp in NULL_PROCESSES:
        return gen_null(config.dgp, config.n, grid, data_seed)
    return gen_alternative(AlternativeSpec(config.dgp, config.variant), config.n, grid, data_seed)


def run_replication(config: ExperimentConfig, rep: int, grid: Grid | None = None) -> dict:
    grid = make_grid(config.m) if grid is None else grid
    rep_seed = replication_seed(config.seed, rep)
    sample = generate(config, grid, rep_seed)
    measure = GaussianMeasure(grid, config.measure, config.measure_param)
    result = bootstrap_test(sample, measure, M=config.M, B=config.B, alpha=config.alphas[0],
                            seed=rep_seed, method=config.method,
                            fresh_probes=config.fresh_probes)
    return {"rep": rep, "seed": rep_seed, "statistic": result.observed.n_T_n,
            "p_value": result.p_value}


def summarize(config: ExperimentConfig, records, wall_time: float) -> PowerRow:
    pvals = np.array([r["p_value"] for r in records])
    rates, ses = {}, {}
    for a in config.alphas:
        rate = float(np.mean(pvals <= a))
        rates[a] = rate
        ses[a] = math.sqrt(rate * (1 - rate) / len(pvals))
    return PowerRow(config, rates, ses, wall_time, list(records))


def run_experiment(config: ExperimentConfig, threads: int = 1, partial_path=None) -> PowerRow:
    """Run ``config.reps`` independent replications and tabulate rejection rates.

    On a failing replication the completed records are written to
    ``partial_path`` (when given) and :class:`ExperimentAborted` is raised.
    """
    grid = make_grid(config.m)
    start = time.perf_counter()
    records = []

    def one(rep):
        try:
            return run_replication(config, rep, grid)
        except Exception as exc:  # noqa: BLE001 - recorded and re-raised below
            return {"rep": rep, "seed": replication_seed(config.seed, rep),
                    "error": f"{type(exc).__name__}: {exc}"}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(one, range(config.reps))
            records = _collect(results, config, partial_path)
    else:
        records = _collect(map(one, range(config.reps)), config, partial_path)
    return summarize(config, records, time.perf_counter() - start)


def _collect(results, config, partial_path):
    records = []
    for rec in results:
        if "error" in rec:
            if partial_path is not None:
                Path(partial_path).write_text(json.dumps(
                    {"config": config.to_dict(), "completed": records, "failure": rec},
                    indent=2))
            raise ExperimentAborted(f"replication {rec['rep']} failed: {rec['error']}",
                                    records, partial_path)
        records.append(rec)
    return records
