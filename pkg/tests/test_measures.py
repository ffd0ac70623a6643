import math
import warnings

import numpy as np
import pytest

from hgauss import seeding
from hgauss.exceptions import NumericalWarning
from hgauss.fda import CovarianceOperator, FunctionalSample, make_grid, sample_covariance
from hgauss.measures import (
    GaussianMeasure,
    kernel_matrix,
    sample_gaussian_process,
    sample_probes,
    spectral_factor,
)


@pytest.fixture
def grid():
    return make_grid(101)


class TestKernelMatrix:
    def test_wiener_values(self, grid):
        k = kernel_matrix(GaussianMeasure(grid)).kernel
        assert k[-1, -1] == 1.0
        assert np.all(k[0, :] == 0.0)
        assert k[30, 70] == pytest.approx(0.3)

    def test_bridge_midpoint(self):
        g = make_grid(3)
        k = kernel_matrix(GaussianMeasure(g, "bridge")).kernel
        assert k[1, 1] == pytest.approx(0.25, abs=1e-15)

    def test_ou_stationary(self, grid):
        k = kernel_matrix(GaussianMeasure(grid, "ou", 2.0)).kernel
        np.testing.assert_allclose(np.diag(k), 1.0)
        assert k[0, 50] == pytest.approx(math.exp(-1.0))

    def test_scale_param(self, grid):
        k1 = kernel_matrix(GaussianMeasure(grid)).kernel
        k4 = kernel_matrix(GaussianMeasure(grid, "wiener", 4.0)).kernel
        np.testing.assert_allclose(k4, 4 * k1)

    def test_custom_kernel(self):
        g = make_grid(4)
        k = np.eye(4) * 2
        assert np.array_equal(kernel_matrix(GaussianMeasure(g, "custom_kernel", kernel=k)).kernel, k)

    @pytest.mark.parametrize("kwargs", [
        dict(family="cauchy"),
        dict(family="wiener", param=0.0),
        dict(family="wiener", param=-1.0),
        dict(family="custom_kernel"),
        dict(family="custom_kernel", kernel=np.array([[1.0, 3.0], [3.0, 1.0]])),
        dict(family="wiener", kernel=np.eye(2)),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            GaussianMeasure(make_grid(2), **kwargs)


class TestProbes:
    @pytest.mark.parametrize("family", ["wiener", "ou", "bridge"])
    def test_deterministic(self, grid, family):
        q = GaussianMeasure(grid, family)
        a = sample_probes(q, 3, 42)
        b = sample_probes(q, 3, 42)
        assert np.array_equal(a.probes, b.probes)
        assert a.seed_record == b.seed_record
        assert a.seed_record["seed"] == 42

    def test_streams_differ(self, grid):
        q = GaussianMeasure(grid)
        a = sample_probes(q, 3, 42, stream=(seeding.PROBES, 0))
        b = sample_probes(q, 3, 42, stream=(seeding.PROBES, 1))
        assert not np.array_equal(a.probes, b.probes)

    def test_wiener_starts_at_zero(self, grid):
        p = sample_probes(GaussianMeasure(grid), 50, 1).probes
        assert np.all(p[:, 0] == 0.0)

    def test_wiener_terminal_variance(self, grid):
        p = sample_probes(GaussianMeasure(grid), 20000, 3).probes
        v = p[:, -1].var(ddof=1)
        # SE of a normal sample variance is sqrt(2 / (N - 1)) times the variance
        assert abs(v - 1.0) <= 3 * math.sqrt(2 / 19999)

    def test_wiener_covariance_matches_kernel(self):
        g = make_grid(11)
        q = GaussianMeasure(g)
        p = sample_probes(q, 40000, 5).probes
        emp = p.T @ p / p.shape[0]
        k = kernel_matrix(q).kernel
        se = np.sqrt((k ** 2 + np.outer(np.diag(k), np.diag(k))) / p.shape[0])
        assert np.all(np.abs(emp - k) <= 4.5 * se + 1e-12)

    def test_sign_flip_symmetry(self, grid):
        # -f has the same law as f: odd summaries vanish, even ones are unchanged
        q = GaussianMeasure(grid, "ou")
        p = sample_probes(q, 20000, 9).probes
        mean_end = p[:, -1].mean()
        assert abs(mean_end) <= 4 / math.sqrt(20000)
        third = (p[:, 50] ** 3).mean()
        assert abs(third) <= 4 * math.sqrt(15 / 20000)

    def test_bad_count(self, grid):
        with pytest.raises(ValueError):
            sample_probes(GaussianMeasure(grid), 0, 1)


class TestGaussianProcess:
    def test_zero_kernel(self):
        g = make_grid(6)
        s = sample_gaussian_process(CovarianceOperator(g, np.zeros((6, 6))), 4, 0)
        assert np.all(s.curves == 0.0)

    def test_wiener_midpoint_variance(self, grid):
        cov = kernel_matrix(GaussianMeasure(grid))
        s = sample_gaussian_process(cov, 50000, 11)
        v = s.curves[:, 50].var(ddof=1)
        assert abs(v - 0.5) <= 3 * 0.5 * math.sqrt(2 / 49999)

    def test_sample_covariance_recovers_kernel(self):
        g = make_grid(21)
        cov = kernel_matrix(GaussianMeasure(g))
        n = 20000
        s = sample_gaussian_process(cov, n, 12)
        emp = sample_covariance(s).kernel
        k = cov.kernel
        se = np.sqrt((k ** 2 + np.outer(np.diag(k), np.diag(k))) / n)
        assert np.max(np.abs(emp - k) - 4 * se) <= 1e-12

    def test_deterministic(self, grid):
        cov = kernel_matrix(GaussianMeasure(grid, "ou"))
        a = sample_gaussian_process(cov, 5, 3).curves
        b = sample_gaussian_process(cov, 5, 3).curves
        assert np.array_equal(a, b)

    def test_factor_reproduces_kernel(self, grid):
        cov = kernel_matrix(GaussianMeasure(grid, "bridge"))
        f = spectral_factor(cov)
        np.testing.assert_allclose(f.factor @ f.factor.T, cov.kernel, atol=1e-12)

    def test_clipping_small_on_sample_covariances(self, rng, grid):
        cov = kernel_matrix(GaussianMeasure(grid))
        s = sample_gaussian_process(cov, 30, 4)
        with warnings.catch_warnings():
            warnings.simplefilter("error", NumericalWarning)
            f = spectral_factor(sample_covariance(s))
        assert f.clipped_mass <= 1e-6 * f.trace
        assert f.rank == 29

    def test_clipping_warns_when_large(self):
        g = make_grid(3)
        k = np.diag([1.0, 1.0, -1e-4])
        op = CovarianceOperator(g, k, validate=False)
        with pytest.warns(NumericalWarning):
            f = spectral_factor(op)
        assert f.clipped_mass == pytest.approx(1e-4)
        assert f.rank == 2

    def test_translation_does_not_change_draws(self, rng, grid):
        s = FunctionalSample(grid, rng.normal(size=(20, 101)).cumsum(axis=1) / 10)
        shifted = s.shifted(5 * np.sin(3 * grid.points))
        a = sample_gaussian_process(sample_covariance(s), 10, 8).curves
        b = sample_gaussian_process(sample_covariance(shifted), 10, 8).curves
        np.testing.assert_allclose(a, b, atol=1e-10)


class TestSeeding:
    def test_streams_are_distinct(self):
        draws = {
            key: seeding.generator(7, *key).random(4).tobytes()
            for key in [(seeding.PROBES, 0), (seeding.BOOTSTRAP, 0), (seeding.DATA,),
                        (seeding.REPLICATION, 0), (seeding.BOOTSTRAP, 1)]
        }
        assert len(set(draws.values())) == len(draws)

    def test_same_key_same_stream(self):
        assert seeding.generator(7, 2, 5).random() == seeding.generator(7, 2, 5).random()

    def test_seed_sequence_extends_keys(self):
        parent = seeding.seed_sequence(9, 3)
        assert seeding.seed_sequence(parent, 1).spawn_key == (3, 1)

    def test_rejects_bad_seeds(self):
        with pytest.raises(ValueError):
            seeding.generator(-1)
        with pytest.raises(TypeError):
            seeding.generator(1.5)
