"""Deterministic random stream contracts."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from muonlab import PreconditionError, RandomStream


class TestDeterminism:
    def test_same_seed_same_sequence(self):
        a = RandomStream(42, 7)
        b = RandomStream(42, 7)
        assert [a.uniform(0.0, 1.0) for _ in range(10)] == [
            b.uniform(0.0, 1.0) for _ in range(10)
        ]
        assert_allclose(a.gaussians(11), b.gaussians(11), rtol=0)
        assert_allclose(a.haar_orthonormal(5, 3), b.haar_orthonormal(5, 3), rtol=0)

    def test_distinct_stream_ids_differ(self):
        master = RandomStream(42)
        assert master.derive(1).gaussian() != master.derive(2).gaussian()

    def test_scalar_vector_gaussian_consistency(self):
        a = RandomStream(9)
        b = RandomStream(9)
        scalars = np.array([a.gaussian() for _ in range(5)])
        assert_allclose(scalars, b.gaussians(5), rtol=0)


class TestUniform:
    def test_interval(self):
        stream = RandomStream(1)
        draws = [stream.uniform(1.0, 2.0) for _ in range(1000)]
        assert all(1.0 <= v < 2.0 for v in draws)

    def test_mean(self):
        # law of large numbers: mean of U[1,2) is 1.5
        stream = RandomStream(2)
        assert abs(stream.uniforms(100_000, 1.0, 2.0).mean() - 1.5) <= 0.01

    def test_rejects_bad_interval(self):
        with pytest.raises(PreconditionError):
            RandomStream(0).uniform(2.0, 1.0)


class TestGaussian:
    def test_moments(self):
        z = RandomStream(3).gaussians(100_000)
        assert abs(z.mean()) <= 0.02  # 3 sigma / sqrt(n) headroom
        assert abs(z.var() - 1.0) <= 0.03


class TestHaar:
    @pytest.mark.parametrize("d,k", [(3, 3), (5, 2), (64, 64), (200, 200), (200, 37)])
    def test_orthonormal_columns(self, d, k):
        q = RandomStream(4).haar_orthonormal(d, k)
        assert np.linalg.norm(q.T @ q - np.eye(k)) <= 1e-10

    def test_rejects_wide(self):
        with pytest.raises(PreconditionError):
            RandomStream(0).haar_orthonormal(2, 3)

    def test_first_entry_second_moment(self):
        # a Haar column's first coordinate is uniform on the sphere:
        # E[Q_11^2] = 1/d, Var[Q_11^2] = 2(d-1)/(d^2(d+2))
        d, n = 4, 10_000
        stream = RandomStream(5)
        vals = np.array([stream.haar_orthonormal(d, 2)[0, 0] ** 2 for _ in range(n)])
        se = np.sqrt(2.0 * (d - 1) / (d**2 * (d + 2)) / n)
        assert abs(vals.mean() - 1.0 / d) <= 3.0 * se

    def test_rotation_invariance_statistic(self):
        d, n = 4, 10_000
        w = RandomStream(99).haar_orthonormal(d, d)
        stream = RandomStream(6)
        plain, rotated = np.empty(n), np.empty(n)
        for i in range(n):
            q = stream.haar_orthonormal(d, 2)
            plain[i] = q[0, 0] ** 2
            rotated[i] = (w @ q)[0, 0] ** 2
        se = np.sqrt(plain.var(ddof=1) / n + rotated.var(ddof=1) / n)
        assert abs(plain.mean() - rotated.mean()) <= 3.0 * se
