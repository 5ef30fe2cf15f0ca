import numpy as np
import pytest

from streampca.errors import (DegenerateSpectrum, InsufficientSamples,
                              ZeroEnergy)
from streampca.evaluation import (CovarianceSpec, accuracy, batch_pca,
                                  convergence, eigengap, log_convergence,
                                  top_eigenpairs)
from streampca.linalg import projection_energy
from streampca.sources import make_spiked_model, spiked_matrix


def random_orthonormal(d, k, rng):
    return np.linalg.qr(rng.standard_normal((d, k)))[0]


class TestBatchPCA:
    def test_hand_computed_covariance(self):
        X = np.array([[2.0, 0.0, -2.0, 0.0], [0.0, 1.0, 0.0, -1.0]])
        basis, values = batch_pca(CovarianceSpec(X), 2)
        np.testing.assert_allclose(values, [8.0 / 3.0, 2.0 / 3.0])
        np.testing.assert_allclose(np.abs(basis), np.eye(2), atol=1e-12)

    def test_noiseless_spike_aligns_with_component(self):
        model = make_spiked_model(20, 1, 0.0, 9)
        X = spiked_matrix(model, 50, np.random.default_rng(10))
        basis, _ = batch_pca(CovarianceSpec(X), 1)
        a_hat = model.A[:, 0] / np.linalg.norm(model.A[:, 0])
        assert abs(float(basis[:, 0] @ a_hat)) > 1.0 - 1e-10

    def test_gram_trick_agrees_with_direct_path(self):
        # Oracle: the direct d x d eigendecomposition, done explicitly here;
        # the wide-input code path must reproduce it.
        rng = np.random.default_rng(11)
        X = rng.standard_normal((30, 12))   # n < d forces the Gram path
        basis, values = batch_pca(CovarianceSpec(X), 5)
        cov = X @ X.T / 11.0
        ref_vals, ref_vecs = np.linalg.eigh(cov)
        order = np.argsort(ref_vals)[::-1][:5]
        np.testing.assert_allclose(values, ref_vals[order], atol=1e-9)
        assert projection_energy(X, basis) == pytest.approx(
            projection_energy(X, ref_vecs[:, order]), abs=1e-9)

    def test_eigenpair_residuals(self):
        rng = np.random.default_rng(12)
        for d, n in ((8, 30), (25, 10)):
            X = rng.standard_normal((d, n))
            k = min(d, n) - 1
            basis, values = batch_pca(CovarianceSpec(X), k)
            cov = X @ X.T / (n - 1)
            for i in range(k):
                residual = np.linalg.norm(cov @ basis[:, i]
                                          - values[i] * basis[:, i])
                assert residual < 1e-8 * max(1.0, abs(values[i]))

    def test_spectral_sum_matches_trace(self):
        rng = np.random.default_rng(13)
        X = rng.standard_normal((6, 40))
        _, values = batch_pca(CovarianceSpec(X), 6)
        cov = X @ X.T / 39.0
        assert values.sum() == pytest.approx(np.trace(cov), rel=1e-8)

    def test_centered_spec(self):
        rng = np.random.default_rng(14)
        X = rng.standard_normal((5, 30)) + 10.0
        basis_c, values_c = batch_pca(CovarianceSpec(X, centered=True), 2)
        Xc = X - X.mean(axis=1, keepdims=True)
        basis_ref, values_ref = batch_pca(CovarianceSpec(Xc), 2)
        np.testing.assert_allclose(values_c, values_ref, atol=1e-12)
        assert projection_energy(Xc, basis_c) == pytest.approx(
            projection_energy(Xc, basis_ref), rel=1e-12)

    def test_degenerate_spectrum_warns(self):
        X = np.array([[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, -1.0]])
        with pytest.warns(DegenerateSpectrum):
            batch_pca(CovarianceSpec(X), 1)

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamples):
            CovarianceSpec(np.ones((3, 1)))
        with pytest.raises(InsufficientSamples):
            batch_pca(CovarianceSpec(np.ones((3, 5))), 4)

    def test_rank_deficient_gram_path_rejected(self):
        rng = np.random.default_rng(15)
        thin = rng.standard_normal((20, 3))
        X = np.hstack([thin, thin])   # rank 3, n=6 < d=20
        with pytest.raises(InsufficientSamples):
            batch_pca(CovarianceSpec(X), 5)

    def test_top_eigenpairs(self):
        rng = np.random.default_rng(16)
        X = rng.standard_normal((7, 20))
        pairs = top_eigenpairs(CovarianceSpec(X), 3)
        assert len(pairs) == 3
        assert pairs[0].value >= pairs[1].value >= pairs[2].value
        basis, values = batch_pca(CovarianceSpec(X), 3)
        np.testing.assert_allclose([p.value for p in pairs], values)

    def test_eigengap(self):
        assert eigengap([5.0, 3.0, 1.0]) == pytest.approx(2.0)
        with pytest.raises(InsufficientSamples):
            eigengap([5.0])


class TestConvergenceMetrics:
    def test_reference_basis_scores_zero(self):
        rng = np.random.default_rng(17)
        X = rng.standard_normal((6, 25))
        V_star, _ = batch_pca(CovarianceSpec(X), 2)
        assert convergence(X, V_star, V_star) == pytest.approx(0.0, abs=1e-12)

    def test_hand_computed_value(self):
        X = np.array([[3.0, 0.0], [0.0, 1.0]])
        e1 = np.array([[1.0], [0.0]])
        e2 = np.array([[0.0], [1.0]])
        assert convergence(X, e2, e1) == pytest.approx(8.0 / 9.0)

    def test_random_bases_stay_in_unit_interval(self):
        rng = np.random.default_rng(18)
        X = rng.standard_normal((10, 30))
        V_star, _ = batch_pca(CovarianceSpec(X), 3)
        for _ in range(50):
            W = random_orthonormal(10, 3, rng)
            assert 0.0 <= convergence(X, W, V_star) <= 1.0

    def test_oracle_maximality_before_clamping(self):
        # Ky Fan: no orthonormal basis beats the top-k eigenbasis
        rng = np.random.default_rng(19)
        for _ in range(100):
            d = rng.integers(3, 21)
            n = rng.integers(d + 1, 51)
            k = int(rng.integers(1, min(d, 4) + 1))
            X = rng.standard_normal((d, n))
            V_star, _ = batch_pca(CovarianceSpec(X), k)
            W = random_orthonormal(d, k, rng)
            raw = 1.0 - (projection_energy(X, W)
                         / projection_energy(X, V_star))
            assert raw >= -1e-10

    def test_rotation_invariance(self):
        rng = np.random.default_rng(20)
        X = rng.standard_normal((8, 40))
        V_star, _ = batch_pca(CovarianceSpec(X), 3)
        W = random_orthonormal(8, 3, rng)
        rotation = np.linalg.qr(rng.standard_normal((3, 3)))[0]
        assert convergence(X, W @ rotation, V_star) == pytest.approx(
            convergence(X, W, V_star), abs=1e-12)

    def test_zero_energy_raises(self):
        X = np.zeros((3, 4))
        W = np.eye(3)[:, :1]
        with pytest.raises(ZeroEnergy):
            convergence(X, W, W)

    def test_accuracy_complement(self):
        assert accuracy(0.0) == pytest.approx(1.0)
        assert accuracy(8.0 / 9.0) == pytest.approx(1.0 / 9.0)
        assert accuracy(1e-4) == pytest.approx(0.9999)

    def test_log_convergence(self):
        assert log_convergence(1e-3) == pytest.approx(-3.0)
        assert log_convergence(1.0) == pytest.approx(0.0)
        assert log_convergence(0.0) == pytest.approx(-16.0)
