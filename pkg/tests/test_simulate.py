import numpy as np
import pytest

from tiltsel.linalg import normalize_columns
from tiltsel.simulate import (
    ModelKind,
    NotPositiveDefinite,
    SimSpec,
    SingularSupportGram,
    TrueModel,
    ZeroSignal,
    calibrate_noise,
    fan_covariance,
    generate_coefficients,
    generate_design,
    generate_replicate,
    signal_vector,
    threshold_seed,
)


class TestFanCovariance:
    def test_phi_zero_is_identity(self):
        np.testing.assert_array_equal(fan_covariance(6, 0.0), np.eye(6))

    def test_structure(self):
        sigma = fan_covariance(6, 0.25)
        assert sigma[0, 1] == 0.25
        assert sigma[0, 3] == sigma[3, 5] == 0.5
        assert np.all(np.diag(sigma) == 1.0)
        np.testing.assert_array_equal(sigma, sigma.T)

    def test_zero_column_variant(self):
        sigma = fan_covariance(6, 0.25, zero_column=True)
        assert sigma[4, 4] == 1.0
        assert np.all(sigma[4, [0, 1, 2, 3, 5]] == 0.0)
        assert sigma[3, 4] == 0.0  # zeroing wins over the sqrt(phi) row

    def test_invalid_phi_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            fan_covariance(6, -0.1)
        with pytest.raises(NotPositiveDefinite):
            fan_covariance(6, 1.2)


class TestGenerateDesign:
    def test_deterministic(self):
        spec = SimSpec(model=ModelKind.FACTOR2, n=20, p=8, sparsity=4, r_squared=0.9, replicate_seed=5)
        np.testing.assert_array_equal(generate_design(spec), generate_design(spec))

    def test_factor_correlations_match_loadings(self):
        # Monte-Carlo against the analytic two-factor correlation
        # (f_j . f_k) / sqrt((|f_j|^2 + 1)(|f_k|^2 + 1)).
        spec = SimSpec(model=ModelKind.FACTOR2, n=2000, p=10, r_squared=0.9, replicate_seed=1)
        raw = generate_design(spec)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=1, spawn_key=(0,)))
        rng.standard_normal((2000, 2))  # factor draw
        loadings = rng.standard_normal((10, 2))
        analytic = np.zeros((10, 10))
        for j in range(10):
            for k in range(10):
                analytic[j, k] = loadings[j] @ loadings[k] / np.sqrt(
                    (loadings[j] @ loadings[j] + 1) * (loadings[k] @ loadings[k] + 1)
                )
        sample = np.corrcoef(raw, rowvar=False)
        iu = np.triu_indices(10, 1)
        assert abs(np.abs(sample[iu]).mean() - np.abs(analytic[iu]).mean()) < 0.05

    def test_fan_d_fourth_column_uncorrelated_with_response(self):
        spec = SimSpec(model=ModelKind.FAN_D, n=10000, p=8, phi=0.5, replicate_seed=2)
        raw, _, y, _ = generate_replicate(spec)
        corr = np.corrcoef(raw[:, 3], y)[0, 1]
        assert abs(corr) < 0.05

    def test_external_rescales_to_sqrt_n(self, tmp_path):
        rng = np.random.default_rng(3)
        raw = rng.standard_normal((12, 4)) * np.array([1.0, 9.0, 0.5, 2.0])
        path = tmp_path / "X.csv"
        np.savetxt(path, raw, delimiter=",")
        spec = SimSpec(
            model=ModelKind.EXTERNAL, n=12, p=4, sparsity=2,
            r_squared=0.6, replicate_seed=0, external_path=path,
        )
        loaded = generate_design(spec)
        np.testing.assert_allclose(np.linalg.norm(loaded, axis=0), np.sqrt(12), rtol=1e-12)

    def test_external_shape_mismatch(self, tmp_path):
        path = tmp_path / "X.csv"
        np.savetxt(path, np.ones((5, 3)), delimiter=",")
        spec = SimSpec(
            model=ModelKind.EXTERNAL, n=6, p=3, sparsity=2,
            r_squared=0.6, replicate_seed=0, external_path=path,
        )
        with pytest.raises(ValueError):
            generate_design(spec)


class TestGenerateCoefficients:
    def test_fan_d_fixed_pattern(self):
        spec = SimSpec(model=ModelKind.FAN_D, n=50, p=10, phi=0.25, replicate_seed=4)
        X = normalize_columns(generate_design(spec))
        truth = generate_coefficients(X, spec)
        assert truth.support == (0, 1, 2, 3)
        np.testing.assert_allclose(truth.beta[:4], [2.5, 2.5, 2.5, -3.75], rtol=1e-12)
        np.testing.assert_array_equal(truth.beta[4:], 0.0)

    def test_fan_e_pattern_includes_small_fifth(self):
        spec = SimSpec(model=ModelKind.FAN_E, n=50, p=10, phi=0.25, replicate_seed=4)
        X = normalize_columns(generate_design(spec))
        truth = generate_coefficients(X, spec)
        assert truth.support == (0, 1, 2, 3, 4)
        assert truth.beta[4] == pytest.approx(0.625)

    def test_orthogonal_design_gives_gaussian_scale(self):
        # With an identity support Gram the solve is a pass-through, so the
        # pooled coefficient variance must match 1/n.
        n = 12
        X = normalize_columns(np.eye(n)[:, :10])
        pooled = []
        for seed in range(200):
            spec = SimSpec(model=ModelKind.FACTOR2, n=n, p=10, sparsity=3,
                           r_squared=0.9, replicate_seed=seed)
            truth = generate_coefficients(X, spec)
            pooled.extend(truth.beta[list(truth.support)])
        ratio = np.var(pooled) * n
        assert 0.8 < ratio < 1.25

    def test_deterministic(self):
        spec = SimSpec(model=ModelKind.FACTOR2, n=30, p=12, r_squared=0.9, replicate_seed=9)
        X = normalize_columns(generate_design(spec))
        a = generate_coefficients(X, spec)
        b = generate_coefficients(X, spec)
        assert a.support == b.support
        np.testing.assert_array_equal(a.beta, b.beta)

    def test_singular_support_exhausts_resampling(self):
        col = np.random.default_rng(6).standard_normal((10, 1))
        X = normalize_columns(np.hstack([col, col, col]))
        spec = SimSpec(model=ModelKind.FACTOR2, n=10, p=3, sparsity=2,
                       r_squared=0.9, replicate_seed=7)
        with pytest.raises(SingularSupportGram):
            generate_coefficients(X, spec)


class TestCalibrateNoise:
    @staticmethod
    def _unit_signal_model(n=100, beta_normalized=2.0):
        # Alternating-sign column: entries +-1/sqrt(n), signal variance is
        # exactly beta^2 / n.
        col = np.tile([1.0, -1.0], n // 2)
        X = normalize_columns(col[:, None])
        beta = np.array([beta_normalized / X.column_norms_original[0]])
        truth = TrueModel(support=(0,), beta=beta, sigma=float("nan"),
                          r_squared_target=None, seed=0)
        return X, truth

    def test_hand_computed_sigma(self):
        X, truth = self._unit_signal_model()  # v = 4/100 = 0.04
        assert np.var(signal_vector(X, truth)) == pytest.approx(0.04)
        sigma = calibrate_noise(X, truth, 0.8)
        assert sigma**2 == pytest.approx(1.0, rel=1e-12)

    def test_half_r_squared_equates_signal_and_noise(self):
        X, truth = self._unit_signal_model()
        sigma = calibrate_noise(X, truth, 0.5)
        assert sigma**2 / 100 == pytest.approx(0.04, rel=1e-12)

    def test_noiseless_limit(self):
        X, truth = self._unit_signal_model()
        assert calibrate_noise(X, truth, 0.999999) < 1e-2

    def test_zero_signal_rejected(self):
        X, truth = self._unit_signal_model(beta_normalized=0.0)
        with pytest.raises(ZeroSignal):
            calibrate_noise(X, truth, 0.5)


class TestGenerateReplicate:
    def test_bit_identical_reproduction(self):
        spec = SimSpec(model=ModelKind.FACTOR10, n=40, p=15, r_squared=0.6, replicate_seed=11)
        raw_a, X_a, y_a, truth_a = generate_replicate(spec)
        raw_b, X_b, y_b, truth_b = generate_replicate(spec)
        np.testing.assert_array_equal(raw_a, raw_b)
        np.testing.assert_array_equal(y_a, y_b)
        np.testing.assert_array_equal(truth_a.beta, truth_b.beta)
        assert truth_a.sigma == truth_b.sigma

    def test_response_consistent_in_both_bases(self):
        spec = SimSpec(model=ModelKind.FACTOR2, n=30, p=10, r_squared=0.9, replicate_seed=12)
        raw, X, y, truth = generate_replicate(spec)
        np.testing.assert_allclose(raw @ truth.beta, signal_vector(X, truth), atol=1e-10)

    def test_average_realized_r_squared(self):
        target = 0.6
        realized = []
        for seed in range(200):
            spec = SimSpec(model=ModelKind.FACTOR2, n=100, p=12, r_squared=target,
                           replicate_seed=seed)
            _, X, y, truth = generate_replicate(spec)
            sig = signal_vector(X, truth)
            realized.append(np.var(sig) / np.var(y))
        assert abs(np.mean(realized) - target) < 0.05

    def test_fan_default_noise_is_unit_per_observation(self):
        spec = SimSpec(model=ModelKind.FAN_D, n=400, p=8, phi=0.5, replicate_seed=13)
        _, X, y, truth = generate_replicate(spec)
        assert truth.sigma == pytest.approx(np.sqrt(400))
        noise = y - signal_vector(X, truth)
        assert np.var(noise) == pytest.approx(1.0, rel=0.25)

    def test_factor_requires_r_squared(self):
        spec = SimSpec(model=ModelKind.FACTOR2, n=20, p=8, sparsity=4, replicate_seed=14)
        with pytest.raises(ValueError):
            generate_replicate(spec)


class TestSimSpecValidation:
    def test_fan_requires_phi(self):
        with pytest.raises(ValueError):
            SimSpec(model=ModelKind.FAN_D, n=20, p=8)

    def test_fan_sparsity_is_fixed(self):
        spec = SimSpec(model=ModelKind.FAN_E, n=20, p=8, phi=0.3, sparsity=7)
        assert spec.sparsity == 5

    def test_p_at_least_sparsity(self):
        with pytest.raises(ValueError):
            SimSpec(model=ModelKind.FACTOR2, n=20, p=4, sparsity=10)

    def test_r_squared_bounds(self):
        with pytest.raises(ValueError):
            SimSpec(model=ModelKind.FACTOR2, n=20, p=8, r_squared=1.2)

    def test_model_accepts_string(self):
        assert SimSpec(model="factor20", n=20, p=12, r_squared=0.3).model is ModelKind.FACTOR20


def test_threshold_seed_deterministic_and_distinct():
    assert threshold_seed(123) == threshold_seed(123)
    assert threshold_seed(123) != threshold_seed(124)
