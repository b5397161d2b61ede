import numpy as np
import pytest

from irmite.datagen import (CovarianceSet, Dataset, GenSpec, build_covariances,
                            gen_features, gen_outcome_params, gen_outcomes,
                            gen_treatment, generate)
from irmite.errors import DimensionMismatch, InvalidArg
from irmite.numerics import Rng, cholesky


def spec_for(d=2, feature_model="A", outcome_model="linear", **kw):
    return GenSpec(d=d, feature_model=feature_model, outcome_model=outcome_model, **kw)


class TestGenSpec:
    def test_mu_broadcast(self):
        s = spec_for(d=3, mu0=-1.0, mu1=1.0)
        assert np.array_equal(s.mu0, [-1, -1, -1])
        assert np.array_equal(s.mu(1), [1, 1, 1])

    def test_validation(self):
        with pytest.raises(InvalidArg):
            spec_for(d=0)
        with pytest.raises(InvalidArg):
            spec_for(treatment_p=1.0)
        with pytest.raises(InvalidArg):
            spec_for(coeff_lo=1.0, coeff_hi=1.0)
        with pytest.raises(DimensionMismatch):
            spec_for(d=3, mu0=[1.0, 2.0])


class TestBuildCovariances:
    def test_d1_is_unit(self):
        cov = build_covariances(Rng(0), 1)
        for m in (cov.sigma_a, cov.sigma_0, cov.sigma_1):
            assert np.allclose(m, [[1.0]])

    @pytest.mark.parametrize("d", [2, 5, 35])
    def test_trace_and_symmetry(self, d):
        cov = build_covariances(Rng(d), d)
        for m in (cov.sigma_a, cov.sigma_0, cov.sigma_1):
            assert abs(np.trace(m) - 1.0) <= 1e-9
            assert np.max(np.abs(m - m.T)) <= 1e-10
            cholesky(m)  # PSD within jitter tolerance

    def test_mixture_components_share_eigenvectors(self):
        cov = build_covariances(Rng(5), 5)
        comm = cov.sigma_0 @ cov.sigma_1 - cov.sigma_1 @ cov.sigma_0
        assert np.max(np.abs(comm)) <= 1e-10

    def test_component_spectra_ordering(self):
        cov = build_covariances(Rng(9), 6)
        ev0 = np.linalg.eigvalsh(cov.sigma_0)
        ev1 = np.linalg.eigvalsh(cov.sigma_1)
        assert abs(ev0.sum() - 1.0) <= 1e-9
        assert abs(ev1.sum() - 1.0) <= 1e-9
        assert np.all(ev0 >= -1e-10) and np.all(ev1 >= -1e-10)


class TestGenTreatment:
    def test_endpoints_via_bernoulli(self):
        spec = spec_for(treatment_p=0.5)
        assert gen_treatment(Rng(1), 5, 0.0).sum() == 0
        assert gen_treatment(Rng(1), 5, 1.0).sum() == 5

    def test_six_sigma_bound(self):
        ones = gen_treatment(Rng(2), 200, 0.5).sum()
        assert 60 <= ones <= 140


class TestGenFeatures:
    def test_degenerate_covariance_pins_means(self):
        spec = spec_for(d=2, mu0=[1.0, -1.0], mu1=[3.0, 4.0])
        tiny = 1e-12 * np.eye(2)
        cov = CovarianceSet(tiny, tiny, tiny)
        t = np.array([0, 1, 0, 1])
        x = gen_features(Rng(3), spec, cov, t)
        expect = np.array([spec.mu0, spec.mu1, spec.mu0, spec.mu1])
        assert np.max(np.abs(x - expect)) <= 1e-4

    def test_model_a_group_means(self):
        spec = spec_for(d=2, mu0=[-0.5, 0.0], mu1=[0.5, 1.0])
        cov = build_covariances(Rng(4), 2)
        t = gen_treatment(Rng(5), 10_000, 0.5)
        x = gen_features(Rng(6), spec, cov, t)
        for g, mu in ((0, spec.mu0), (1, spec.mu1)):
            assert np.max(np.abs(x[t == g].mean(axis=0) - mu)) < 0.1

    def test_model_b_mixture_covariance(self):
        spec = spec_for(d=2, feature_model="B", mu0=0.0, mu1=0.0)
        cov = build_covariances(Rng(7), 2)
        t = gen_treatment(Rng(8), 10_000, 0.5)
        x = gen_features(Rng(9), spec, cov, t)
        target = 0.5 * cov.sigma_0 + 0.5 * cov.sigma_1
        for g in (0, 1):
            sample_cov = np.cov(x[t == g].T)
            assert np.max(np.abs(sample_cov - target)) < 0.1

    def test_dimension_mismatch(self):
        spec = spec_for(d=3)
        cov = build_covariances(Rng(1), 2)
        with pytest.raises(DimensionMismatch):
            gen_features(Rng(2), spec, cov, np.array([0, 1]))


class TestGenOutcomeParams:
    def test_linear_has_no_quadratic_terms(self):
        p = gen_outcome_params(Rng(1), spec_for(d=3))
        assert p.a0 is None and p.a1 is None

    def test_range_containment(self):
        p = gen_outcome_params(Rng(2), spec_for(d=4, outcome_model="quadratic"))
        for arr in (p.b0, p.b1, p.a0.ravel(), p.a1.ravel(), [p.c0, p.c1]):
            arr = np.asarray(arr)
            assert np.all((arr >= 0.0) & (arr < 1.0))

    def test_determinism(self):
        spec = spec_for(d=3, outcome_model="quadratic")
        p1 = gen_outcome_params(Rng(3), spec)
        p2 = gen_outcome_params(Rng(3), spec)
        assert np.array_equal(p1.b0, p2.b0)
        assert np.array_equal(p1.a1, p2.a1)
        assert p1.c0 == p2.c0


class TestGenOutcomes:
    def test_constant_effect(self):
        from irmite.datagen import OutcomeParams
        spec = spec_for(d=2, sigma_noise=0.0)
        params = OutcomeParams(b0=np.zeros(2), b1=np.zeros(2), c0=1.0, c1=3.0)
        x = Rng(1).normal_matrix(5, 2)
        t = np.array([0, 1, 0, 1, 1])
        y0, y1, y_f, ite = gen_outcomes(Rng(2), spec, params, x, t)
        assert np.allclose(ite, 2.0)
        assert np.allclose(y_f, np.where(t == 1, 3.0, 1.0))

    def test_quadratic_hand_case(self):
        from irmite.datagen import OutcomeParams
        spec = spec_for(d=2, outcome_model="quadratic", sigma_noise=0.0)
        params = OutcomeParams(b0=np.zeros(2), b1=np.zeros(2), c0=0.0, c1=0.0,
                               a0=np.zeros((2, 2)), a1=np.eye(2))
        x = np.array([[1.0, 1.0]])
        y0, y1, y_f, ite = gen_outcomes(Rng(3), spec, params, x, np.array([1]))
        assert y1[0] == pytest.approx(2.0)
        assert y0[0] == pytest.approx(0.0)
        assert ite[0] == pytest.approx(2.0)

    def test_noise_variance(self):
        from irmite.datagen import OutcomeParams
        spec = spec_for(d=2, sigma_noise=1.0)
        params = OutcomeParams(b0=np.array([0.3, 0.7]), b1=np.zeros(2), c0=0.5, c1=0.0)
        x = Rng(4).normal_matrix(10_000, 2)
        t = np.zeros(10_000, dtype=int)
        y0, _, _, _ = gen_outcomes(Rng(5), spec, params, x, t)
        noise = y0 - params.mean_outcome(x, 0)
        assert abs(noise.var() - 1.0) < 0.05


class TestGenerate:
    def test_determinism(self):
        spec = spec_for(d=3)
        a = generate(99, spec, 50, 20)
        b = generate(99, spec, 50, 20)
        assert np.array_equal(a[0].x, b[0].x)
        assert np.array_equal(a[1].y_f, b[1].y_f)

    def test_factual_and_ite_identities(self):
        spec = spec_for(d=4, outcome_model="quadratic")
        train, test, _, _ = generate(5, spec, 100, 60)
        for ds in (train, test):
            assert np.array_equal(ds.y_f, np.where(ds.t == 1, ds.y1, ds.y0))
            assert np.array_equal(ds.ite, ds.y1 - ds.y0)

    def test_group_guard(self):
        spec = spec_for(d=10, treatment_p=0.5)
        train, _, _, _ = generate(6, spec, 40, 10)
        min_group = int(10 / 2 + 2)
        assert min(train.t.sum(), 40 - train.t.sum()) >= min_group

    def test_train_test_streams_disjoint(self):
        spec = spec_for(d=2)
        train, test, _, _ = generate(7, spec, 100, 100)
        # no feature row appears in both splits
        train_rows = {tuple(row) for row in train.x}
        assert not any(tuple(row) in train_rows for row in test.x)

    def test_bad_sizes(self):
        with pytest.raises(InvalidArg):
            generate(1, spec_for(), 0, 10)


class TestCsvRoundtrip:
    def test_oracle_roundtrip_exact(self, tmp_path):
        spec = spec_for(d=3)
        train, _, _, _ = generate(11, spec, 20, 5)
        path = tmp_path / "train.csv"
        train.to_csv(path)
        back = Dataset.from_csv(path)
        assert np.array_equal(back.x, train.x)
        assert np.array_equal(back.t, train.t)
        assert np.array_equal(back.y_f, train.y_f)
        assert np.array_equal(back.ite, train.ite)

    def test_observational_roundtrip(self, tmp_path):
        ds = Dataset(x=np.array([[0.5], [1.5]]), t=[0, 1], y_f=[1.0, 2.0])
        path = tmp_path / "obs.csv"
        ds.to_csv(path)
        back = Dataset.from_csv(path)
        assert back.ite is None
        assert np.array_equal(back.x, ds.x)

    def test_header_contract(self, tmp_path):
        ds = Dataset(x=np.ones((1, 2)), t=[1], y_f=[0.0], y0=[0.0], y1=[0.0], ite=[0.0])
        path = tmp_path / "d.csv"
        ds.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == "x1,x2,t,y_f,y0,y1,ite"

    def test_malformed_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(InvalidArg):
            Dataset.from_csv(path)
