import cmath
import json

import numpy as np
import pytest

from permimp.datagen import (
    LinkModel,
    RegressionDataset,
    beta_default,
    generate_dataset,
    high_dim_model,
    link_eval,
    link_variance,
    link_variance_detail,
    load_dataset_csv,
    save_dataset_csv,
)
from permimp.errors import InvalidInputError, InvalidParameterError
from permimp.randomness import SeedSpec

BETA0 = beta_default(10)


class TestLinkEval:
    def test_linear_zero_vector(self):
        assert link_eval(LinkModel("linear", BETA0), np.zeros(10)) == 0.0

    def test_linear_ones_vector(self):
        assert link_eval(LinkModel("linear", BETA0), np.ones(10)) == pytest.approx(6.0)

    def test_non_continuous_branches(self):
        m = LinkModel("non_continuous", BETA0)
        assert link_eval(m, np.ones(10)) == pytest.approx(8.0)  # x3 = 1 > 0.5
        x = np.zeros(10)
        x[2], x[3], x[4] = 0.4, 1.0, 1.0
        assert link_eval(m, x) == pytest.approx(1.0)  # -3 + 1 + 3

    def test_boundary_goes_to_lower_branch(self):
        m = LinkModel("non_continuous", BETA0)
        x = np.zeros(10)
        x[2] = 0.5  # not > 0.5
        assert link_eval(m, x) == pytest.approx(3.0)

    def test_polynomial_exponents(self):
        m = LinkModel("polynomial", np.array([1.0, 1.0, 1.0]))
        assert link_eval(m, np.array([0.5, 0.5, 0.5])) == pytest.approx(0.5 + 0.25 + 0.125)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            link_eval(LinkModel("linear", BETA0), np.zeros(9))

    def test_matrix_matches_pointwise(self):
        m = LinkModel("trigonometric", BETA0)
        X = SeedSpec(3).rng().random((40, 10))
        rows = np.array([link_eval(m, x) for x in X])
        np.testing.assert_allclose(link_eval(m, X), rows)


def _mc_reference_variance(model, draws=10**6):
    vals = link_eval(model, SeedSpec(909).child("lv-ref", model.kind).rng().random((draws, model.p)))
    return float(np.var(vals)), float(np.var(vals) * np.sqrt(2.0 / draws))


def _trig_variance_characteristic(beta):
    """Analytic Var(2 sin(x'beta + 2)) via the characteristic function of x'beta."""
    def phi(t):
        out = 1.0 + 0j
        for b in beta:
            if b != 0.0:
                out *= (cmath.exp(1j * t * b) - 1.0) / (1j * t * b)
        return out

    e_sin = (cmath.exp(2j) * phi(1.0)).imag
    e_sin2 = 0.5 * (1.0 - (cmath.exp(4j) * phi(2.0)).real)
    return 4.0 * (e_sin2 - e_sin**2)


def _non_continuous_variance(beta):
    """Conditioning on the branch at x3 = 0.5; all pieces are exact."""
    var_a = beta[0] ** 2 / 12 + beta[1] ** 2 / 12 + beta[2] ** 2 / 48
    mean_a = 0.5 * beta[0] + 0.5 * beta[1] + 0.75 * beta[2]
    var_b = beta[3] ** 2 / 12 + beta[4] ** 2 / 12
    mean_b = 0.5 * beta[3] + 0.5 * beta[4] + 3.0
    mu = 0.5 * (mean_a + mean_b)
    return (0.5 * (var_a + var_b) + 0.5 * ((mean_a - mu) ** 2 + (mean_b - mu) ** 2))


class TestLinkVariance:
    def test_linear_closed_form(self):
        assert link_variance(LinkModel("linear", BETA0)) == pytest.approx(34 / 12)

    def test_polynomial_closed_form(self):
        expected = sum(
            b**2 * (1 / (2 * j + 1) - 1 / (j + 1) ** 2)
            for j, b in enumerate(BETA0, start=1)
        )
        assert link_variance(LinkModel("polynomial", BETA0)) == pytest.approx(expected)

    @pytest.mark.parametrize("kind", ["linear", "polynomial"])
    def test_closed_form_matches_mc(self, kind):
        model = LinkModel(kind, BETA0)
        mc, se = _mc_reference_variance(model)
        assert abs(link_variance(model) - mc) < max(0.01, 3 * se)

    def test_trigonometric_against_characteristic_function(self):
        model = LinkModel("trigonometric", BETA0)
        detail = link_variance_detail(model)
        assert detail.method == "monte_carlo"
        exact = _trig_variance_characteristic(BETA0)
        assert abs(detail.value - exact) < 4 * detail.std_error

    def test_non_continuous_against_conditioning(self):
        model = LinkModel("non_continuous", BETA0)
        detail = link_variance_detail(model)
        exact = _non_continuous_variance(BETA0)
        assert exact == pytest.approx(137 / 48)
        assert abs(detail.value - exact) < 4 * detail.std_error

    def test_all_zero_beta_gives_zero(self):
        assert link_variance(LinkModel("linear", np.zeros(4))) == 0.0

    def test_deterministic(self):
        m = LinkModel("trigonometric", BETA0)
        assert link_variance(m) == link_variance(m)


class TestGenerateDataset:
    def test_noiseless_exact(self, linear_model):
        data = generate_dataset(linear_model, 50, 1.0, SeedSpec(4), noiseless=True)
        np.testing.assert_array_equal(data.response,
                                      link_eval(linear_model, data.features))
        assert data.provenance.sigma2 == 0.0

    def test_noise_variance_calibration(self, linear_model):
        # sigma^2 = (34/12)/5 = 34/60; sample variance of eps over n = 1e5
        data = generate_dataset(linear_model, 10**5, 5.0, SeedSpec(5))
        eps = data.response - link_eval(linear_model, data.features)
        assert abs(np.var(eps) - 34 / 60) < 0.01
        assert data.provenance.sigma2 == pytest.approx((34 / 12) / 5)

    def test_sn_identity_by_construction(self, linear_model):
        for sn in (0.5, 1.0, 3.0, 5.0):
            data = generate_dataset(linear_model, 10, sn, SeedSpec(6))
            assert link_variance(linear_model) / data.provenance.sigma2 == pytest.approx(sn)

    def test_variance_decomposition(self, linear_model):
        data = generate_dataset(linear_model, 10**5, 2.0, SeedSpec(7))
        total = link_variance(linear_model) + data.provenance.sigma2
        assert abs(np.var(data.response) - total) < 0.05

    def test_replay_identical(self, linear_model):
        a = generate_dataset(linear_model, 30, 2.0, SeedSpec(8).child("r"))
        b = generate_dataset(linear_model, 30, 2.0, SeedSpec(8).child("r"))
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.response, b.response)
        assert a.fingerprint() == b.fingerprint()

    def test_invalid_parameters(self, linear_model):
        with pytest.raises(InvalidParameterError):
            generate_dataset(linear_model, 1, 1.0, SeedSpec(1))
        with pytest.raises(InvalidParameterError):
            generate_dataset(linear_model, 10, 0.0, SeedSpec(1))
        with pytest.raises(InvalidParameterError):
            generate_dataset(LinkModel("linear", np.zeros(3)), 10, 1.0, SeedSpec(1))


class TestHighDimModel:
    def test_p_is_n_plus_5(self):
        m = high_dim_model(50)
        assert m.p == 55
        assert m.informative_set() == (1, 2, 3, 4, 5)

    def test_n1(self):
        assert high_dim_model(1).p == 6

    def test_tail_coefficients_zero(self):
        m = high_dim_model(40)
        assert np.all(m.beta[5:] == 0.0)
        np.testing.assert_array_equal(m.beta[:5], [2, 4, 2, -3, 1])


class TestDatasetValidation:
    def test_rejects_out_of_cube(self):
        with pytest.raises(InvalidInputError):
            RegressionDataset(np.array([[0.1], [1.4]]), np.array([0.0, 1.0]))

    def test_rejects_nan(self):
        with pytest.raises(InvalidInputError):
            RegressionDataset(np.array([[0.1], [0.2]]), np.array([0.0, np.nan]))

    def test_rejects_single_row(self):
        with pytest.raises(InvalidInputError):
            RegressionDataset(np.array([[0.1]]), np.array([0.0]))


class TestCsvRoundTrip:
    def test_round_trip_preserves_fingerprint(self, tmp_path, linear_model):
        data = generate_dataset(linear_model, 25, 2.0, SeedSpec(10))
        csv_path = tmp_path / "d.csv"
        prov_path = tmp_path / "d.provenance.json"
        save_dataset_csv(data, csv_path, provenance_path=prov_path)
        loaded = load_dataset_csv(csv_path, provenance_path=prov_path)
        np.testing.assert_array_equal(loaded.features, data.features)
        np.testing.assert_array_equal(loaded.response, data.response)
        assert loaded.fingerprint() == data.fingerprint()
        assert loaded.provenance.model.kind == "linear"
        assert loaded.provenance.sn == 2.0

    def test_header_schema_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,y\n0.1,0.2,1.0\n0.3,0.4,2.0\n")
        with pytest.raises(InvalidInputError):
            load_dataset_csv(path)

    def test_offending_row_cited(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2,y\n0.1,0.2,1.0\n0.3,1.7,2.0\n")
        with pytest.raises(InvalidInputError, match="row 3"):
            load_dataset_csv(path)

    def test_provenance_json_is_valid(self, tmp_path, linear_model):
        data = generate_dataset(linear_model, 12, 1.0, SeedSpec(12))
        prov_path = tmp_path / "p.json"
        save_dataset_csv(data, tmp_path / "d.csv", provenance_path=prov_path)
        doc = json.loads(prov_path.read_text())
        assert set(doc) == {"model", "sn", "sigma2", "seed", "noiseless"}
