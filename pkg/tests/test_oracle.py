import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permimp.datagen import LinkModel, beta_default
from permimp.errors import InvalidParameterError, NotAdditiveError
from permimp.oracle import oracle_additive, oracle_mc, oracle_value, oracle_vector
from permimp.randomness import SeedSpec

BETA0 = beta_default(10)


class TestClosedForms:
    def test_linear_j5_is_one_sixth(self):
        ov = oracle_additive(LinkModel("linear", BETA0), 5)
        assert ov.value == pytest.approx(1 / 6)
        assert ov.method == "closed_form"

    def test_polynomial_j5(self):
        ov = oracle_additive(LinkModel("polynomial", BETA0), 5)
        assert ov.value == pytest.approx(25 / 198)

    def test_uninformative_exactly_zero(self):
        for kind in ("linear", "polynomial"):
            for j in (6, 7, 8, 9, 10):
                assert oracle_additive(LinkModel(kind, BETA0), j).value == 0.0

    def test_not_additive(self):
        with pytest.raises(NotAdditiveError):
            oracle_additive(LinkModel("trigonometric", BETA0), 1)
        with pytest.raises(NotAdditiveError):
            oracle_additive(LinkModel("non_continuous", BETA0), 1)

    def test_j_bounds(self):
        with pytest.raises(InvalidParameterError):
            oracle_additive(LinkModel("linear", BETA0), 0)
        with pytest.raises(InvalidParameterError):
            oracle_additive(LinkModel("linear", BETA0), 11)

    def test_monotone_in_beta_magnitude(self):
        vals = [oracle_additive(LinkModel("linear", np.array([b, 1.0])), 1).value
                for b in (0.5, 1.0, 2.0, 4.0)]
        assert vals == sorted(vals)
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestMonteCarlo:
    def test_uninformative_zero_every_draw(self):
        for kind in ("linear", "polynomial", "trigonometric", "non_continuous"):
            ov = oracle_mc(LinkModel(kind, BETA0), 8, draws=2000)
            assert ov.value == 0.0
            assert ov.std_error == 0.0

    def test_linear_j5_matches_closed_form(self):
        ov = oracle_mc(LinkModel("linear", BETA0), 5, draws=10**6)
        assert abs(ov.value - 1 / 6) < 3 * ov.std_error

    def test_non_additive_informative_positive(self):
        for kind in ("trigonometric", "non_continuous"):
            ov = oracle_mc(LinkModel(kind, BETA0), 2, draws=50000)
            assert ov.method == "monte_carlo"
            assert ov.value > 0.0
            assert ov.std_error > 0.0

    def test_deterministic_default_stream(self):
        a = oracle_mc(LinkModel("trigonometric", BETA0), 2, draws=20000)
        b = oracle_mc(LinkModel("trigonometric", BETA0), 2, draws=20000)
        assert a.value == b.value

    def test_draw_floor(self):
        with pytest.raises(InvalidParameterError):
            oracle_mc(LinkModel("linear", BETA0), 1, draws=1)

    @given(j=st.integers(1, 10), kind=st.sampled_from(["linear", "trigonometric"]))
    @settings(max_examples=12, deadline=None)
    def test_non_negative(self, j, kind):
        ov = oracle_value(LinkModel(kind, BETA0), j, draws=4000,
                          seed=SeedSpec(3000, (kind, j)))
        assert ov.value >= 0.0


class TestDispatch:
    def test_vector_shapes_and_zeros(self):
        vec = oracle_vector(LinkModel("non_continuous", BETA0), draws=20000)
        assert vec.shape == (10,)
        np.testing.assert_array_equal(vec[5:], np.zeros(5))
        assert np.all(vec[:5] > 0)

    def test_additive_dispatches_to_closed_form(self):
        assert oracle_value(LinkModel("linear", BETA0), 2).method == "closed_form"
        assert oracle_value(LinkModel("trigonometric", BETA0), 2,
                            draws=5000).method == "monte_carlo"
