import numpy as np
import pytest

from permimp.datagen import generate_dataset
from permimp.errors import (
    InvalidParameterError,
    MissingProvenanceError,
    NoDerangementError,
    UnsupportedSchemeError,
    WrongDatasetError,
)
from permimp.forest import ForestParams, fit_forest
from permimp.importance import (
    MODE_DERANGEMENT,
    MODE_UNRESTRICTED,
    _draw_perms,
    importance_with_oracle,
    permutation_importance,
    report_to_csv,
)
from permimp.randomness import SeedSpec


def naive_importance(model, data, seed, mode=MODE_DERANGEMENT):
    """Copy-based reference: permute column j of the OOB block and re-predict.

    Everything except column j stays frozen, which is exactly what the fast
    kernel is supposed to compute.
    """
    gamma = model.gamma_n
    base_key = seed.child("perm")._spawn_key()
    totals = np.zeros(model.p)
    for t, (ft, rec) in enumerate(zip(model.flat_trees, model.records)):
        Xo = data.features[rec.oob]
        yo = data.response[rec.oob]
        base_err = np.sum((yo - ft.predict_rows(Xo)) ** 2)
        perms = _draw_perms(seed.master_seed, base_key, t, model.p, gamma, mode)
        for j in range(model.p):
            Xp = Xo.copy()
            Xp[:, j] = Xo[perms[j], j]
            totals[j] += np.sum((yo - ft.predict_rows(Xp)) ** 2) - base_err
    return totals / (model.m_trees * gamma)


class TestComputation:
    def test_matches_copy_based_reference(self, small_data, small_forest):
        seed = SeedSpec(61).child("imp")
        fast = permutation_importance(small_forest, small_data, seed=seed).per_feature
        slow = naive_importance(small_forest, small_data, seed)
        np.testing.assert_allclose(fast, slow, atol=1e-12)

    def test_constant_forest_yields_exact_zeros(self, small_data, leaf_forest):
        report = permutation_importance(leaf_forest, small_data, seed=SeedSpec(62))
        np.testing.assert_array_equal(report.per_feature, np.zeros(small_data.p))

    def test_replay_identical(self, small_data, small_forest):
        a = permutation_importance(small_forest, small_data, seed=SeedSpec(63))
        b = permutation_importance(small_forest, small_data, seed=SeedSpec(63))
        np.testing.assert_array_equal(a.per_feature, b.per_feature)

    def test_modes_differ_and_are_recorded(self, small_data, small_forest):
        a = permutation_importance(small_forest, small_data, mode=MODE_DERANGEMENT,
                                   seed=SeedSpec(64))
        b = permutation_importance(small_forest, small_data, mode=MODE_UNRESTRICTED,
                                   seed=SeedSpec(64))
        assert a.mode == "derangement" and b.mode == "unrestricted"
        assert not np.array_equal(a.per_feature, b.per_feature)

    def test_negative_values_not_truncated(self, small_data, small_forest):
        report = permutation_importance(small_forest, small_data, seed=SeedSpec(65))
        assert report.per_feature.min() < 0  # uninformative features jitter below 0

    def test_gamma_recorded(self, small_data, small_forest):
        report = permutation_importance(small_forest, small_data, seed=SeedSpec(66))
        assert report.gamma_n == small_data.n - small_forest.params.a_n
        assert report.skipped_trees == 0


class TestPermutationDraws:
    def test_derangement_mode_has_no_fixed_points(self):
        base = SeedSpec(67).child("perm")._spawn_key()
        for t in range(20):
            perms = _draw_perms(67, base, t, 4, 23, MODE_DERANGEMENT)
            for row in perms:
                assert np.all(row != np.arange(23))

    def test_unrestricted_mode_eventually_fixes_points(self):
        base = SeedSpec(68).child("perm")._spawn_key()
        found = False
        for t in range(40):
            perms = _draw_perms(68, base, t, 4, 23, MODE_UNRESTRICTED)
            if np.any(perms == np.arange(23)):
                found = True
                break
        assert found

    def test_per_cell_streams_are_stable(self):
        base = SeedSpec(69).child("perm")._spawn_key()
        a = _draw_perms(69, base, 3, 5, 17, MODE_DERANGEMENT)
        b = _draw_perms(69, base, 3, 5, 17, MODE_DERANGEMENT)
        np.testing.assert_array_equal(a, b)


class TestPreconditions:
    def test_wrong_dataset_rejected(self, small_data, small_forest, linear_model):
        other = generate_dataset(linear_model, 80, 3.0, SeedSpec(70))
        with pytest.raises(WrongDatasetError):
            permutation_importance(small_forest, other, seed=SeedSpec(71))

    def test_with_replacement_rejected(self, small_data):
        model = fit_forest(small_data, ForestParams(m_trees=4, scheme="with_replacement"),
                           SeedSpec(72))
        with pytest.raises(UnsupportedSchemeError):
            permutation_importance(model, small_data, seed=SeedSpec(73))

    def test_gamma_one_rejected_in_derangement_mode(self, small_data):
        model = fit_forest(small_data, ForestParams(m_trees=4, a_n=small_data.n - 1),
                           SeedSpec(74))
        with pytest.raises(NoDerangementError):
            permutation_importance(model, small_data, seed=SeedSpec(75))

    def test_seed_required(self, small_data, small_forest):
        with pytest.raises(InvalidParameterError):
            permutation_importance(small_forest, small_data)

    def test_unknown_mode(self, small_data, small_forest):
        with pytest.raises(InvalidParameterError):
            permutation_importance(small_forest, small_data, mode="sattolo",
                                   seed=SeedSpec(76))


class TestOracleAnnotation:
    def test_annotation_fields(self, small_data, small_forest, linear_model):
        report = permutation_importance(small_forest, small_data, seed=SeedSpec(77))
        annotated = importance_with_oracle(report, linear_model)
        assert annotated.oracle is not None
        assert annotated.oracle[4] == pytest.approx(1 / 6)
        np.testing.assert_array_equal(annotated.oracle[5:], np.zeros(5))
        np.testing.assert_allclose(annotated.gap,
                                   annotated.per_feature - annotated.oracle)
        assert annotated.informative == (1, 2, 3, 4, 5)

    def test_missing_provenance(self, small_data, small_forest):
        report = permutation_importance(small_forest, small_data, seed=SeedSpec(78))
        with pytest.raises(MissingProvenanceError):
            importance_with_oracle(report, None)

    def test_csv_columns(self, small_data, small_forest, linear_model):
        report = importance_with_oracle(
            permutation_importance(small_forest, small_data, seed=SeedSpec(79)),
            linear_model,
        )
        text = report_to_csv(report)
        lines = text.strip().split("\n")
        assert lines[0] == "feature,importance,oracle,gap,mode,gamma_n,seed"
        assert len(lines) == 1 + small_data.p
        first = lines[1].split(",")
        assert first[0] == "1"
        assert first[4] == "derangement"
