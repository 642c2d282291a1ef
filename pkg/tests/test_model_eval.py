import numpy as np
import pytest

from sts_select.errors import (
    EmptyTrainingError,
    NoPositivesError,
    SingleClassError,
    SingleClassTrainingError,
    TooFewPerClassError,
)
from sts_select.model_eval import (
    CvPlan,
    PipelineSpec,
    auprc,
    auroc,
    cross_validate,
    fold_indices,
    gnb_predict_proba,
    grid_search,
    knn_predict_proba,
    split_indices,
    split_train_test,
    train_gnb,
    train_knn,
)
from sts_select.scoring import MiConfig, MiScorer, mi_discrete_target
from sts_select.selection import SelectionConfig
from sts_select.tabular import FeatureMatrix


def fm_of(values, labels=None):
    values = np.asarray(values, dtype=np.float64)
    return FeatureMatrix(
        feature_names=tuple(f"f{i}" for i in range(values.shape[1])),
        values=values,
        labels=labels,
    )


class TestGnb:
    def test_symmetric_classes_query_at_midpoint(self):
        x = np.array([[-1.0], [-1.0], [1.0], [1.0]]) + np.array(
            [[-0.1], [0.1], [-0.1], [0.1]]
        )
        y = np.array([0, 0, 1, 1])
        model = train_gnb(x, y)
        assert gnb_predict_proba(model, [[0.0]])[0] == pytest.approx(0.5, abs=1e-12)

    def test_well_separated_classes(self):
        rng = np.random.default_rng(0)
        x0 = rng.normal(0.0, 1.0, (50, 1))
        x1 = rng.normal(10.0, 1.0, (50, 1))
        x = np.vstack([x0, x1])
        y = np.repeat([0, 1], 50)
        model = train_gnb(x, y)
        assert gnb_predict_proba(model, [[10.0]])[0] > 0.999

    def test_identical_likelihoods_give_prior(self):
        # constant feature: class likelihoods cancel, posterior equals the prior
        x = np.ones((100, 1))
        y = np.repeat([0, 1], [90, 10])
        model = train_gnb(x, y)
        proba = gnb_predict_proba(model, [[1.0], [1.0]])
        np.testing.assert_allclose(proba, 0.1, atol=1e-9)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassTrainingError):
            train_gnb(np.zeros((4, 2)), np.zeros(4, dtype=int))

    def test_variance_floor_survives_constant_columns(self):
        x = np.column_stack([np.ones(10), np.arange(10.0)])
        y = np.tile([0, 1], 5)
        model = train_gnb(x, y)
        assert np.all(model.variances > 0)
        proba = gnb_predict_proba(model, x)
        assert np.all(np.isfinite(proba))

    def test_log_space_matches_naive_product(self):
        rng = np.random.default_rng(1)
        x = rng.normal(0, 1, (40, 3))
        y = rng.integers(0, 2, 40)
        while len(np.unique(y)) < 2:
            y = rng.integers(0, 2, 40)
        model = train_gnb(x, y)
        got = gnb_predict_proba(model, x)
        # naive product-space oracle, fine on small well-scaled inputs
        priors = np.exp(model.log_priors)
        joint = np.empty((x.shape[0], 2))
        for c in (0, 1):
            mu, var = model.means[c], model.variances[c]
            dens = np.prod(
                np.exp(-((x - mu) ** 2) / (2 * var)) / np.sqrt(2 * np.pi * var), axis=1
            )
            joint[:, c] = priors[c] * dens
        expected = joint[:, 1] / joint.sum(axis=1)
        np.testing.assert_allclose(got, expected, atol=1e-9)


class TestKnn:
    def test_self_match_with_one_neighbor(self):
        x = np.array([[0.0], [5.0], [9.0]])
        y = np.array([1, 0, 1])
        model = train_knn(x, y, n_neighbors=1)
        np.testing.assert_array_equal(knn_predict_proba(model, x), [1.0, 0.0, 1.0])

    def test_all_rows_gives_global_rate(self):
        x = np.arange(8.0)[:, None]
        y = np.array([1, 0, 0, 0, 1, 1, 0, 0])
        model = train_knn(x, y, n_neighbors=8)
        np.testing.assert_allclose(knn_predict_proba(model, [[3.3], [100.0]]), 3 / 8)

    def test_three_neighbor_fraction(self):
        x = np.array([[0.0], [0.1], [0.2], [10.0]])
        y = np.array([1, 1, 0, 0])
        model = train_knn(x, y, n_neighbors=3)
        assert knn_predict_proba(model, [[0.05]])[0] == pytest.approx(2 / 3)

    def test_distance_ties_break_by_training_index(self):
        x = np.array([[1.0], [-1.0], [1.0]])  # rows 0 and 2 equidistant duplicates
        y = np.array([1, 0, 0])
        model = train_knn(x, y, n_neighbors=1)
        # query at 0: rows 0 and 1 equidistant; lower index (label 1) wins
        assert knn_predict_proba(model, [[0.0]])[0] == 1.0

    def test_empty_training(self):
        with pytest.raises(EmptyTrainingError):
            train_knn(np.zeros((0, 2)), np.zeros(0, dtype=int))

    def test_n_neighbors_capped_by_rows(self):
        with pytest.raises(ValueError):
            train_knn(np.zeros((2, 1)), np.array([0, 1]), n_neighbors=5)


class TestAuroc:
    def test_perfect_separation(self):
        assert auroc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_spot_value(self):
        assert auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

    def test_all_ties_give_half(self):
        assert auroc([0.5, 0.5, 0.5, 0.5], [0, 1, 0, 1]) == 0.5

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassError):
            auroc([0.1, 0.2], [1, 1])

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(2)
        scores = rng.normal(0, 1, 100)
        labels = rng.integers(0, 2, 100)
        while len(np.unique(labels)) < 2:
            labels = rng.integers(0, 2, 100)
        base = auroc(scores, labels)
        assert auroc(np.exp(scores), labels) == pytest.approx(base, abs=1e-12)
        assert auroc(2 * scores + 7, labels) == pytest.approx(base, abs=1e-12)

    def test_complement_identity_without_ties(self):
        rng = np.random.default_rng(3)
        scores = rng.permutation(np.linspace(0, 1, 60))
        labels = rng.integers(0, 2, 60)
        while len(np.unique(labels)) < 2:
            labels = rng.integers(0, 2, 60)
        assert auroc(scores, labels) + auroc(-scores, labels) == pytest.approx(1.0, abs=1e-12)


class TestAuprc:
    def test_perfect_ranking(self):
        assert auprc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_positive_ranked_first(self):
        assert auprc([0.9, 0.1], [1, 0]) == 1.0

    def test_single_positive_at_rank_two(self):
        assert auprc([0.9, 0.1], [0, 1]) == 0.5

    def test_no_positives_rejected(self):
        with pytest.raises(NoPositivesError):
            auprc([0.5, 0.6], [0, 0])

    def test_tied_scores_grouped_into_one_threshold(self):
        # all scores equal: single threshold, precision = base rate at recall 1
        assert auprc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == 0.5


class TestSplit:
    def test_stratified_rounding(self):
        labels = np.array([1] * 10 + [0] * 90)
        plan = CvPlan(test_fraction=0.2, folds=5, seeds=(1, 2))
        train, test = split_indices(labels, plan)
        assert int(labels[test].sum()) == 2
        assert len(test) == 20
        assert len(train) == 80

    def test_determinism(self):
        labels = np.tile([0, 1], 30)
        plan = CvPlan(seeds=(42, 7))
        a = split_indices(labels, plan)
        b = split_indices(labels, plan)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_exact_stratification_on_four_rows(self):
        labels = np.array([0, 1, 0, 1])
        plan = CvPlan(test_fraction=0.5, folds=2, seeds=(0, 0))
        train, test = split_indices(labels, plan)
        assert int(labels[test].sum()) == 1
        assert int(labels[train].sum()) == 1

    def test_class_emptied_by_split_rejected(self):
        # 2 positives at fraction 0.9: both land in test, training loses the class
        labels = np.array([1] * 2 + [0] * 98)
        with pytest.raises(TooFewPerClassError):
            split_indices(labels, CvPlan(test_fraction=0.9, folds=2, seeds=(1, 2)))

    def test_split_train_test_wraps_matrices(self):
        rng = np.random.default_rng(4)
        labels = np.tile([0, 1], 30)
        fm = fm_of(rng.normal(0, 1, (60, 3)))
        train, test = split_train_test(fm, labels, CvPlan(seeds=(5, 6)))
        assert train.rows + test.rows == 60
        assert train.feature_names == fm.feature_names
        assert set(np.concatenate([train.labels, test.labels]).tolist()) == {0, 1}

    def test_partition_property(self):
        labels = np.tile([0, 1], 50)
        train, test = split_indices(labels, CvPlan(seeds=(9, 9)))
        combined = np.sort(np.concatenate([train, test]))
        np.testing.assert_array_equal(combined, np.arange(100))


class TestFolds:
    def test_even_division(self):
        labels = np.tile([0, 1], 50)
        folds = fold_indices(labels, CvPlan(folds=5, seeds=(3, 4)))
        assert [len(f) for f in folds] == [20] * 5

    def test_partition(self):
        labels = np.tile([0, 1], 33)
        folds = fold_indices(labels, CvPlan(folds=5, seeds=(3, 4)))
        combined = np.sort(np.concatenate(folds))
        np.testing.assert_array_equal(combined, np.arange(66))

    def test_stratified_within_one(self):
        labels = np.array([1] * 23 + [0] * 77)
        folds = fold_indices(labels, CvPlan(folds=5, seeds=(8, 1)))
        pos_counts = [int(labels[f].sum()) for f in folds]
        assert max(pos_counts) - min(pos_counts) <= 1

    def test_too_few_rows_per_class(self):
        labels = np.array([1] * 3 + [0] * 20)
        with pytest.raises(TooFewPerClassError):
            fold_indices(labels, CvPlan(folds=5, seeds=(1, 1)))


class TestCrossValidate:
    def test_null_distribution(self):
        # pure-noise features + random labels: mean fold AUROC stays near chance
        for seed in (0, 1, 2):
            rng = np.random.default_rng(seed)
            fm = fm_of(rng.standard_normal((200, 15)))
            labels = rng.integers(0, 2, 200)
            spec = PipelineSpec(
                scorer=MiScorer(), selection=SelectionConfig("top_n", n=5), classifier="gnb"
            )
            res = cross_validate(fm, labels, spec, CvPlan(seeds=(seed + 100, 1)))
            mean = float(np.mean([r.auroc for r in res]))
            assert 0.35 <= mean <= 0.65

    def test_leakage_canary(self):
        # five canaries, each label-valued exactly on one fold's rows and constant
        # elsewhere: in the iteration where its signal is hidden in the validation
        # fold it has zero training MI and must not be selected.
        rng = np.random.default_rng(2024)
        n = 100
        labels = np.zeros(n, dtype=np.int64)
        labels[rng.permutation(n)[:50]] = 1
        plan = CvPlan(folds=5, seeds=(11, 22))
        folds = fold_indices(labels, plan)
        n_canary, n_real, n_noise = 5, 10, 10
        d = n_canary + n_real + n_noise
        x = rng.standard_normal((n, d))
        for f in range(n_canary):
            col = np.full(n, 0.5)
            col[folds[f]] = labels[folds[f]].astype(float)
            x[:, f] = col
        for j in range(n_canary, n_canary + n_real):
            x[:, j] = rng.standard_normal(n) + labels
        fm = fm_of(x)

        # leak-attractiveness: scored on all rows the canaries look informative
        cfg = MiConfig()
        full = np.array([mi_discrete_target(x[:, j], labels, cfg) for j in range(d)])
        assert np.all(full[:n_canary] > 0.05)
        assert sum(1 for j in np.argsort(-full)[:10] if j < n_canary) >= 3

        spec = PipelineSpec(
            scorer=MiScorer(cfg), selection=SelectionConfig("top_n", n=10), classifier="gnb"
        )
        for f, fold_result in enumerate(cross_validate(fm, labels, spec, plan)):
            assert f not in fold_result.selection.selected

    def test_informative_features_beat_chance(self):
        rng = np.random.default_rng(6)
        labels = np.tile([0, 1], 60)
        x = rng.standard_normal((120, 8))
        x[:, 2] += 2.0 * labels
        fm = fm_of(x)
        spec = PipelineSpec(
            scorer=MiScorer(), selection=SelectionConfig("top_n", n=2), classifier="gnb"
        )
        res = cross_validate(fm, labels, spec, CvPlan(seeds=(1, 2)))
        assert float(np.mean([r.auroc for r in res])) > 0.8


class TestGridSearch:
    def make_data(self, seed=0):
        rng = np.random.default_rng(seed)
        labels = np.tile([0, 1], 60)
        x = rng.standard_normal((120, 6))
        x[:, 0] += 1.5 * labels
        x[:, 1] += 1.0 * labels
        fm = fm_of(x, labels=labels)
        plan = CvPlan(seeds=(50, 60))
        train, test = split_train_test(fm, labels, plan)
        return train, test, plan

    def test_single_point_grid(self):
        train, test, plan = self.make_data()
        spec = PipelineSpec(
            scorer=MiScorer(), selection=SelectionConfig("top_n", n=2), classifier="gnb"
        )
        best, report = grid_search(train, train.labels, test, test.labels, [spec], plan)
        assert best is spec
        assert report.chosen == spec.descriptor()
        assert 0.0 <= report.test_auroc <= 1.0
        assert len(report.fold_aurocs) == 5

    def test_dominating_config_chosen(self):
        train, test, plan = self.make_data()
        good = PipelineSpec(
            scorer=MiScorer(), selection=SelectionConfig("top_n", n=2), classifier="gnb"
        )
        # k large enough that nothing passes the threshold: empty selection, chance AUROC
        bad = PipelineSpec(
            scorer=MiScorer(), selection=SelectionConfig("std_dev", k=1e9), classifier="gnb"
        )
        best, _ = grid_search(train, train.labels, test, test.labels, [bad, good], plan)
        assert best is good

    def test_deterministic_repeat(self):
        train, test, plan = self.make_data()
        grid = [
            PipelineSpec(
                scorer=MiScorer(), selection=SelectionConfig("top_n", n=n), classifier="gnb"
            )
            for n in (1, 2, 3)
        ]
        _, r1 = grid_search(train, train.labels, test, test.labels, grid, plan)
        _, r2 = grid_search(train, train.labels, test, test.labels, grid, plan)
        d1, d2 = r1.to_dict(), r2.to_dict()
        d1.pop("runtime_seconds")
        d2.pop("runtime_seconds")
        assert d1 == d2

    def test_thread_count_does_not_change_choice(self):
        train, test, plan = self.make_data()
        grid = [
            PipelineSpec(
                scorer=MiScorer(), selection=SelectionConfig("top_n", n=n), classifier="gnb"
            )
            for n in (1, 2, 3, 4)
        ]
        _, r1 = grid_search(train, train.labels, test, test.labels, grid, plan, n_jobs=1)
        _, r4 = grid_search(train, train.labels, test, test.labels, grid, plan, n_jobs=4)
        d1, d4 = r1.to_dict(), r4.to_dict()
        d1.pop("runtime_seconds")
        d4.pop("runtime_seconds")
        assert d1 == d4

    def test_knn_classifier_path(self):
        train, test, plan = self.make_data()
        spec = PipelineSpec(
            scorer=MiScorer(),
            selection=SelectionConfig("top_n", n=2),
            classifier="knn",
            knn_neighbors=5,
        )
        _, report = grid_search(train, train.labels, test, test.labels, [spec], plan)
        assert report.chosen["classifier"] == "knn"
        assert 0.0 <= report.test_auroc <= 1.0
