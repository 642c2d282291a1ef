import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sts_select.errors import MissingRedundancyError, NTooLargeError, TooFewFeaturesError
from sts_select.scoring import ScoreSet
from sts_select.selection import (
    SelectionConfig,
    select_mrmr,
    select_std_dev,
    select_top_n,
)


def score_set(relevance, redundancy=None, names=None):
    relevance = np.asarray(relevance, dtype=np.float64)
    names = names or tuple(f"f{i}" for i in range(relevance.size))
    red = None if redundancy is None else np.asarray(redundancy, dtype=np.float64)
    return ScoreSet(feature_names=tuple(names), relevance=relevance, redundancy=red)


# --- independent brute-force oracles (plain python, recomputed from scratch) ---

def brute_top_n(rel, n):
    order = sorted(range(len(rel)), key=lambda i: (-rel[i], i))
    return order[:n]


def brute_std_dev(rel, k):
    mu = sum(rel) / len(rel)
    sigma = math.sqrt(sum((r - mu) ** 2 for r in rel) / len(rel))
    cut = mu + k * sigma
    keep = [i for i in range(len(rel)) if rel[i] > cut]
    return sorted(keep, key=lambda i: (-rel[i], i))


def brute_mrmr(rel, red, n):
    selected = []
    remaining = list(range(len(rel)))
    for _ in range(n):
        best, best_score = None, None
        for f in remaining:
            acc = 0.0
            for s in selected:
                acc += red[f][s]
            score = rel[f] - (acc / len(selected) if selected else 0.0)
            if best is None or score > best_score:
                best, best_score = f, score
        selected.append(best)
        remaining.remove(best)
    return selected


class TestSelectTopN:
    def test_basic_ordering(self):
        result = select_top_n([0.5, 0.2, 0.9], 2)
        assert result.selected == (2, 0)

    def test_tie_goes_to_lower_index(self):
        result = select_top_n([0.4, 0.4, 0.1], 1)
        assert result.selected == (0,)

    def test_full_selection(self):
        result = select_top_n([0.1, 0.3, 0.2], 3)
        assert result.selected == (1, 2, 0)

    def test_n_too_large(self):
        with pytest.raises(NTooLargeError):
            select_top_n([0.1, 0.2], 3)

    def test_trace_shape(self):
        result = select_top_n([0.5, 0.9], 2, names=("a", "b"))
        assert [r.step for r in result.trace] == [1, 2]
        assert [r.name for r in result.trace] == ["b", "a"]
        assert all(r.redundancy == 0.0 for r in result.trace)

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=12), st.data())
    def test_matches_brute_force(self, rel, data):
        n = data.draw(st.integers(1, len(rel)))
        assert list(select_top_n(rel, n).selected) == brute_top_n(rel, n)


class TestSelectStdDev:
    def test_hand_computed_cut(self):
        # mu=3, population sigma=sqrt(2); cut ~ 4.414 -> only the 5 survives
        result = select_std_dev([1, 2, 3, 4, 5], 1.0)
        assert result.selected == (4,)

    def test_unreachable_threshold_gives_empty(self):
        result = select_std_dev([1, 2, 3], 1e9)
        assert result.selected == ()

    def test_constant_relevance_gives_empty(self):
        result = select_std_dev([2.0, 2.0, 2.0], 0.0)
        assert result.selected == ()

    def test_too_few_features(self):
        with pytest.raises(TooFewFeaturesError):
            select_std_dev([1.0], 1.0)

    def test_low_k_for_low_variance_scores(self):
        rel = [0.50, 0.52, 0.48, 0.51, 0.90]
        assert select_std_dev(rel, 0.3).selected == (4,)

    @given(st.lists(st.floats(-50, 50), min_size=2, max_size=12), st.floats(0, 3))
    def test_matches_brute_force(self, rel, k):
        assert list(select_std_dev(rel, k).selected) == brute_std_dev(rel, k)


class TestSelectMrmr:
    def test_hand_traced_greedy(self):
        red = np.array(
            [
                [1.0, 0.9, 0.0],
                [0.9, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        result = select_mrmr(score_set([0.9, 0.8, 0.1], red), 2)
        assert result.selected == (0, 2)
        # step 2: f1 scores 0.8 - 0.9 = -0.1, f2 scores 0.1 - 0.0 = 0.1
        assert result.trace[1].score == pytest.approx(0.1, abs=1e-15)
        assert result.trace[1].relevance == pytest.approx(0.1)
        assert result.trace[1].redundancy == pytest.approx(0.0)

    def test_first_pick_is_argmax_relevance(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            rel = rng.uniform(0, 1, 8)
            red = rng.uniform(0, 1, (8, 8))
            red = (red + red.T) / 2
            result = select_mrmr(score_set(rel, red), 3)
            assert result.selected[0] == int(np.argmax(rel))

    def test_zero_redundancy_reduces_to_top_n(self):
        rng = np.random.default_rng(2)
        rel = rng.uniform(0, 1, 9)
        red = np.zeros((9, 9))
        for n in range(1, 10):
            assert select_mrmr(score_set(rel, red), n).selected == select_top_n(rel, n).selected

    def test_step_one_redundancy_is_zero(self):
        red = np.full((3, 3), 0.5)
        result = select_mrmr(score_set([0.3, 0.2, 0.1], red), 3)
        assert result.trace[0].redundancy == 0.0

    def test_scores_can_go_negative_unclamped(self):
        red = np.array([[1.0, 0.95], [0.95, 1.0]])
        result = select_mrmr(score_set([0.9, 0.1], red), 2)
        assert result.trace[1].score == pytest.approx(0.1 - 0.95)
        assert result.trace[1].score < 0

    def test_trace_identity_holds(self):
        rng = np.random.default_rng(3)
        rel = rng.uniform(0, 1, 10)
        red = rng.uniform(0, 0.5, (10, 10))
        red = (red + red.T) / 2
        result = select_mrmr(score_set(rel, red), 10)
        for r in result.trace:
            assert r.score == pytest.approx(r.relevance - r.redundancy, abs=1e-12)

    def test_missing_redundancy(self):
        with pytest.raises(MissingRedundancyError):
            select_mrmr(score_set([0.1, 0.2]), 1)

    def test_n_too_large(self):
        red = np.eye(2)
        with pytest.raises(NTooLargeError):
            select_mrmr(score_set([0.1, 0.2], red), 3)

    def test_matches_brute_force_randomized(self):
        rng = np.random.default_rng(12345)
        for _ in range(200):
            count = int(rng.integers(2, 13))
            rel = rng.uniform(-1, 1, count)
            red = rng.uniform(-0.5, 1, (count, count))
            red = (red + red.T) / 2
            n = int(rng.integers(1, count + 1))
            got = list(select_mrmr(score_set(rel, red), n).selected)
            assert got == brute_mrmr(rel.tolist(), red.tolist(), n)


class TestDeterminismAndEquivariance:
    def test_repeat_runs_identical(self):
        rng = np.random.default_rng(4)
        rel = rng.uniform(0, 1, 10)
        red = rng.uniform(0, 1, (10, 10))
        red = (red + red.T) / 2
        a = select_mrmr(score_set(rel, red), 5)
        b = select_mrmr(score_set(rel, red), 5)
        assert a == b

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            count = 8
            rel = rng.permutation(np.linspace(0.1, 0.9, count))  # distinct scores
            red = rng.uniform(0, 0.3, (count, count))
            red = (red + red.T) / 2
            np.fill_diagonal(red, 1.0)
            perm = rng.permutation(count)
            rel_p = rel[perm]
            red_p = red[np.ix_(perm, perm)]
            base = select_mrmr(score_set(rel, red), 4).selected
            permuted = select_mrmr(score_set(rel_p, red_p), 4).selected
            inverse = np.empty(count, dtype=int)
            inverse[perm] = np.arange(count)
            assert tuple(inverse[list(base)]) == permuted

    def test_top_n_permutation_equivariance(self):
        rng = np.random.default_rng(6)
        rel = rng.permutation(np.linspace(0, 1, 9))
        perm = rng.permutation(9)
        inverse = np.empty(9, dtype=int)
        inverse[perm] = np.arange(9)
        base = select_top_n(rel, 4).selected
        permuted = select_top_n(rel[perm], 4).selected
        assert tuple(inverse[list(base)]) == permuted


class TestSelectionConfig:
    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            SelectionConfig(strategy="best")

    def test_bad_n(self):
        with pytest.raises(ValueError):
            SelectionConfig(strategy="top_n", n=0)

    def test_descriptor(self):
        assert SelectionConfig("top_n", n=7).descriptor() == {"strategy": "top_n", "n": 7}
        assert SelectionConfig("std_dev", k=0.3).descriptor() == {"strategy": "std_dev", "k": 0.3}


class TestSerialization:
    def test_selection_json_records(self, tmp_path):
        import json

        red = np.zeros((3, 3))
        result = select_mrmr(score_set([0.5, 0.1, 0.9], red, names=("a", "b", "c")), 2)
        p = tmp_path / "sel.json"
        result.save(p)
        records = json.loads(p.read_text())
        assert records[0] == {
            "step": 1,
            "feature_name": "c",
            "score": 0.9,
            "relevance": 0.9,
            "redundancy": 0.0,
        }
        assert len(records) == 2
