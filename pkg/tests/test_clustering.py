import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alrpool.clustering import kmeans, nearest_to_centroid

from _oracles import two_cluster_optimum


def recompute_inertia(X, model):
    return sum(
        float(((X[model.member_lists[m]] - model.centroids[m]) ** 2).sum())
        for m in range(model.k)
    )


class TestKmeans:
    def test_k1_centroid_is_mean(self):
        X = np.random.default_rng(0).standard_normal((17, 3))
        model = kmeans(X, 1, seed=4)
        assert np.allclose(model.centroids[0], X.mean(axis=0), atol=1e-12)
        assert model.inertia == pytest.approx(((X - X.mean(axis=0)) ** 2).sum())

    def test_k_equals_n(self):
        X = np.arange(10.0).reshape(5, 2)
        model = kmeans(X, 5, seed=0)
        assert model.inertia == 0.0
        assert sorted(len(m) for m in model.member_lists) == [1] * 5

    def test_two_blob_instance_reaches_global_optimum(self):
        rng = np.random.default_rng(1)
        X = np.vstack([rng.normal(0.0, 0.2, size=(6, 2)), rng.normal(8.0, 0.2, size=(6, 2))])
        best, best_mask = two_cluster_optimum(X)
        model = kmeans(X, 2, seed=3)
        assert model.inertia == pytest.approx(best, rel=1e-9)
        got = model.assignments == model.assignments[-1]
        assert np.array_equal(got, best_mask) or np.array_equal(got, ~best_mask)

    def test_member_lists_partition_and_inertia_consistent(self):
        X = np.random.default_rng(2).standard_normal((40, 3))
        model = kmeans(X, 7, seed=5)
        all_members = np.sort(np.concatenate(model.member_lists))
        assert all_members.tolist() == list(range(40))
        assert model.inertia == pytest.approx(recompute_inertia(X, model), rel=1e-9)
        assert all(len(m) >= 1 for m in model.member_lists)

    def test_duplicate_points_force_repair_but_clusters_stay_nonempty(self):
        X = np.array([[0.0, 0.0]] * 6 + [[5.0, 5.0]])
        model = kmeans(X, 3, seed=0)
        assert all(len(m) >= 1 for m in model.member_lists)
        assert np.sort(np.concatenate(model.member_lists)).tolist() == list(range(7))

    @given(st.integers(0, 500))
    @settings(max_examples=25, deadline=None)
    def test_inertia_history_non_increasing(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((30, 2)) * rng.uniform(0.5, 3)
        model = kmeans(X, int(rng.integers(1, 8)), seed=seed)
        hist = np.array(model.inertia_history)
        assert np.all(np.diff(hist) <= 1e-12 * max(1.0, hist[0]))

    def test_determinism(self):
        X = np.random.default_rng(9).standard_normal((25, 2))
        a = kmeans(X, 4, seed=11)
        b = kmeans(X, 4, seed=11)
        assert np.array_equal(a.assignments, b.assignments)
        assert np.array_equal(a.centroids, b.centroids)

    def test_row_permutation_with_matching_init_relabels(self):
        rng = np.random.default_rng(12)
        X = rng.standard_normal((20, 2))
        init = X[[3, 11, 17]]
        perm = rng.permutation(20)
        a = kmeans(X, 3, seed=0, init_centroids=init)
        b = kmeans(X[perm], 3, seed=0, init_centroids=init)
        # same partition of the underlying points, up to cluster relabeling
        sets_a = {frozenset(m.tolist()) for m in a.member_lists}
        sets_b = {frozenset(perm[m].tolist()) for m in b.member_lists}
        assert sets_a == sets_b

    def test_validation_errors(self):
        X = np.ones((3, 2))
        with pytest.raises(ValueError):
            kmeans(X, 4, seed=0)
        with pytest.raises(ValueError):
            kmeans(X, 0, seed=0)
        with pytest.raises(ValueError):
            kmeans(np.array([[np.inf, 0.0]]), 1, seed=0)
        with pytest.raises(ValueError):
            kmeans(X, 2, seed=0, max_iter=0)
        with pytest.raises(ValueError):
            kmeans(X, 2, seed=0, tol=-1.0)


class TestNearestToCentroid:
    def test_singleton_cluster(self):
        X = np.array([[0.0], [100.0]])
        model = kmeans(X, 2, seed=0)
        for m in range(2):
            only = model.member_lists[m][0]
            assert nearest_to_centroid(model, X, m) == only

    def test_direct_distance_comparison(self):
        X = np.array([[0.0], [1.0], [10.0]])
        model = kmeans(X, 1, seed=0)
        assert model.centroids[0][0] == pytest.approx(11.0 / 3.0)
        assert nearest_to_centroid(model, X, 0) == 1

    def test_tie_breaks_to_smaller_index(self):
        X = np.array([[4.0], [6.0]])  # centroid 5.0, both at distance 1 exactly
        model = kmeans(X, 1, seed=0)
        assert nearest_to_centroid(model, X, 0) == 0

    def test_cluster_id_out_of_range(self):
        X = np.array([[0.0], [1.0]])
        model = kmeans(X, 1, seed=0)
        with pytest.raises(ValueError):
            nearest_to_centroid(model, X, 1)
