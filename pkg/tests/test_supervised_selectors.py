import numpy as np
import pytest

from alrpool.models import ModelConfig, predict
from alrpool.selectors import (
    LabelOracle,
    SelectorSpec,
    _bootstrap_committee,
    _child_rng,
    _committee_variance,
    select,
    select_emcm,
    select_gsx,
    select_igs,
    select_qbc,
    select_rd,
    select_rd_emcm,
    select_rs,
    select_rsal,
)

from conftest import make_dataset

RIDGE = ModelConfig(kind="ridge", r=0.1)
SVR = ModelConfig(kind="svr", C=50.0, epsilon_factor=0.1, gamma=0.1)


def labeled_pool(seed=0, n=24, d=2, scale=1.0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d)) * scale
    y = X @ rng.standard_normal(d) + 0.1 * rng.standard_normal(n)
    return make_dataset(X, y)


class TestWarmStartBoundaries:
    def test_qbc_emcm_rsal_m5_equal_random_warm_start(self):
        pool = labeled_pool(3)
        rs5 = select_rs(pool, 5, seed=9).indices
        for fn, model in ((select_qbc, RIDGE), (select_emcm, RIDGE), (select_rsal, SVR)):
            oracle = LabelOracle.from_dataset(pool)
            assert fn(pool, 5, oracle, seed=9, model=model).indices == rs5
            assert oracle.revealed_count == 5

    def test_rd_emcm_m5_equals_cluster_representatives(self):
        pool = labeled_pool(4)
        oracle = LabelOracle.from_dataset(pool)
        got = select_rd_emcm(pool, 5, oracle, seed=2).indices
        assert got == select_rd(pool, 5, seed=2).indices

    def test_igs_m1_equals_gsx_first_pick(self):
        pool = labeled_pool(5)
        oracle = LabelOracle.from_dataset(pool)
        got = select_igs(pool, 1, oracle, seed=0)
        assert got.indices == select_gsx(pool, 1).indices
        assert oracle.revealed_count == 1

    def test_rd_emcm_init_override_uses_iterative_warm_start(self):
        from alrpool.selectors import select_irdm

        pool = labeled_pool(6, n=30)
        oracle = LabelOracle.from_dataset(pool)
        got = select_rd_emcm(pool, 5, oracle, seed=3, init_kind="irdm", c_max=5)
        assert got.indices == select_irdm(pool, 5, c_max=5, seed=3).indices


class TestQbc:
    def test_degenerate_committee_takes_smallest_index(self):
        # identical feature rows: every committee member predicts a constant,
        # so variances tie everywhere and the smallest unlabeled index wins
        X = np.ones((10, 2))
        y = np.arange(10.0)
        pool = make_dataset(X, y)
        oracle = LabelOracle.from_dataset(pool)
        cs = select_qbc(pool, 6, oracle, seed=1, model=RIDGE)
        warm = set(cs.indices[:5])
        expected = min(i for i in range(10) if i not in warm)
        assert cs.indices[5] == expected

    def test_pick_matches_exhaustive_variance_argmax(self):
        pool = labeled_pool(8, n=13, d=1, scale=2.0)
        seed = 5
        oracle = LabelOracle.from_dataset(pool)
        cs = select_qbc(pool, 6, oracle, seed=seed, committee_size=4, model=RIDGE)
        labeled = list(select_rs(pool, 5, seed=seed).indices)
        y_l = pool.labels[labeled]
        rng = _child_rng(seed, 1)  # same stream the selector consumes
        committee = _bootstrap_committee(rng, pool.features[labeled], y_l, 4, RIDGE)
        unlabeled = sorted(set(range(13)) - set(labeled))
        variances = _committee_variance(committee, pool.features[unlabeled])
        assert cs.indices[5] == unlabeled[int(variances.argmax())]

    def test_oracle_query_budget(self):
        pool = labeled_pool(9, n=30)
        oracle = LabelOracle.from_dataset(pool)
        select_qbc(pool, 12, oracle, seed=2, model=RIDGE)
        assert oracle.revealed_count == 12


class TestEmcm:
    def test_zero_disagreement_takes_smallest_index(self):
        X = np.ones((9, 2))
        y = np.linspace(0, 1, 9)
        pool = make_dataset(X, y)
        oracle = LabelOracle.from_dataset(pool)
        cs = select_emcm(pool, 6, oracle, seed=3, model=RIDGE)
        warm = set(cs.indices[:5])
        assert cs.indices[5] == min(i for i in range(9) if i not in warm)

    def test_pick_matches_bruteforce_scores(self):
        pool = labeled_pool(10, n=11, d=1)
        seed = 7
        oracle = LabelOracle.from_dataset(pool)
        cs = select_emcm(pool, 6, oracle, seed=seed, committee_size=4, model=RIDGE)

        labeled = list(select_rs(pool, 5, seed=seed).indices)
        y_l = pool.labels[labeled]
        rng = _child_rng(seed, 1)
        main = RIDGE.fit(pool.features[labeled], y_l)
        committee = _bootstrap_committee(rng, pool.features[labeled], y_l, 4, RIDGE)
        unlabeled = sorted(set(range(11)) - set(labeled))
        Xu = pool.features[unlabeled]
        f = predict(main, Xu)
        scores = np.zeros(len(unlabeled))
        for member in committee:
            scores += np.abs(predict(member, Xu) - f) * np.sqrt((Xu**2).sum(axis=1) + 1.0)
        scores /= 4.0
        assert cs.indices[5] == unlabeled[int(scores.argmax())]

    def test_requires_linear_model(self):
        pool = labeled_pool(1)
        oracle = LabelOracle.from_dataset(pool)
        with pytest.raises(ValueError, match="linear"):
            select_emcm(pool, 6, oracle, seed=0, model=SVR)


class TestRdEmcm:
    def test_next_pick_lands_in_unlabeled_blob(self):
        rng = np.random.default_rng(0)
        # two near blobs plus one far tight blob the warm start misses
        X = np.vstack([
            rng.normal(0.0, 0.5, (12, 2)),
            rng.normal(6.0, 0.5, (12, 2)),
            rng.normal((40.0, 40.0), 0.2, (6, 2)),
        ])
        y = X @ np.array([1.0, -0.5]) + 0.1 * rng.standard_normal(30)
        pool = make_dataset(X, y)
        far_blob = set(range(24, 30))
        for seed in range(60):
            warm = set(select_rs(pool, 5, seed=seed).indices)
            if not warm & far_blob:
                oracle = LabelOracle.from_dataset(pool)
                cs = select_rd_emcm(pool, 6, oracle, seed=seed, init_kind="rs")
                assert cs.indices[5] in far_blob
                return
        pytest.fail("no seed left the far blob unlabeled at warm start")


class TestIgs:
    def test_coincident_point_never_selected_while_alternatives_exist(self):
        # index 2 coincides with labeled index 0, so once the fitted line is
        # informative its min-product score stays 0 and it loses every pick
        X = np.array([[1.0], [-2.0], [1.0], [4.0], [-4.0]])
        y = 2.0 * X[:, 0]
        pool = make_dataset(X, y)
        oracle = LabelOracle.from_dataset(pool)
        cs = select_igs(pool, 4, oracle, seed=0, model=RIDGE)
        assert cs.indices[0] == 0
        # with one labeled sample every score is 0 (constant model), so the
        # second pick is the smallest-index tie-break; after that scores are
        # informative and the duplicate can never win
        assert cs.indices[1] == 1
        assert 2 not in cs.indices

    def test_pick_matches_bruteforce_product_score(self):
        pool = labeled_pool(12, n=11, d=1)
        oracle = LabelOracle.from_dataset(pool)
        cs = select_igs(pool, 3, oracle, seed=0, model=RIDGE)

        labeled = list(cs.indices[:2])
        y_l = pool.labels[labeled]
        fitted = RIDGE.fit(pool.features[labeled], y_l)
        unlabeled = sorted(set(range(11)) - set(labeled))
        best, best_score = None, -np.inf
        for idx in unlabeled:
            y_hat = predict(fitted, pool.features[[idx]])[0]
            score = min(
                np.linalg.norm(pool.features[idx] - pool.features[j]) * abs(y_hat - pool.labels[j])
                for j in labeled
            )
            if score > best_score + 1e-12:
                best, best_score = idx, score
        assert cs.indices[2] == best


class TestRsal:
    def test_zero_residuals_take_smallest_index(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((12, 2))
        pool = make_dataset(X, np.full(12, 3.0))  # constant labels: tube swallows
        oracle = LabelOracle.from_dataset(pool)
        cs = select_rsal(pool, 6, oracle, seed=4, model=SVR)
        warm = set(cs.indices[:5])
        assert cs.indices[5] == min(i for i in range(12) if i not in warm)

    def test_pick_matches_predicted_residual_argmax(self):
        pool = labeled_pool(13, n=12, d=1, scale=2.0)
        seed = 6
        oracle = LabelOracle.from_dataset(pool)
        cs = select_rsal(pool, 6, oracle, seed=seed, model=SVR)

        labeled = list(select_rs(pool, 5, seed=seed).indices)
        y_l = pool.labels[labeled]
        main = SVR.fit(pool.features[labeled], y_l)
        residuals = np.abs(y_l - predict(main, pool.features[labeled]))
        res_model = SVR.fit(pool.features[labeled], residuals)
        unlabeled = sorted(set(range(12)) - set(labeled))
        scores = predict(res_model, pool.features[unlabeled])
        assert cs.indices[5] == unlabeled[int(scores.argmax())]

    def test_requires_kernel_model(self):
        pool = labeled_pool(1)
        oracle = LabelOracle.from_dataset(pool)
        with pytest.raises(ValueError, match="kernel"):
            select_rsal(pool, 6, oracle, seed=0, model=RIDGE)


class TestNesting:
    @pytest.mark.parametrize("kind", ["qbc", "emcm", "rd_emcm", "igs", "rsal"])
    def test_smaller_m_is_prefix_of_larger(self, kind):
        pool = labeled_pool(14, n=26)
        spec = SelectorSpec(kind=kind, seed=5)
        model = SVR if kind == "rsal" else RIDGE
        small = select(spec, pool, 7, oracle=LabelOracle.from_dataset(pool), model=model)
        large = select(spec, pool, 10, oracle=LabelOracle.from_dataset(pool), model=model)
        assert large.indices[:7] == small.indices

    @pytest.mark.parametrize("kind", ["qbc", "emcm", "rd_emcm", "igs", "rsal"])
    def test_exactly_m_queries(self, kind):
        pool = labeled_pool(15, n=26)
        oracle = LabelOracle.from_dataset(pool)
        model = SVR if kind == "rsal" else RIDGE
        cs = select(SelectorSpec(kind=kind, seed=1), pool, 9, oracle=oracle, model=model)
        assert len(cs) == 9 and oracle.revealed_count == 9
