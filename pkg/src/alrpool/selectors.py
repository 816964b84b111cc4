"""Sample-selection strategies over an unlabeled pool.

Unsupervised strategies (``rs``, ``gsx``, ``rd``, ``irdm``) use feature
geometry only.  Supervised strategies (``qbc``, ``emcm``, ``rd_emcm``,
``igs``, ``rsal``) query a :class:`LabelOracle` one sample at a time after a
short warm start.  All strategies return pool indices in selection order, so
a prefix of a selection is itself a valid smaller selection for the
supervised kinds.

Pool indices and candidate positions are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from alrpool.clustering import ClusterModel, kmeans, nearest_to_centroid
from alrpool.datasets import Dataset
from alrpool.models import (
    RIDGE_DEFAULT,
    SVR_DEFAULT,
    ModelConfig,
    predict,
)

UNSUPERVISED_KINDS = ("rs", "gsx", "rd", "irdm")
SUPERVISED_KINDS = ("qbc", "emcm", "rd_emcm", "igs", "rsal")

# warm-start rule and size for each supervised strategy
_DEFAULT_INIT = {"qbc": "rs", "emcm": "rs", "rsal": "rs", "rd_emcm": "rd", "igs": "gsx"}
_DEFAULT_INIT_SIZE = {"qbc": 5, "emcm": 5, "rsal": 5, "rd_emcm": 5, "igs": 1}


@dataclass(frozen=True)
class SelectorSpec:
    """A selection strategy by name plus its hyperparameters."""

    kind: str
    seed: int = 0
    c_max: int = 5  # irdm sweep cap
    committee_size: int = 4  # qbc / emcm
    n_init: int | None = None  # supervised warm-start size; default per kind
    init_kind: str | None = None  # warm-start strategy; default per kind
    model_kind: str = "ridge"  # committee / main model family for qbc
    name: str = ""  # report label; defaults to kind
    model_names: tuple[str, ...] = ()  # explicit benchmark model pairing, empty = all compatible

    def __post_init__(self):
        kind = self.kind.lower().replace("-", "_")
        if kind not in UNSUPERVISED_KINDS + SUPERVISED_KINDS:
            raise ValueError(f"unknown selector kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not self.name:
            object.__setattr__(self, "name", kind)
        if self.c_max < 0:
            raise ValueError("c_max must be >= 0")
        if self.committee_size < 2:
            raise ValueError("committee_size must be >= 2")
        if self.n_init is not None and self.n_init < 1:
            raise ValueError("n_init must be >= 1")
        if self.init_kind is not None:
            ik = self.init_kind.lower().replace("-", "_")
            if ik not in UNSUPERVISED_KINDS:
                raise ValueError(f"init_kind must be unsupervised, got {self.init_kind!r}")
            object.__setattr__(self, "init_kind", ik)

    @property
    def is_supervised(self) -> bool:
        return self.kind in SUPERVISED_KINDS


@dataclass(frozen=True)
class IterationHistory:
    """Sorted candidate index lists after initialization and each kept sweep."""

    rows: tuple[tuple[int, ...], ...]
    sweeps_run: int = 0
    terminated_by_repeat: bool = False


@dataclass(frozen=True)
class CandidateSet:
    """Distinct pool indices in selection order."""

    indices: tuple[int, ...]
    history: IterationHistory | None = None

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise ValueError("candidate set contains duplicate indices")
        if any(i < 0 for i in idx):
            raise ValueError("candidate indices must be non-negative")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)


class LabelOracle:
    """Simulated annotator: reveals true labels by pool index and counts them."""

    def __init__(self, labels):
        y = np.asarray(labels, dtype=float)
        if y.ndim != 1 or not np.isfinite(y).all():
            raise ValueError("oracle labels must be a finite 1-D vector")
        self._labels = y
        self._revealed: dict[int, float] = {}

    @classmethod
    def from_dataset(cls, pool: Dataset) -> "LabelOracle":
        if pool.labels is None:
            raise ValueError(f"dataset {pool.name!r} has no labels to reveal")
        return cls(pool.labels)

    def query(self, index: int) -> float:
        index = int(index)
        if not 0 <= index < self._labels.shape[0]:
            raise IndexError(f"pool index {index} out of range")
        if index not in self._revealed:
            self._revealed[index] = float(self._labels[index])
        return self._revealed[index]

    @property
    def revealed_count(self) -> int:
        return len(self._revealed)


def _check_m(M: int, n: int):
    if not 1 <= M <= n:
        raise ValueError(f"need 1 <= M <= N, got M={M}, N={n}")


def _child_rng(seed: int, *tag: int) -> np.random.Generator:
    # independent stream per (seed, tag) so warm starts can share the bare seed
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tag))


def _child_seed(seed: int, *tag: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=tag).generate_state(1)[0])


# ---------------------------------------------------------------------------
# unsupervised strategies


def select_rs(pool: Dataset, M: int, seed: int) -> CandidateSet:
    """Seeded uniform sampling without replacement."""
    _check_m(M, pool.n_samples)
    idx = np.random.default_rng(seed).choice(pool.n_samples, size=M, replace=False)
    return CandidateSet(tuple(int(i) for i in idx))


def select_gsx(pool: Dataset, M: int, seed: int = 0) -> CandidateSet:
    """Greedy max-min-distance coverage of the feature space.

    The first pick is the point closest to the pool centroid; each later pick
    maximizes the minimum distance to everything already selected.  The rule
    is deterministic; ``seed`` is accepted for interface uniformity only.
    """
    X = pool.features
    _check_m(M, X.shape[0])
    d2c = ((X - X.mean(axis=0)) ** 2).sum(axis=1)
    selected = [int(d2c.argmin())]
    min_d2 = ((X - X[selected[0]]) ** 2).sum(axis=1)
    for _ in range(1, M):
        scores = min_d2.copy()
        scores[selected] = -1.0
        nxt = int(scores.argmax())
        selected.append(nxt)
        min_d2 = np.minimum(min_d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return CandidateSet(tuple(selected))


def select_rd(pool: Dataset, M: int, seed: int, init_centroids=None) -> CandidateSet:
    """k-means with k = M, then each cluster's centroid-nearest member."""
    _check_m(M, pool.n_samples)
    model = kmeans(pool.features, M, seed, init_centroids=init_centroids)
    picks = tuple(nearest_to_centroid(model, pool.features, m) for m in range(M))
    return CandidateSet(picks)


def representativeness(pool: Dataset, cluster_members, n: int) -> float:
    """Average distance from sample ``n`` to its cluster's members.

    The sum runs over all members including ``n`` itself (contributing 0) and
    is divided by the member count minus one; a singleton cluster scores 0.
    """
    members = np.asarray(cluster_members, dtype=int)
    if n not in members:
        raise ValueError(f"sample {n} is not a member of the given cluster")
    if members.size == 1:
        return 0.0
    d = np.sqrt(((pool.features[members] - pool.features[n]) ** 2).sum(axis=1))
    return float(d.sum() / (members.size - 1))


def diversity(pool: Dataset, fixed_candidates, n: int) -> float:
    """Minimum distance from sample ``n`` to the fixed candidate samples."""
    fixed = np.asarray(fixed_candidates, dtype=int)
    if fixed.size == 0:
        raise ValueError("fixed candidate set is empty")
    if n in fixed:
        raise ValueError(f"sample {n} is itself a fixed candidate")
    d = np.sqrt(((pool.features[fixed] - pool.features[n]) ** 2).sum(axis=1))
    return float(d.min())


def _all_representativeness(X: np.ndarray, model: ClusterModel) -> np.ndarray:
    """Representativeness of every pool sample within its own cluster."""
    R = np.zeros(X.shape[0])
    for members in model.member_lists:
        if members.size > 1:
            D = cdist(X[members], X[members])
            R[members] = D.sum(axis=1) / (members.size - 1)
    return R


def irdm_update_one(
    pool: Dataset,
    model: ClusterModel,
    candidates: CandidateSet,
    m: int,
    cached_R: np.ndarray,
) -> int:
    """Best replacement for candidate position ``m`` with the others fixed.

    Maximizes diversity-minus-representativeness over the members of cluster
    ``m``; ties go to the smallest pool index.  With a single candidate there
    is no diversity term and the most representative member wins.
    """
    M = len(candidates)
    if not 0 <= m < M:
        raise ValueError(f"position {m} out of range [0, {M})")
    X = pool.features
    members = model.member_lists[m]
    fixed = np.array([c for p, c in enumerate(candidates.indices) if p != m], dtype=int)
    if M == 1:
        objective = -cached_R[members]
    else:
        D = cdist(X[members], X[fixed]).min(axis=1)
        objective = D - cached_R[members]
    free = ~np.isin(members, fixed)
    if free.any():  # never hand the position to an already-fixed candidate
        members = members[free]
        objective = objective[free]
    return int(members[objective.argmax()])


def select_irdm(pool: Dataset, M: int, c_max: int, seed: int, init_centroids=None) -> CandidateSet:
    """Cluster-based selection refined by coordinate sweeps.

    Starts from the k-means centroid-nearest picks, then runs up to ``c_max``
    sweeps, each re-optimizing every candidate position in turn.  Iteration
    stops early when the sorted candidate set matches any earlier state.
    """
    _check_m(M, pool.n_samples)
    if c_max < 0:
        raise ValueError("c_max must be >= 0")
    X = pool.features
    model = kmeans(X, M, seed, init_centroids=init_centroids)
    candidates = [nearest_to_centroid(model, X, m) for m in range(M)]
    rows = [tuple(sorted(candidates))]
    cached_R = _all_representativeness(X, model)

    sweeps = 0
    repeated = False
    while sweeps < c_max:
        current = CandidateSet(tuple(candidates))
        for m in range(M):
            current = CandidateSet(
                current.indices[:m] + (irdm_update_one(pool, model, current, m, cached_R),) + current.indices[m + 1 :]
            )
        candidates = list(current.indices)
        sweeps += 1
        row = tuple(sorted(candidates))
        if row in rows:
            repeated = True
            break
        rows.append(row)

    history = IterationHistory(
        rows=tuple(rows), sweeps_run=sweeps, terminated_by_repeat=repeated
    )
    return CandidateSet(tuple(candidates), history=history)


# ---------------------------------------------------------------------------
# supervised strategies


def _select_unsupervised(kind: str, pool: Dataset, M: int, seed: int, c_max: int = 5) -> CandidateSet:
    if kind == "rs":
        return select_rs(pool, M, seed)
    if kind == "gsx":
        return select_gsx(pool, M, seed)
    if kind == "rd":
        return select_rd(pool, M, seed)
    if kind == "irdm":
        return select_irdm(pool, M, c_max, seed)
    raise ValueError(f"unknown unsupervised selector {kind!r}")


def _warm_start(kind, pool, M, oracle, seed, init_kind, n_init, c_max=5):
    init_kind = init_kind or _DEFAULT_INIT[kind]
    n_init = n_init if n_init is not None else _DEFAULT_INIT_SIZE[kind]
    warm = _select_unsupervised(init_kind, pool, min(M, n_init), seed, c_max=c_max)
    labeled = list(warm.indices)
    labels = [oracle.query(i) for i in labeled]
    return labeled, labels


def _unlabeled(n: int, labeled) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[labeled] = False
    return np.flatnonzero(mask)  # ascending, so argmax ties pick the smallest index


def _bootstrap_committee(rng, X, y, size: int, model: ModelConfig):
    n = X.shape[0]
    members = []
    for _ in range(size):
        rows = rng.integers(0, n, size=n)
        members.append(model.fit(X[rows], y[rows]))
    return members


def _committee_variance(members, X: np.ndarray) -> np.ndarray:
    preds = np.stack([predict(m, X) for m in members])
    return preds.var(axis=0)


def select_qbc(
    pool: Dataset,
    M: int,
    oracle: LabelOracle,
    seed: int,
    committee_size: int = 4,
    model: ModelConfig = RIDGE_DEFAULT,
    n_init: int | None = None,
    init_kind: str | None = None,
) -> CandidateSet:
    """Query-by-committee: label the point the committee disagrees on most."""
    X = pool.features
    _check_m(M, X.shape[0])
    labeled, labels = _warm_start("qbc", pool, M, oracle, seed, init_kind, n_init)
    rng = _child_rng(seed, 1)
    while len(labeled) < M:
        un = _unlabeled(X.shape[0], labeled)
        committee = _bootstrap_committee(rng, X[labeled], np.array(labels), committee_size, model)
        scores = _committee_variance(committee, X[un])
        pick = int(un[scores.argmax()])
        labeled.append(pick)
        labels.append(oracle.query(pick))
    return CandidateSet(tuple(labeled))


def _emcm_scores(rng, X_labeled, y_labeled, X_unlabeled, committee_size, model):
    main = model.fit(X_labeled, y_labeled)
    committee = _bootstrap_committee(rng, X_labeled, y_labeled, committee_size, model)
    f = predict(main, X_unlabeled)
    aug_norm = np.sqrt((X_unlabeled**2).sum(axis=1) + 1.0)  # intercept term appended
    disagree = np.stack([np.abs(predict(m, X_unlabeled) - f) for m in committee])
    return disagree.mean(axis=0) * aug_norm


def select_emcm(
    pool: Dataset,
    M: int,
    oracle: LabelOracle,
    seed: int,
    committee_size: int = 4,
    model: ModelConfig = RIDGE_DEFAULT,
    n_init: int | None = None,
    init_kind: str | None = None,
) -> CandidateSet:
    """Expected-model-change maximization for linear regression."""
    if model.kind != "ridge":
        raise ValueError("emcm applies to linear regression only")
    X = pool.features
    _check_m(M, X.shape[0])
    labeled, labels = _warm_start("emcm", pool, M, oracle, seed, init_kind, n_init)
    rng = _child_rng(seed, 1)
    while len(labeled) < M:
        un = _unlabeled(X.shape[0], labeled)
        scores = _emcm_scores(rng, X[labeled], np.array(labels), X[un], committee_size, model)
        pick = int(un[scores.argmax()])
        labeled.append(pick)
        labels.append(oracle.query(pick))
    return CandidateSet(tuple(labeled))


def select_rd_emcm(
    pool: Dataset,
    M: int,
    oracle: LabelOracle,
    seed: int,
    committee_size: int = 4,
    model: ModelConfig = RIDGE_DEFAULT,
    init_kind: str | None = None,
    c_max: int = 5,
) -> CandidateSet:
    """Cluster-guided expected-model-change.

    After the warm start, each step clusters the pool into one more group
    than there are labeled samples.  If some clusters hold no labeled sample
    the largest of them is scored by the model-change criterion; otherwise
    the whole unlabeled pool is.
    """
    if model.kind != "ridge":
        raise ValueError("rd_emcm applies to linear regression only")
    X = pool.features
    _check_m(M, X.shape[0])
    labeled, labels = _warm_start("rd_emcm", pool, M, oracle, seed, init_kind, None, c_max=c_max)
    rng = _child_rng(seed, 1)
    while len(labeled) < M:
        L = len(labeled)
        cm = kmeans(X, L + 1, _child_seed(seed, 2, L))
        labeled_set = set(labeled)
        empty_of_labels = [
            m for m in range(cm.k) if not labeled_set.intersection(cm.member_lists[m].tolist())
        ]
        if empty_of_labels:
            target = max(empty_of_labels, key=lambda m: (cm.member_lists[m].size, -m))
            candidates = cm.member_lists[target]
        else:
            candidates = _unlabeled(X.shape[0], labeled)
        scores = _emcm_scores(rng, X[labeled], np.array(labels), X[candidates], committee_size, model)
        pick = int(candidates[scores.argmax()])
        labeled.append(pick)
        labels.append(oracle.query(pick))
    return CandidateSet(tuple(labeled))


def select_igs(
    pool: Dataset,
    M: int,
    oracle: LabelOracle,
    seed: int,
    model: ModelConfig = RIDGE_DEFAULT,
) -> CandidateSet:
    """Greedy sampling in both the feature space and the predicted label space.

    Scores an unlabeled point by the minimum over labeled samples of
    (feature distance) * (distance between its predicted label and the
    labeled sample's true label).
    """
    X = pool.features
    _check_m(M, X.shape[0])
    labeled, labels = _warm_start("igs", pool, M, oracle, seed, "gsx", 1)
    while len(labeled) < M:
        un = _unlabeled(X.shape[0], labeled)
        fitted = model.fit(X[labeled], np.array(labels))
        y_hat = predict(fitted, X[un])
        dx = cdist(X[un], X[labeled])
        dy = np.abs(y_hat[:, None] - np.array(labels)[None, :])
        scores = (dx * dy).min(axis=1)
        pick = int(un[scores.argmax()])
        labeled.append(pick)
        labels.append(oracle.query(pick))
    return CandidateSet(tuple(labeled))


def select_rsal(
    pool: Dataset,
    M: int,
    oracle: LabelOracle,
    seed: int,
    model: ModelConfig = SVR_DEFAULT,
    n_init: int | None = None,
    init_kind: str | None = None,
) -> CandidateSet:
    """Residual-regression selection: label where the estimated error is largest."""
    if model.kind != "svr":
        raise ValueError("rsal applies to kernel regression only")
    X = pool.features
    _check_m(M, X.shape[0])
    labeled, labels = _warm_start("rsal", pool, M, oracle, seed, init_kind, n_init)
    while len(labeled) < M:
        un = _unlabeled(X.shape[0], labeled)
        y_l = np.array(labels)
        main = model.fit(X[labeled], y_l)
        residuals = np.abs(y_l - predict(main, X[labeled]))
        residual_model = model.fit(X[labeled], residuals)
        scores = predict(residual_model, X[un])
        pick = int(un[scores.argmax()])
        labeled.append(pick)
        labels.append(oracle.query(pick))
    return CandidateSet(tuple(labeled))


# ---------------------------------------------------------------------------
# dispatch


def select(
    spec: SelectorSpec,
    pool: Dataset,
    M: int,
    oracle: LabelOracle | None = None,
    model: ModelConfig | None = None,
) -> CandidateSet:
    """Run the strategy named by ``spec`` on the pool.

    Supervised kinds require an oracle; unsupervised kinds ignore it and
    never query.  ``model`` overrides the model family used internally by
    the supervised kinds (default: per ``spec.model_kind``).
    """
    _check_m(M, pool.n_samples)
    kind = spec.kind
    if kind in UNSUPERVISED_KINDS:
        if kind == "irdm":
            return select_irdm(pool, M, spec.c_max, spec.seed)
        return _select_unsupervised(kind, pool, M, spec.seed)

    if oracle is None:
        raise ValueError(f"selector {kind!r} is supervised and needs a label oracle")
    if model is None:
        model = SVR_DEFAULT if (spec.model_kind == "svr" or kind == "rsal") else RIDGE_DEFAULT
    if kind == "qbc":
        return select_qbc(
            pool, M, oracle, spec.seed, spec.committee_size, model, spec.n_init, spec.init_kind
        )
    if kind == "emcm":
        return select_emcm(
            pool, M, oracle, spec.seed, spec.committee_size, model, spec.n_init, spec.init_kind
        )
    if kind == "rd_emcm":
        return select_rd_emcm(
            pool, M, oracle, spec.seed, spec.committee_size, model, spec.init_kind, spec.c_max
        )
    if kind == "igs":
        return select_igs(pool, M, oracle, spec.seed, model)
    if kind == "rsal":
        return select_rsal(pool, M, oracle, spec.seed, model, spec.n_init, spec.init_kind)
    raise ValueError(f"unknown selector kind {kind!r}")
