"""Pool-based sample selection for regression plus a reproducible benchmark harness.

The library is organized around small, pure functions over immutable value
objects:

- :mod:`alrpool.datasets`   loading, encoding, standardization, splitting,
  synthetic data generation
- :mod:`alrpool.clustering` seeded k-means (the substrate for cluster-based
  selectors)
- :mod:`alrpool.selectors`  the selection strategies, unsupervised and
  supervised, behind one dispatch function
- :mod:`alrpool.models`     ridge regression and epsilon-insensitive RBF-SVR
  with RMSE/CC metrics
- :mod:`alrpool.stats`      rank-based multiple comparisons with FDR control
- :mod:`alrpool.benchmark`  selection sweeps over repeated runs, AUC analysis,
  improvement tables
- :mod:`alrpool.cli`        the ``alrpool`` command line front end

Pool indices are 0-based everywhere inside the library; only the CLI prints
1-based indices.
"""

from alrpool.datasets import (
    Dataset,
    SplitSpec,
    StandardizationParams,
    load_csv,
    one_hot_encode,
    split_pool_test,
    standardize_apply,
    standardize_fit,
    synth_generate,
)
from alrpool.clustering import ClusterModel, kmeans, nearest_to_centroid
from alrpool.models import (
    Metrics,
    RidgeModel,
    SvrModel,
    evaluate,
    predict,
    ridge_fit,
    svr_fit,
)
from alrpool.selectors import (
    CandidateSet,
    IterationHistory,
    LabelOracle,
    SelectorSpec,
    select,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "SplitSpec",
    "StandardizationParams",
    "load_csv",
    "one_hot_encode",
    "split_pool_test",
    "standardize_apply",
    "standardize_fit",
    "synth_generate",
    "ClusterModel",
    "kmeans",
    "nearest_to_centroid",
    "Metrics",
    "RidgeModel",
    "SvrModel",
    "evaluate",
    "predict",
    "ridge_fit",
    "svr_fit",
    "CandidateSet",
    "IterationHistory",
    "LabelOracle",
    "SelectorSpec",
    "select",
]
