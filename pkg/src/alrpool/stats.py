"""Rank-based multiple comparisons: Dunn's procedure with FDR adjustment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, rankdata


@dataclass(frozen=True)
class DunnComparison:
    """One reference-vs-other comparison from :func:`dunn_fdr`."""

    other: str
    z: float
    p_raw: float
    p_adjusted: float
    significant: bool  # adjusted p < alpha / 2
    defined: bool = True


def benjamini_hochberg(p_values) -> np.ndarray:
    """Step-up FDR adjustment; adjusted values are monotone in the raw order."""
    p = np.asarray(p_values, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("need a non-empty 1-D vector of p-values")
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    scaled = p[order] * m / np.arange(1, m + 1)
    adjusted = np.minimum.accumulate(scaled[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(adjusted, 1.0)
    return out


def dunn_fdr(samples: dict, reference: str, alpha: float = 0.05) -> tuple[DunnComparison, ...]:
    """Dunn's multiple-comparison z-tests of one group against all others.

    All values are pooled and ranked (average ranks on ties); each
    (reference, other) pair gets a tie-corrected z-statistic and a two-sided
    normal p-value, adjusted across the pairs by Benjamini-Hochberg.  The
    ``significant`` flag applies the ``p < alpha / 2`` rejection rule.

    When every pooled value is identical the statistic is undefined and the
    comparisons come back flagged ``defined=False``.
    """
    names = list(samples)
    if reference not in names:
        raise ValueError(f"reference group {reference!r} not among {names}")
    if len(names) < 2:
        raise ValueError("need at least 2 groups")
    groups = {k: np.asarray(v, dtype=float) for k, v in samples.items()}
    sizes = {len(v) for v in groups.values()}
    if len(sizes) != 1 or 0 in sizes:
        raise ValueError("groups must hold equal-length non-empty value lists")

    pooled = np.concatenate([groups[k] for k in names])
    n_total = pooled.size
    ranks = rankdata(pooled)
    mean_rank = {}
    start = 0
    for k in names:
        n_k = groups[k].size
        mean_rank[k] = ranks[start : start + n_k].mean()
        start += n_k

    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float((tie_counts**3 - tie_counts).sum()) / (12.0 * (n_total - 1)) if n_total > 1 else 0.0
    var_base = n_total * (n_total + 1) / 12.0 - tie_term

    others = [k for k in names if k != reference]
    if var_base <= 0:
        return tuple(
            DunnComparison(other=k, z=float("nan"), p_raw=float("nan"),
                           p_adjusted=float("nan"), significant=False, defined=False)
            for k in others
        )

    zs, raws = [], []
    n_ref = groups[reference].size
    for k in others:
        se = np.sqrt(var_base * (1.0 / n_ref + 1.0 / groups[k].size))
        z = (mean_rank[reference] - mean_rank[k]) / se
        zs.append(float(z))
        raws.append(float(2.0 * norm.sf(abs(z))))
    adjusted = benjamini_hochberg(raws)
    return tuple(
        DunnComparison(other=k, z=z, p_raw=p, p_adjusted=float(a), significant=bool(a < alpha / 2))
        for k, z, p, a in zip(others, zs, raws, adjusted)
    )
