"""Benchmark harness: selection sweeps, repeated runs, AUC analysis, reports.

Every (dataset, run) pair is an independent, deterministic work unit: the
split seed is ``base_seed XOR run`` and each selector's per-run seed is mixed
from (base_seed, run, selector.seed).  Selectors sharing a seed therefore see
identical splits and identical k-means initializations, which keeps the
comparisons paired.  Unsupervised selectors re-select from scratch at every
M; supervised selectors run once to the largest M and are evaluated on
prefixes, so their labeled sets are nested across M.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from alrpool.datasets import Dataset, SplitSpec, load_csv, one_hot_encode, split_pool_test, synth_generate
from alrpool.models import ModelConfig, evaluate, predict
from alrpool.selectors import LabelOracle, SelectorSpec, select
from alrpool.stats import DunnComparison, dunn_fdr

# which selector kinds pair with which model family (linear-only criteria
# cannot drive a kernel model and vice versa)
MODEL_COMPAT = {
    "ridge": {"rs", "gsx", "rd", "irdm", "qbc", "emcm", "rd_emcm", "igs"},
    "svr": {"rs", "gsx", "rd", "irdm", "qbc", "rsal"},
}

CURVES_FILE = "curves.csv"
RAW_FILE = "raw_metrics.csv"
AUC_FILE = "auc.csv"
IMPROVEMENT_FILE = "improvement.csv"
PVALUES_FILE = "pvalues.csv"
ERRORS_FILE = "errors.csv"
CONFIG_ECHO_FILE = "config_used.cfg"

REPORT_FILES = (CURVES_FILE, RAW_FILE, AUC_FILE, IMPROVEMENT_FILE, PVALUES_FILE)


@dataclass(frozen=True)
class DatasetSpec:
    """A dataset by CSV path or by synthetic generator."""

    name: str
    path: str | None = None
    label_column: str | None = None
    categorical_columns: tuple[str, ...] = ()
    synth: str | None = None
    n: int = 200
    d: int = 5
    noise: float = 0.5
    synth_seed: int = 0
    centers: int = 3

    def __post_init__(self):
        if (self.path is None) == (self.synth is None):
            raise ValueError(f"dataset {self.name!r}: set exactly one of path= or synth=")
        if self.path is not None and self.label_column is None:
            raise ValueError(f"dataset {self.name!r}: CSV datasets need a label_column")

    def load(self) -> Dataset:
        if self.path is not None:
            ds = load_csv(self.path, self.label_column, self.categorical_columns)
            ds = one_hot_encode(ds)
        else:
            ds = synth_generate(self.synth, self.n, self.d, self.noise, self.synth_seed, self.centers)
        return Dataset(name=self.name, features=ds.features, labels=ds.labels, columns=ds.columns)


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[DatasetSpec, ...]
    selectors: tuple[SelectorSpec, ...]
    models: tuple[ModelConfig, ...]
    m_range: tuple[int, int] = (5, 50)
    auc_range: tuple[int, int] = (5, 20)
    runs: int = 100
    base_seed: int = 0
    pool_fraction: float = 0.5

    def __post_init__(self):
        if not (self.datasets and self.selectors and self.models):
            raise ValueError("config needs at least one dataset, selector, and model")
        for label, items in (
            ("dataset", [d.name for d in self.datasets]),
            ("selector", [s.name for s in self.selectors]),
            ("model", [m.name for m in self.models]),
        ):
            if len(set(items)) != len(items):
                raise ValueError(f"duplicate {label} names: {items}")
        lo, hi = self.m_range
        alo, ahi = self.auc_range
        if not (1 <= lo <= hi):
            raise ValueError(f"bad m_range {self.m_range}")
        if not (lo <= alo <= ahi <= hi):
            raise ValueError(f"auc_range {self.auc_range} must lie within m_range {self.m_range}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")

    @property
    def m_values(self) -> tuple[int, ...]:
        return tuple(range(self.m_range[0], self.m_range[1] + 1))


@dataclass(frozen=True)
class EvaluationCurve:
    """Per-M metrics for one (dataset, selector, model), raw values retained."""

    dataset: str
    selector: str
    model: str
    m_values: tuple[int, ...]
    rmse_raw: np.ndarray  # (runs, |M|)
    cc_raw: np.ndarray  # (runs, |M|); nan marks undefined CC

    def __post_init__(self):
        for arr in (self.rmse_raw, self.cc_raw):
            np.asarray(arr).setflags(write=False)

    @property
    def runs(self) -> int:
        return self.rmse_raw.shape[0]

    @property
    def rmse_mean(self) -> np.ndarray:
        return self.rmse_raw.mean(axis=0)

    @property
    def rmse_std(self) -> np.ndarray:
        return self.rmse_raw.std(axis=0)

    @property
    def cc_mean(self) -> np.ndarray:
        # mean over the runs where CC was defined; nan when none were
        with np.errstate(invalid="ignore"):
            out = np.nanmean(np.where(np.isnan(self.cc_raw), np.nan, self.cc_raw), axis=0)
        return out

    @property
    def cc_std(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.nanstd(self.cc_raw, axis=0)

    @property
    def cc_undefined(self) -> np.ndarray:
        return np.isnan(self.cc_raw).sum(axis=0)


@dataclass(frozen=True)
class ErrorRecord:
    dataset: str
    selector: str
    run: int  # -1 for failures not tied to a single run
    message: str


@dataclass(frozen=True)
class ImprovementRow:
    selector: str
    model: str
    metric: str  # "rmse" | "cc"
    mean_pct: float
    var_pct: float
    per_dataset: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class BenchmarkReport:
    auc_range: tuple[int, int]
    reference: str
    dunn_reference: str
    aucs: dict[tuple[str, str, str, str], float]  # (dataset, selector, model, metric)
    normalized: dict[tuple[str, str, str, str], float]
    improvements: tuple[ImprovementRow, ...]
    pvalues: dict[tuple[str, str], tuple[DunnComparison, ...]]  # (model, metric)


def _selection_seed(base_seed: int, run: int, spec_seed: int) -> int:
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(run, spec_seed))
    return int(ss.generate_state(1)[0])


def compatible_models(spec: SelectorSpec, models) -> list[ModelConfig]:
    """Model configs this selector is paired with, honoring explicit requests."""
    if spec.model_names:
        by_name = {m.name: m for m in models}
        chosen = []
        for name in spec.model_names:
            if name not in by_name:
                raise ValueError(f"selector {spec.name!r} requests unknown model {name!r}")
            m = by_name[name]
            if spec.kind not in MODEL_COMPAT[m.kind]:
                raise ValueError(
                    f"selector {spec.name!r} ({spec.kind}) is incompatible with model "
                    f"{name!r} ({m.kind})"
                )
            chosen.append(m)
        return chosen
    return [m for m in models if spec.kind in MODEL_COMPAT[m.kind]]


def _run_cell(dataset: Dataset, config: ExperimentConfig, run: int):
    """All selector/model/M evaluations for one (dataset, run)."""
    results = {}
    errors = []
    pool, test = split_pool_test(
        dataset, SplitSpec(pool_fraction=config.pool_fraction, seed=config.base_seed ^ run)
    )
    m_values = config.m_values
    for spec in config.selectors:
        models = compatible_models(spec, config.models)
        if not models:
            continue
        run_spec = replace(spec, seed=_selection_seed(config.base_seed, run, spec.seed))
        local = {m.name: [] for m in models}
        try:
            if not spec.is_supervised:
                for M in m_values:
                    cs = select(run_spec, pool, M)
                    idx = list(cs.indices)
                    X_l, y_l = pool.features[idx], pool.labels[idx]
                    for model in models:
                        fitted = model.fit(X_l, y_l)
                        met = evaluate(test.labels, predict(fitted, test.features))
                        local[model.name].append((M, met.rmse, met.cc))
            else:
                for model in models:
                    oracle = LabelOracle.from_dataset(pool)
                    cs = select(run_spec, pool, m_values[-1], oracle=oracle, model=model)
                    for M in m_values:
                        idx = list(cs.indices[:M])
                        fitted = model.fit(pool.features[idx], pool.labels[idx])
                        met = evaluate(test.labels, predict(fitted, test.features))
                        local[model.name].append((M, met.rmse, met.cc))
        except Exception as exc:  # cell-level isolation; the harness reports and moves on
            errors.append(ErrorRecord(dataset.name, spec.name, run, f"{type(exc).__name__}: {exc}"))
            continue
        for model_name, rows in local.items():
            results[(dataset.name, spec.name, model_name)] = rows
    return results, errors


def _cell_worker(args):
    return _run_cell(*args)


def run_experiment(config: ExperimentConfig, jobs: int = 1, strict: bool = True):
    """Run the full protocol; returns (curves, errors).

    With ``strict=True`` (the default) any dataset or cell failure raises
    immediately; with ``strict=False`` failures are collected as
    :class:`ErrorRecord` and the surviving combinations are returned.
    Results are deterministic for a given config, independent of ``jobs``.
    """
    errors: list[ErrorRecord] = []
    datasets: list[Dataset] = []
    for ds_spec in config.datasets:
        try:
            ds = ds_spec.load()
        except Exception as exc:
            if strict:
                raise
            errors.append(ErrorRecord(ds_spec.name, "*", -1, f"{type(exc).__name__}: {exc}"))
            continue
        n_pool = math.ceil(config.pool_fraction * ds.n_samples)
        if n_pool < config.m_range[1]:
            raise ValueError(
                f"dataset {ds.name!r} is too small for m_range {config.m_range}: "
                f"pool holds {n_pool} samples"
            )
        datasets.append(ds)
    for spec in config.selectors:  # surface explicit incompatibilities before any work
        compatible_models(spec, config.models)

    cells = [(ds, config, run) for ds in datasets for run in range(config.runs)]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_cell_worker, cells, chunksize=1))
    else:
        outputs = [_run_cell(*cell) for cell in cells]

    merged: dict[tuple[str, str, str], dict[int, list]] = {}
    failed: set[tuple[str, str]] = set()
    for (ds, _, run), (results, cell_errors) in zip(cells, outputs):
        errors.extend(cell_errors)
        for err in cell_errors:
            failed.add((err.dataset, err.selector))
        for key, rows in results.items():
            merged.setdefault(key, {})[run] = rows
    if errors and strict:
        first = errors[0]
        raise RuntimeError(
            f"benchmark cell failed (dataset={first.dataset!r}, selector={first.selector!r}, "
            f"run={first.run}): {first.message}"
        )

    m_values = config.m_values
    curves = []
    for ds in datasets:
        for spec in config.selectors:
            if (ds.name, spec.name) in failed:
                continue
            for model in compatible_models(spec, config.models):
                key = (ds.name, spec.name, model.name)
                per_run = merged.get(key)
                if per_run is None or len(per_run) != config.runs:
                    continue
                rmse = np.empty((config.runs, len(m_values)))
                cc = np.empty((config.runs, len(m_values)))
                for run in range(config.runs):
                    rows = per_run[run]
                    for col, (M, r, c) in enumerate(rows):
                        assert M == m_values[col]
                        rmse[run, col] = r
                        cc[run, col] = c
                curves.append(
                    EvaluationCurve(
                        dataset=ds.name,
                        selector=spec.name,
                        model=model.name,
                        m_values=m_values,
                        rmse_raw=rmse,
                        cc_raw=cc,
                    )
                )
    return tuple(curves), tuple(errors)


# ---------------------------------------------------------------------------
# analysis


def auc(m_values, values, auc_range: tuple[int, int]) -> float:
    """Trapezoidal area under a curve sampled on an integer grid."""
    lo, hi = auc_range
    if lo > hi:
        raise ValueError(f"bad auc range {auc_range}")
    table = {int(m): float(v) for m, v in zip(m_values, values)}
    missing = [m for m in range(lo, hi + 1) if m not in table or math.isnan(table[m])]
    if missing:
        raise ValueError(f"curve is missing values at M={missing} within {auc_range}")
    return sum((table[m] + table[m + 1]) / 2.0 for m in range(lo, hi))


def _curve_auc(curve: EvaluationCurve, metric: str, auc_range) -> float:
    values = curve.rmse_mean if metric == "rmse" else curve.cc_mean
    try:
        return auc(curve.m_values, values, auc_range)
    except ValueError:
        if metric == "cc":  # CC can be undefined at small M; flag rather than fail
            return math.nan
        raise


def improvement_pct(metric: str, normalized_auc: float) -> float:
    """Percentage improvement over the reference given a normalized AUC."""
    if metric == "rmse":
        return 100.0 * (1.0 - normalized_auc)
    return 100.0 * (normalized_auc - 1.0)


def analyze(
    curves,
    auc_range: tuple[int, int],
    reference: str = "rs",
    dunn_reference: str = "irdm",
    alpha: float = 0.05,
) -> BenchmarkReport:
    """AUCs, normalization against the reference selector, improvement
    summaries, and Dunn/FDR comparisons over per-dataset normalized AUCs."""
    curves = list(curves)
    selectors = sorted({c.selector for c in curves})
    datasets = sorted({c.dataset for c in curves})
    models = sorted({c.model for c in curves})
    if reference not in selectors:
        raise ValueError(f"reference selector {reference!r} missing from results")

    aucs = {}
    for c in curves:
        for metric in ("rmse", "cc"):
            aucs[(c.dataset, c.selector, c.model, metric)] = _curve_auc(c, metric, auc_range)

    normalized = {}
    for (ds, sel, model, metric), value in aucs.items():
        ref = aucs.get((ds, reference, model, metric), math.nan)
        if sel == reference:
            normalized[(ds, sel, model, metric)] = 1.0 if not math.isnan(ref) else math.nan
        elif math.isnan(value) or math.isnan(ref) or ref == 0:
            normalized[(ds, sel, model, metric)] = math.nan
        else:
            normalized[(ds, sel, model, metric)] = value / ref

    improvements = []
    for sel in selectors:
        for model in models:
            for metric in ("rmse", "cc"):
                per_ds = []
                for ds in datasets:
                    ratio = normalized.get((ds, sel, model, metric))
                    if ratio is not None and not math.isnan(ratio):
                        per_ds.append((ds, improvement_pct(metric, ratio)))
                if not per_ds:
                    continue
                vals = np.array([v for _, v in per_ds])
                improvements.append(
                    ImprovementRow(
                        selector=sel,
                        model=model,
                        metric=metric,
                        mean_pct=float(vals.mean()),
                        var_pct=float(vals.var()),
                        per_dataset=tuple(per_ds),
                    )
                )

    pvalues = {}
    if dunn_reference in selectors:
        for model in models:
            for metric in ("rmse", "cc"):
                groups = {}
                for sel in selectors:
                    vals = [normalized.get((ds, sel, model, metric), math.nan) for ds in datasets]
                    if all(v is not None and not math.isnan(v) for v in vals) and vals:
                        groups[sel] = vals
                if dunn_reference in groups and len(groups) >= 2:
                    pvalues[(model, metric)] = dunn_fdr(groups, dunn_reference, alpha)

    return BenchmarkReport(
        auc_range=tuple(auc_range),
        reference=reference,
        dunn_reference=dunn_reference,
        aucs=aucs,
        normalized=normalized,
        improvements=tuple(improvements),
        pvalues=pvalues,
    )


# ---------------------------------------------------------------------------
# benchmark modes


@dataclass(frozen=True)
class CmaxSweepResult:
    per_dataset: tuple[tuple[int, str, str, float], ...]  # (c, model, dataset, norm rmse auc)
    mean_by_c: tuple[tuple[int, str, float], ...]  # (c, model, mean ratio)


def cmax_sweep(config: ExperimentConfig, c_values, jobs: int = 1) -> CmaxSweepResult:
    """Rerun the iterative selector with each sweep cap and compare to random sampling."""
    c_values = [int(c) for c in c_values]
    if any(c < 0 for c in c_values):
        raise ValueError("c values must be >= 0")
    template = next((s for s in config.selectors if s.kind == "irdm"), SelectorSpec(kind="irdm"))
    rs_spec = next((s for s in config.selectors if s.kind == "rs"), SelectorSpec(kind="rs", seed=template.seed))
    variants = tuple(replace(template, c_max=c, name=f"irdm_c{c}") for c in c_values)
    sweep_config = replace(config, selectors=(rs_spec,) + variants)
    curves, _ = run_experiment(sweep_config, jobs=jobs)
    report = analyze(curves, sweep_config.auc_range, reference=rs_spec.name, dunn_reference=rs_spec.name)

    datasets = sorted({c.dataset for c in curves})
    models = sorted({c.model for c in curves})
    per_dataset = []
    mean_by_c = []
    for c in c_values:
        name = f"irdm_c{c}"
        for model in models:
            ratios = []
            for ds in datasets:
                ratio = report.normalized.get((ds, name, model, "rmse"), math.nan)
                per_dataset.append((c, model, ds, ratio))
                if not math.isnan(ratio):
                    ratios.append(ratio)
            if ratios:
                mean_by_c.append((c, model, float(np.mean(ratios))))
    return CmaxSweepResult(per_dataset=tuple(per_dataset), mean_by_c=tuple(mean_by_c))


@dataclass(frozen=True)
class InitStudyResult:
    per_dataset: tuple[tuple[str, str, str, float], ...]  # (init, model, dataset, ratio)
    mean_by_init: tuple[tuple[str, str, float], ...]  # (init, model, mean ratio)


def init_study(config: ExperimentConfig, init_kinds, jobs: int = 1) -> InitStudyResult:
    """Warm-start study: drive the cluster-guided supervised selector with
    different unsupervised initializations and compare normalized AUCs."""
    init_kinds = [k.lower().replace("-", "_") for k in init_kinds]
    template = next(
        (s for s in config.selectors if s.kind == "rd_emcm"), SelectorSpec(kind="rd_emcm")
    )
    rs_spec = next((s for s in config.selectors if s.kind == "rs"), SelectorSpec(kind="rs", seed=template.seed))
    ridge_models = tuple(m for m in config.models if m.kind == "ridge")
    if not ridge_models:
        raise ValueError("init study needs a ridge model in the config")
    variants = tuple(
        replace(template, init_kind=k, name=f"rd_emcm@{k}") for k in init_kinds
    )
    study_config = replace(config, selectors=(rs_spec,) + variants, models=ridge_models)
    curves, _ = run_experiment(study_config, jobs=jobs)
    report = analyze(curves, study_config.auc_range, reference=rs_spec.name, dunn_reference=rs_spec.name)

    datasets = sorted({c.dataset for c in curves})
    models = sorted({c.model for c in curves})
    per_dataset = []
    mean_by_init = []
    for k in init_kinds:
        name = f"rd_emcm@{k}"
        for model in models:
            ratios = []
            for ds in datasets:
                ratio = report.normalized.get((ds, name, model, "rmse"), math.nan)
                per_dataset.append((k, model, ds, ratio))
                if not math.isnan(ratio):
                    ratios.append(ratio)
            if ratios:
                mean_by_init.append((k, model, float(np.mean(ratios))))
    return InitStudyResult(per_dataset=tuple(per_dataset), mean_by_init=tuple(mean_by_init))


# ---------------------------------------------------------------------------
# report files


def _fmt(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_report(outdir, curves, report: BenchmarkReport, errors=()):
    """Write the stable CSV report set into ``outdir``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    curve_rows = []
    raw_rows = []
    for c in sorted(curves, key=lambda c: (c.dataset, c.selector, c.model)):
        stats = zip(c.m_values, c.rmse_mean, c.rmse_std, c.cc_mean, c.cc_std, c.cc_undefined)
        for M, rm, rs_, cm, cs_, cu in stats:
            curve_rows.append((c.dataset, c.selector, c.model, M, float(rm), float(rs_),
                               float(cm), float(cs_), int(cu), c.runs))
        for run in range(c.runs):
            for col, M in enumerate(c.m_values):
                raw_rows.append((c.dataset, c.selector, c.model, run, M,
                                 float(c.rmse_raw[run, col]), float(c.cc_raw[run, col])))
    _write_csv(outdir / CURVES_FILE,
               ["dataset", "selector", "model", "M", "rmse_mean", "rmse_std",
                "cc_mean", "cc_std", "cc_undefined", "runs"], curve_rows)
    _write_csv(outdir / RAW_FILE,
               ["dataset", "selector", "model", "run", "M", "rmse", "cc"], raw_rows)

    auc_rows = []
    for key in sorted(report.aucs):
        ds, sel, model, metric = key
        ratio = report.normalized[key]
        pct = improvement_pct(metric, ratio) if not math.isnan(ratio) else math.nan
        auc_rows.append((ds, sel, model, metric, report.aucs[key], ratio, pct))
    _write_csv(outdir / AUC_FILE,
               ["dataset", "selector", "model", "metric", "auc", "normalized_auc",
                "improvement_pct"], auc_rows)

    imp_rows = [
        (r.selector, r.model, r.metric, r.mean_pct, r.var_pct, len(r.per_dataset))
        for r in sorted(report.improvements, key=lambda r: (r.model, r.metric, r.selector))
    ]
    _write_csv(outdir / IMPROVEMENT_FILE,
               ["selector", "model", "metric", "mean_improvement_pct",
                "var_improvement_pct", "n_datasets"], imp_rows)

    p_rows = []
    for (model, metric) in sorted(report.pvalues):
        for cmp_ in report.pvalues[(model, metric)]:
            p_rows.append((model, metric, report.dunn_reference, cmp_.other, cmp_.z,
                           cmp_.p_raw, cmp_.p_adjusted, int(cmp_.significant),
                           int(cmp_.defined)))
    _write_csv(outdir / PVALUES_FILE,
               ["model", "metric", "reference", "other", "z", "p_raw", "p_adjusted",
                "significant", "defined"], p_rows)

    if errors:
        _write_csv(outdir / ERRORS_FILE, ["dataset", "selector", "run", "message"],
                   [(e.dataset, e.selector, e.run, e.message) for e in errors])


def read_curves(path) -> tuple[dict, ...]:
    """Read curves.csv rows back as dicts with typed values."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"expected curve file: {path}")
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                {
                    "dataset": rec["dataset"],
                    "selector": rec["selector"],
                    "model": rec["model"],
                    "M": int(rec["M"]),
                    "rmse_mean": float(rec["rmse_mean"]),
                    "rmse_std": float(rec["rmse_std"]),
                    "cc_mean": float(rec["cc_mean"]) if rec["cc_mean"] else math.nan,
                    "cc_std": float(rec["cc_std"]) if rec["cc_std"] else math.nan,
                    "cc_undefined": int(rec["cc_undefined"]),
                    "runs": int(rec["runs"]),
                }
            )
    return tuple(rows)
