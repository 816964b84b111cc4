"""Command line front end.

Subcommands
-----------
``select``      one-shot unsupervised selection on a CSV file
``benchmark``   full evaluation protocol from a config file, CSV reports out
``report``      summarize a benchmark output directory (Mean/Var layout)
``cmax-sweep``  iterative-selector sweep-cap sensitivity mode
``init-study``  warm-start study for the cluster-guided supervised selector

Exit codes: 0 success, 1 validation/usage error, 2 runtime or partial
failure.  Pool indices are printed 1-based; everything inside the library is
0-based.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from pathlib import Path

from alrpool import benchmark as bench
from alrpool.benchmark import (
    CONFIG_ECHO_FILE,
    CURVES_FILE,
    DatasetSpec,
    ExperimentConfig,
    auc,
    improvement_pct,
)
from alrpool.datasets import Dataset, load_csv, one_hot_encode, standardize_apply, standardize_fit
from alrpool.models import ModelConfig
from alrpool.selectors import UNSUPERVISED_KINDS, SelectorSpec, select

OUTPUT_DIR_ENV = "ALRPOOL_OUTPUT_DIR"


class UsageError(ValueError):
    """Validation problem: wrong flags, bad config, unsafe overwrite."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we reserve that
        raise UsageError(message)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


# ---------------------------------------------------------------------------
# config file handling


def _parse_pair(text: str, what: str) -> tuple[int, int]:
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise UsageError(f"{what} must be two integers, got {text!r}")
    return int(parts[0]), int(parts[1])


def _parse_list(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def load_config(path) -> tuple[ExperimentConfig, int | None]:
    """Parse an experiment config file; returns (config, jobs or None)."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from exc

    exp = parser["experiment"] if parser.has_section("experiment") else {}
    datasets = []
    selectors = []
    models = []
    for section in parser.sections():
        if section == "experiment":
            continue
        kind, _, name = section.partition(":")
        body = parser[section]
        try:
            if kind == "dataset":
                if "path" in body:
                    datasets.append(
                        DatasetSpec(
                            name=name,
                            path=body["path"],
                            label_column=body.get("label_column"),
                            categorical_columns=_parse_list(body.get("categorical_columns", "")),
                        )
                    )
                else:
                    datasets.append(
                        DatasetSpec(
                            name=name,
                            synth=body.get("synth"),
                            n=body.getint("n", 200),
                            d=body.getint("d", 5),
                            noise=body.getfloat("noise", 0.5),
                            synth_seed=body.getint("seed", 0),
                            centers=body.getint("centers", 3),
                        )
                    )
            elif kind == "selector":
                selectors.append(
                    SelectorSpec(
                        kind=body.get("kind", name),
                        name=name,
                        seed=body.getint("seed", 0),
                        c_max=body.getint("c_max", 5),
                        committee_size=body.getint("committee_size", 4),
                        n_init=body.getint("n_init") if "n_init" in body else None,
                        init_kind=body.get("init_kind") or None,
                        model_kind=body.get("model_kind", "ridge"),
                        model_names=_parse_list(body.get("models", "")),
                    )
                )
            elif kind == "model":
                models.append(
                    ModelConfig(
                        kind=body.get("kind", name),
                        name=name,
                        r=body.getfloat("r", 0.1),
                        C=body.getfloat("C", 50.0),
                        epsilon_factor=body.getfloat("epsilon_factor", 0.1),
                        gamma=body.getfloat("gamma", 0.01),
                    )
                )
            else:
                raise UsageError(f"unknown config section [{section}]")
        except (ValueError, KeyError) as exc:
            if isinstance(exc, UsageError):
                raise
            raise UsageError(f"config section [{section}]: {exc}") from exc

    try:
        config = ExperimentConfig(
            datasets=tuple(datasets),
            selectors=tuple(selectors),
            models=tuple(models),
            m_range=_parse_pair(exp.get("m_range", "5 50"), "m_range"),
            auc_range=_parse_pair(exp.get("auc_range", "5 20"), "auc_range"),
            runs=int(exp.get("runs", 100)),
            base_seed=int(exp.get("base_seed", 0)),
            pool_fraction=float(exp.get("pool_fraction", 0.5)),
        )
    except ValueError as exc:
        raise UsageError(f"invalid config: {exc}") from exc
    jobs = int(exp["jobs"]) if "jobs" in exp else None
    return config, jobs


def apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    """Flag values win over config-file values."""
    updates = {}
    if args.runs is not None:
        updates["runs"] = args.runs
    if args.base_seed is not None:
        updates["base_seed"] = args.base_seed
    if args.pool_fraction is not None:
        updates["pool_fraction"] = args.pool_fraction
    if args.m_range is not None:
        updates["m_range"] = tuple(args.m_range)
    if args.auc_range is not None:
        updates["auc_range"] = tuple(args.auc_range)
    if not updates:
        return config
    from dataclasses import replace

    try:
        return replace(config, **updates)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def config_to_ini(config: ExperimentConfig) -> str:
    """Serialize the effective experiment config; replaying it reproduces the run."""
    lines = ["[experiment]"]
    lines.append(f"runs = {config.runs}")
    lines.append(f"base_seed = {config.base_seed}")
    lines.append(f"pool_fraction = {_fmt(config.pool_fraction)}")
    lines.append(f"m_range = {config.m_range[0]} {config.m_range[1]}")
    lines.append(f"auc_range = {config.auc_range[0]} {config.auc_range[1]}")
    for d in config.datasets:
        lines.append("")
        lines.append(f"[dataset:{d.name}]")
        if d.path is not None:
            lines.append(f"path = {d.path}")
            lines.append(f"label_column = {d.label_column}")
            if d.categorical_columns:
                lines.append(f"categorical_columns = {','.join(d.categorical_columns)}")
        else:
            lines.append(f"synth = {d.synth}")
            lines.append(f"n = {d.n}")
            lines.append(f"d = {d.d}")
            lines.append(f"noise = {_fmt(d.noise)}")
            lines.append(f"seed = {d.synth_seed}")
            lines.append(f"centers = {d.centers}")
    for s in config.selectors:
        lines.append("")
        lines.append(f"[selector:{s.name}]")
        lines.append(f"kind = {s.kind}")
        lines.append(f"seed = {s.seed}")
        lines.append(f"c_max = {s.c_max}")
        lines.append(f"committee_size = {s.committee_size}")
        if s.n_init is not None:
            lines.append(f"n_init = {s.n_init}")
        if s.init_kind is not None:
            lines.append(f"init_kind = {s.init_kind}")
        lines.append(f"model_kind = {s.model_kind}")
        if s.model_names:
            lines.append(f"models = {','.join(s.model_names)}")
    for m in config.models:
        lines.append("")
        lines.append(f"[model:{m.name}]")
        lines.append(f"kind = {m.kind}")
        if m.kind == "ridge":
            lines.append(f"r = {_fmt(m.r)}")
        else:
            lines.append(f"C = {_fmt(m.C)}")
            lines.append(f"epsilon_factor = {_fmt(m.epsilon_factor)}")
            lines.append(f"gamma = {_fmt(m.gamma)}")
    return "\n".join(lines) + "\n"


def _resolve_outdir(args) -> Path:
    if args.output_dir:
        return Path(args.output_dir)
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return Path(env)
    raise UsageError(f"no output directory: pass --output-dir or set {OUTPUT_DIR_ENV}")


def _guard_overwrite(outdir: Path, filenames, force: bool):
    existing = [f for f in filenames if (outdir / f).exists()]
    if existing and not force:
        raise UsageError(
            f"output directory {outdir} already holds {existing}; rerun with --force to overwrite"
        )


# ---------------------------------------------------------------------------
# subcommands


def cmd_select(args) -> int:
    spec = SelectorSpec(kind=args.selector, seed=args.seed, c_max=args.c_max)
    if spec.kind not in UNSUPERVISED_KINDS:
        raise UsageError(
            f"selector {args.selector!r} is supervised; one-shot selection supports "
            f"{', '.join(UNSUPERVISED_KINDS)} (supervised strategies run inside 'benchmark')"
        )
    if args.m < 1:
        raise UsageError(f"--m must be >= 1, got {args.m}")
    ds = load_csv(args.data, args.label_column, _parse_list(args.categorical or ""))
    ds = one_hot_encode(ds)
    params = standardize_fit(ds.features)
    pool = Dataset(
        name=ds.name,
        features=standardize_apply(params, ds.features),
        labels=ds.labels,
        columns=ds.columns,
    )
    if args.m > pool.n_samples:
        raise UsageError(f"--m {args.m} exceeds the pool size {pool.n_samples}")
    cs = select(spec, pool, args.m)
    one_based = sorted(i + 1 for i in cs.indices)
    print("indices:", " ".join(str(i) for i in one_based))
    print(f"selector: {spec.kind}  M: {args.m}  seed: {spec.seed}  pool: {pool.n_samples}")
    if cs.history is not None:
        print(
            f"sweeps_run: {cs.history.sweeps_run}  "
            f"terminated_by_repeat: {str(cs.history.terminated_by_repeat).lower()}"
        )
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write("\n".join(str(i) for i in one_based) + "\n")
    return 0


def cmd_benchmark(args) -> int:
    config, cfg_jobs = load_config(args.config)
    config = apply_overrides(config, args)
    jobs = args.jobs if args.jobs is not None else (cfg_jobs or os.cpu_count() or 1)
    if jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {jobs}")
    if "rs" not in [s.kind for s in config.selectors]:
        raise UsageError("benchmark config must include a random-sampling selector (kind = rs)")
    outdir = _resolve_outdir(args)
    _guard_overwrite(outdir, bench.REPORT_FILES + (CONFIG_ECHO_FILE,), args.force)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / CONFIG_ECHO_FILE).write_text(config_to_ini(config), encoding="utf-8")

    curves, errors = bench.run_experiment(config, jobs=jobs, strict=False)
    rs_name = next(s.name for s in config.selectors if s.kind == "rs")
    dunn_ref = next((s.name for s in config.selectors if s.kind == "irdm"), rs_name)
    report = bench.analyze(curves, config.auc_range, reference=rs_name, dunn_reference=dunn_ref)
    bench.write_report(outdir, curves, report, errors)
    print(f"wrote {len(curves)} curves to {outdir}")
    if errors:
        print(f"{len(errors)} cell(s) failed; see {outdir / bench.ERRORS_FILE}", file=sys.stderr)
        return 2
    return 0


def _read_report_inputs(indir: Path):
    missing = [f for f in (CURVES_FILE, CONFIG_ECHO_FILE) if not (indir / f).is_file()]
    if missing:
        raise UsageError(f"benchmark outputs missing from {indir}: expected {missing}")
    rows = bench.read_curves(indir / CURVES_FILE)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read(indir / CONFIG_ECHO_FILE, encoding="utf-8")
    auc_range = _parse_pair(parser["experiment"].get("auc_range", "5 20"), "auc_range")
    return rows, auc_range


def cmd_report(args) -> int:
    indir = Path(args.input_dir)
    rows, auc_range = _read_report_inputs(indir)

    combos = {}
    for r in rows:
        combos.setdefault((r["dataset"], r["selector"], r["model"]), []).append(r)
    aucs = {}
    for (ds, sel, model), rs_ in combos.items():
        ms = [r["M"] for r in rs_]
        aucs[(ds, sel, model, "rmse")] = auc(ms, [r["rmse_mean"] for r in rs_], auc_range)
        try:
            aucs[(ds, sel, model, "cc")] = auc(ms, [r["cc_mean"] for r in rs_], auc_range)
        except ValueError:
            aucs[(ds, sel, model, "cc")] = math.nan

    datasets = sorted({k[0] for k in aucs})
    selectors = sorted({k[1] for k in aucs})
    models = sorted({k[2] for k in aucs})
    if "rs" not in selectors:
        raise UsageError("cannot normalize: selector 'rs' absent from the curve file")

    for model in models:
        for metric in ("rmse", "cc"):
            print(f"\n== model={model} metric={metric}: normalized AUC (reference rs) ==")
            print("{:<16}".format("dataset") + "".join(f"{s:>12}" for s in selectors))
            pcts = {s: [] for s in selectors}
            for ds in datasets:
                ref = aucs.get((ds, "rs", model, metric), math.nan)
                cells = []
                for s in selectors:
                    v = aucs.get((ds, s, model, metric), math.nan)
                    ratio = 1.0 if (s == "rs" and not math.isnan(v)) else (
                        v / ref if not (math.isnan(v) or math.isnan(ref) or ref == 0) else math.nan
                    )
                    if not math.isnan(ratio):
                        pcts[s].append(improvement_pct(metric, ratio))
                    cells.append("         ---" if math.isnan(ratio) else f"{ratio:12.4f}")
                print(f"{ds:<16}" + "".join(cells))
            print("-- improvement over rs (%) --")
            for row_name, fn in (("Mean", lambda v: float(sum(v) / len(v))),
                                 ("Var", lambda v: float(sum((x - sum(v) / len(v)) ** 2 for x in v) / len(v)))):
                cells = []
                for s in selectors:
                    vals = pcts[s]
                    cells.append("         ---" if not vals else f"{fn(vals):12.2f}")
                print(f"{row_name:<16}" + "".join(cells))
    return 0


def cmd_cmax_sweep(args) -> int:
    config, cfg_jobs = load_config(args.config)
    config = apply_overrides(config, args)
    jobs = args.jobs if args.jobs is not None else (cfg_jobs or os.cpu_count() or 1)
    outdir = _resolve_outdir(args)
    files = ("cmax_sweep.csv", "cmax_sweep_mean.csv")
    _guard_overwrite(outdir, files, args.force)
    outdir.mkdir(parents=True, exist_ok=True)
    result = bench.cmax_sweep(config, args.c_values, jobs=jobs)
    bench._write_csv(outdir / files[0], ["c_max", "model", "dataset", "normalized_rmse_auc"],
                     result.per_dataset)
    bench._write_csv(outdir / files[1], ["c_max", "model", "mean_normalized_rmse_auc"],
                     result.mean_by_c)
    for c, model, ratio in result.mean_by_c:
        print(f"c_max={c:<4d} model={model:<8s} mean normalized RMSE AUC = {ratio:.4f}")
    return 0


def cmd_init_study(args) -> int:
    config, cfg_jobs = load_config(args.config)
    config = apply_overrides(config, args)
    jobs = args.jobs if args.jobs is not None else (cfg_jobs or os.cpu_count() or 1)
    outdir = _resolve_outdir(args)
    files = ("init_study.csv", "init_study_mean.csv")
    _guard_overwrite(outdir, files, args.force)
    outdir.mkdir(parents=True, exist_ok=True)
    result = bench.init_study(config, args.inits, jobs=jobs)
    bench._write_csv(outdir / files[0], ["init_kind", "model", "dataset", "normalized_rmse_auc"],
                     result.per_dataset)
    bench._write_csv(outdir / files[1], ["init_kind", "model", "mean_normalized_rmse_auc"],
                     result.mean_by_init)
    for init, model, ratio in result.mean_by_init:
        print(f"init={init:<6s} model={model:<8s} mean normalized RMSE AUC = {ratio:.4f}")
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _add_override_flags(p):
    p.add_argument("--runs", type=int, default=None, help="override run count")
    p.add_argument("--base-seed", type=int, default=None, help="override base seed")
    p.add_argument("--pool-fraction", type=float, default=None, help="override pool fraction")
    p.add_argument("--m-range", type=int, nargs=2, default=None, metavar=("LO", "HI"))
    p.add_argument("--auc-range", type=int, nargs=2, default=None, metavar=("LO", "HI"))
    p.add_argument("--jobs", type=int, default=None, help="parallel (dataset, run) cells")
    p.add_argument("--output-dir", default=None, help=f"report directory (or ${OUTPUT_DIR_ENV})")
    p.add_argument("--force", action="store_true", help="overwrite existing report files")


def build_parser() -> _Parser:
    parser = _Parser(prog="alrpool", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="one-shot unsupervised selection from a CSV pool")
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--selector", required=True, help="rs | gsx | rd | irdm")
    p.add_argument("--m", type=int, required=True, help="number of samples to select")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c-max", type=int, default=5, help="sweep cap for irdm")
    p.add_argument("--label-column", default=None, help="column to exclude from the features")
    p.add_argument("--categorical", default=None, help="comma-separated categorical columns")
    p.add_argument("--output", default=None, help="also write the indices to this file")
    p.set_defaults(fn=cmd_select)

    p = sub.add_parser("benchmark", help="run the full evaluation protocol")
    p.add_argument("--config", required=True, help="experiment config file")
    _add_override_flags(p)
    p.set_defaults(fn=cmd_benchmark)

    p = sub.add_parser("report", help="summarize benchmark outputs")
    p.add_argument("--input-dir", required=True)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("cmax-sweep", help="sweep-cap sensitivity for the iterative selector")
    p.add_argument("--config", required=True)
    p.add_argument("--c-values", type=int, nargs="+", required=True)
    _add_override_flags(p)
    p.set_defaults(fn=cmd_cmax_sweep)

    p = sub.add_parser("init-study", help="warm-start study for the cluster-guided selector")
    p.add_argument("--config", required=True)
    p.add_argument("--inits", nargs="+", default=["rs", "gsx", "rd", "irdm"])
    _add_override_flags(p)
    p.set_defaults(fn=cmd_init_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
