"""Batch command-line front end.

Subcommands: analyze (one trial), batch (manifest -> composite CSV),
stats (results CSV -> ANOVA/pairwise report), robustness (layer /
subsample / seed reruns), synth (ground-truth generators), report
(figure-ready CSVs + markdown).

Exit codes: 0 success, 2 malformed file, 3 degenerate data, 64 usage.
Errors are emitted as one JSON object on stderr. All randomness flows
from explicit --seed flags; no command reads the clock or OS entropy.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import report as rpt
from .composite import PsiWeights
from .core import (
    ActivationTrial,
    load_manifest,
    load_manifest_trials,
    load_trial,
    save_manifest,
    save_trial,
    TrialManifest,
    TrialRef,
)
from .dfa import DfaConfig
from .errors import ConfigError, PsidynError
from .phase import BandpassSpec
from .pipeline import RunConfig, analyze_pool, analyze_trial
from .robustness import channel_subsample_run, layer_subset_report, multi_seed_run
from .stats import build_stats_report
from .synth import (
    gen_battery,
    gen_fgn_matrix,
    gen_kuramoto,
    gen_periodic,
    gen_random_walk,
    gen_white,
)

SYNTH_KINDS = ("fgn", "white", "random_walk", "periodic", "kuramoto", "battery")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems -> exit 64, JSON on stderr
        raise ConfigError(message)


def _analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--band-low", type=float, default=0.05,
                   help="bandpass low cut, cycles/token")
    p.add_argument("--band-high", type=float, default=0.15,
                   help="bandpass high cut, cycles/token")
    p.add_argument("--filter-order", type=int, default=3)
    p.add_argument("--dfa-scales", default="4,8,16,32",
                   help="comma-separated window sizes, tokens")
    p.add_argument("--h-opt", type=float, default=0.7)
    p.add_argument("--sigma-h", type=float, default=0.15)
    p.add_argument("--weights", default="0.5,0.5",
                   help="composite weights w_h,w_m (must sum to 1)")
    p.add_argument("--q", type=float, default=0.05, help="FDR target")
    p.add_argument("--threads", type=int, default=0, help="0 = auto")
    p.add_argument("--trim", type=int, nargs="?", const=16, default=0,
                   help="drop this many samples at each end of R(t) "
                        "(bare flag: 16)")


def _config_from(args) -> RunConfig:
    try:
        scales = tuple(int(s) for s in str(args.dfa_scales).split(","))
        w_h, w_m = (float(w) for w in str(args.weights).split(","))
    except ValueError as exc:
        raise ConfigError(f"bad flag value: {exc}") from exc
    return RunConfig(
        band=BandpassSpec(low_cut=args.band_low, high_cut=args.band_high,
                          order=args.filter_order),
        dfa=DfaConfig(window_sizes=scales, h_opt=args.h_opt, sigma_h=args.sigma_h),
        weights=PsiWeights(w_h=w_h, w_m=w_m),
        q=args.q,
        threads=args.threads,
        trim=args.trim,
    )


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_analyze(args) -> int:
    config = _config_from(args)
    trial = load_trial(args.trial)
    scores = analyze_trial(trial, config)
    if args.r_series or args.fluctuations:
        from .core import preprocess
        from .dfa import dfa_trial
        from .metastability import metastability_trial

        prepped = preprocess(trial)
        if args.r_series:
            sync = metastability_trial(prepped, config.band, trim=config.trim)
            rpt.write_text(args.r_series, rpt.sync_series_csv(sync.r))
        if args.fluctuations:
            res = dfa_trial(prepped, config.dfa)
            rpt.write_text(
                args.fluctuations,
                rpt.fluctuation_csv(config.dfa.window_sizes, res.fluctuation_table),
            )
    fields = [
        ("trial_id", scores.trial_id),
        ("condition", scores.condition),
        ("h_raw", scores.h_raw),
        ("h_eff", scores.h_eff),
        ("m", scores.m),
    ]
    if args.format == "json":
        print(json.dumps(dict(fields)))
    elif args.format == "csv":
        print(",".join(k for k, _ in fields))
        print(",".join(str(v) if isinstance(v, str) else repr(v) for _, v in fields))
    else:
        print("| metric | value |")
        print("| --- | --- |")
        for k, v in fields:
            print(f"| {k} | {v} |")
    return 0


def _cmd_batch(args) -> int:
    config = _config_from(args)
    manifest_path = Path(args.manifest)
    manifest = load_manifest(manifest_path)
    trials = load_manifest_trials(manifest, manifest_path.parent)
    scores, psis = analyze_pool(trials, config)
    out = _outdir(args)
    rpt.write_text(out / "results.csv", rpt.results_csv(scores, psis))
    rpt.write_text(out / "pool.json", rpt.pool_record(scores, config))
    rows = rpt.parse_results_csv(rpt.results_csv(scores, psis))
    rpt.write_text(out / "summary.md", rpt.condition_table_markdown(rows))
    print(f"analyzed {len(trials)} trials into {out}")
    return 0


def _cmd_stats(args) -> int:
    rows = rpt.parse_results_csv(Path(args.results).read_text(encoding="utf-8"))
    groups = rpt.psi_by_condition(rows)
    stats = build_stats_report(groups, q=args.q)
    out = _outdir(args)
    rpt.write_text(out / "stats.json", rpt.stats_json(stats))
    rpt.write_text(out / "stats.md", rpt.stats_markdown(stats))
    a = stats.anova
    print(f"F({a.df_between},{a.df_within}) = {a.f:.3f}, p = {a.p:.4g}")
    return 0


def _cmd_robustness(args) -> int:
    config = _config_from(args)
    manifest_path = Path(args.manifest)
    trials = load_manifest_trials(load_manifest(manifest_path), manifest_path.parent)
    if args.mode == "layers":
        reports = [layer_subset_report(trials, config)]
    elif args.mode == "subsample":
        seeds = [args.seed + i for i in range(args.n_seeds)]
        reports = [
            channel_subsample_run(trials, fraction, seeds, config)
            for fraction in (0.25, 0.5)
        ]
    else:  # seeds
        reports = [multi_seed_run(trials, config, fraction=args.fraction,
                                  n_seeds=args.n_seeds, base_seed=args.seed)]
    out = _outdir(args)
    docs = []
    for i, rep in enumerate(reports):
        doc = rpt.robustness_to_dict(rep)
        doc["config"] = config.to_dict()
        docs.append(doc)
        suffix = rep.mode if len(reports) == 1 else f"{rep.mode}_{i}"
        rpt.write_text(out / f"fig_robustness_{suffix}.csv", rpt.fig_robustness_csv(rep))
    payload = docs[0] if len(docs) == 1 else {"reports": docs}
    rpt.write_text(out / "robustness.json",
                   json.dumps(payload, indent=2, sort_keys=True) + "\n")
    stable = all(r.ordering_stable for r in reports)
    print(f"mode={args.mode} runs={sum(len(r.runs) for r in reports)} "
          f"ordering_stable={stable}")
    return 0


def _synth_matrix(args, rng_seed: int) -> np.ndarray:
    if args.kind == "fgn":
        if not (0.0 < args.hurst < 1.0):
            raise ConfigError(f"--hurst must be in (0, 1), got {args.hurst}")
        return gen_fgn_matrix(args.hurst, args.t, args.c, rng_seed)
    if args.kind == "white":
        return gen_white(args.t, args.c, rng_seed)
    if args.kind == "random_walk":
        return gen_random_walk(args.t, args.c, rng_seed)
    if args.kind == "periodic":
        return gen_periodic(args.period, args.t, args.c, rng_seed)
    if args.kind == "kuramoto":
        _, signals = gen_kuramoto(args.c, args.coupling, args.freq_spread,
                                  args.t, rng_seed)
        return signals
    raise ConfigError(f"unknown kind {args.kind!r}")


def _cmd_synth(args) -> int:
    out = _outdir(args)
    refs = []
    if args.kind == "battery":
        trials = gen_battery(args.trials, t=args.t, c=args.c, seed=args.seed)
        for trial in trials:
            name = f"{trial.trial_id}.psia"
            save_trial(trial, out / name)
            refs.append(TrialRef(path=name, condition=trial.condition))
        notes = f"synthetic battery, seed={args.seed}"
    else:
        for k in range(args.trials):
            data = _synth_matrix(args, rng_seed=np.random.default_rng(
                [args.seed, SYNTH_KINDS.index(args.kind), k]))
            trial = ActivationTrial(
                trial_id=f"{args.kind}-{k:03d}",
                condition=args.kind,
                data=data,
                block_ids=(),
                channel_indices=tuple(range(args.c)),
                seed=args.seed,
            )
            name = f"{trial.trial_id}.psia"
            save_trial(trial, out / name)
            refs.append(TrialRef(path=name, condition=args.kind))
        notes = f"synthetic {args.kind}, seed={args.seed}"
    manifest = TrialManifest(trials=tuple(refs), channel_seed=args.seed, notes=notes)
    save_manifest(manifest, out / "manifest.json")
    print(f"wrote {len(refs)} trials + manifest to {out}")
    return 0


def _cmd_report(args) -> int:
    rows = rpt.parse_results_csv(Path(args.results).read_text(encoding="utf-8"))
    out = _outdir(args)
    stats = None
    if args.stats:
        doc = json.loads(Path(args.stats).read_text(encoding="utf-8"))
        groups = rpt.psi_by_condition(rows)
        stats = build_stats_report(groups, q=float(doc.get("q", 0.05)))
    robustness = []
    if args.robustness:
        doc = json.loads(Path(args.robustness).read_text(encoding="utf-8"))
        docs = doc["reports"] if "reports" in doc else [doc]
        robustness = [rpt.robustness_from_dict(d) for d in docs]
    rpt.write_text(out / "fig1_condition_means.csv", rpt.fig_condition_means_csv(rows))
    rpt.write_text(out / "fig2_distributions.csv", rpt.fig_distribution_csv(rows))
    for i, rep in enumerate(robustness):
        suffix = rep.mode if len(robustness) == 1 else f"{rep.mode}_{i}"
        rpt.write_text(out / f"fig3_{suffix}.csv", rpt.fig_robustness_csv(rep))
    rpt.write_text(out / "report.md",
                   rpt.full_report_markdown(rows, stats, robustness))
    print(f"report written to {out}")
    return 0


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="psidyn",
                     description="dynamical-organisation metrics over "
                                 "multichannel activation recordings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[], help="score one trial file")
    p.add_argument("trial")
    p.add_argument("--format", choices=("json", "csv", "md"), default="json")
    p.add_argument("--r-series", metavar="CSV",
                   help="also write the order-parameter series R(t)")
    p.add_argument("--fluctuations", metavar="CSV",
                   help="also write the per-channel fluctuation table F(s)")
    _analysis_flags(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("batch", help="run the full pipeline over a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    _analysis_flags(p)
    p.set_defaults(func=_cmd_batch)

    p = sub.add_parser("stats", help="group statistics over a results CSV")
    p.add_argument("results")
    p.add_argument("--out", required=True)
    p.add_argument("--q", type=float, default=0.05)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("robustness", help="layer/subsample/seed reruns")
    p.add_argument("manifest")
    p.add_argument("--mode", choices=("layers", "subsample", "seeds"),
                   required=True)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--n-seeds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _analysis_flags(p)
    p.set_defaults(func=_cmd_robustness)

    p = sub.add_parser("synth", help="generate ground-truth trial files")
    p.add_argument("--kind", choices=SYNTH_KINDS, required=True)
    p.add_argument("--trials", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t", type=int, default=256)
    p.add_argument("--c", type=int, default=128)
    p.add_argument("--hurst", type=float, default=0.7)
    p.add_argument("--period", type=int, default=8)
    p.add_argument("--coupling", type=float, default=0.27)
    p.add_argument("--freq-spread", type=float, default=0.15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("report", help="figure-ready CSVs + markdown")
    p.add_argument("--results", required=True)
    p.add_argument("--stats")
    p.add_argument("--robustness")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except PsidynError as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(
            json.dumps({"error": "OSError", "message": str(exc)}) + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
