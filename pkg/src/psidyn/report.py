"""Serialisation of results: CSV for figures, JSON and markdown tables.

Floats are written with ``repr`` (shortest round-trip form) so outputs
are byte-stable across runs and thread counts and nothing is lost when
a CSV is re-ingested by the stats command.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .composite import ComponentScores, PsiResult, pool_identity
from .core import condition_sort_key
from .errors import FormatError
from .pipeline import RunConfig
from .robustness import RobustnessReport, RobustnessRun
from .stats import StatsReport, condition_summary


def _f(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# results CSV (trial-level)
# ---------------------------------------------------------------------------

RESULTS_HEADER = "trial_id,condition,h_raw,h_eff,m,h_z,m_z,psi"


def results_csv(scores: Sequence[ComponentScores], psis: Sequence[PsiResult]) -> str:
    lines = [RESULTS_HEADER]
    for s, p in zip(scores, psis):
        lines.append(
            ",".join(
                [s.trial_id, s.condition, _f(s.h_raw), _f(s.h_eff), _f(s.m),
                 _f(p.h_z), _f(p.m_z), _f(p.psi)]
            )
        )
    return "\n".join(lines) + "\n"


def parse_results_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != RESULTS_HEADER:
        raise FormatError(
            f"results CSV must start with {RESULTS_HEADER!r}, "
            f"got {lines[0][:80]!r}" if lines else "empty results CSV"
        )
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != 8:
            raise FormatError(f"results row has {len(cells)} cells: {ln[:80]!r}")
        try:
            rows.append(
                {
                    "trial_id": cells[0],
                    "condition": cells[1],
                    "h_raw": float(cells[2]),
                    "h_eff": float(cells[3]),
                    "m": float(cells[4]),
                    "h_z": float(cells[5]),
                    "m_z": float(cells[6]),
                    "psi": float(cells[7]),
                }
            )
        except ValueError as exc:
            raise FormatError(f"unparseable results row {ln[:80]!r}") from exc
    return rows


def psi_by_condition(rows: Sequence[dict]) -> dict[str, list[float]]:
    groups: dict[str, list[float]] = {}
    for row in rows:
        groups.setdefault(row["condition"], []).append(row["psi"])
    return {c: groups[c] for c in sorted(groups, key=condition_sort_key)}


def sync_series_csv(r: np.ndarray) -> str:
    """Order-parameter series R(t) for one trial, inspection-ready."""
    lines = ["t,r"]
    lines += [f"{i},{_f(v)}" for i, v in enumerate(np.asarray(r))]
    return "\n".join(lines) + "\n"


def fluctuation_csv(window_sizes, table: np.ndarray) -> str:
    """Per-channel fluctuation function F(s), channels x scales."""
    lines = ["channel," + ",".join(f"s{int(s)}" for s in window_sizes)]
    for j, row in enumerate(np.asarray(table)):
        lines.append(f"{j}," + ",".join(_f(v) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# pool identity / provenance
# ---------------------------------------------------------------------------


def pool_record(scores: Sequence[ComponentScores], config: RunConfig) -> str:
    doc = {
        "pool_trial_ids": pool_identity(list(scores)),
        "config": config.to_dict(),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# condition summaries (means table, bar-plot and box-plot CSVs)
# ---------------------------------------------------------------------------


def _grouped(rows: Sequence[dict], key: str) -> dict[str, list[float]]:
    out: dict[str, list[float]] = {}
    for row in rows:
        out.setdefault(row["condition"], []).append(row[key])
    return {c: out[c] for c in sorted(out, key=condition_sort_key)}


def condition_table_markdown(rows: Sequence[dict]) -> str:
    """Per-condition component means with SEM on the composite."""
    lines = [
        "| condition | n | h_raw | h_eff | m | psi (mean +/- SEM) |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    psis = _grouped(rows, "psi")
    for cond, values in psis.items():
        sub = [r for r in rows if r["condition"] == cond]
        n = len(values)
        mean = sum(values) / n
        sem = (np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        lines.append(
            f"| {cond} | {n} "
            f"| {np.mean([r['h_raw'] for r in sub]):.3f} "
            f"| {np.mean([r['h_eff'] for r in sub]):.3f} "
            f"| {np.mean([r['m'] for r in sub]):.4f} "
            f"| {mean:.3f} +/- {sem:.3f} |"
        )
    return "\n".join(lines) + "\n"


def fig_condition_means_csv(rows: Sequence[dict]) -> str:
    """Mean composite with SEM per condition (bar-plot ready)."""
    lines = ["condition,n,mean_psi,sem_psi"]
    for cond, values in psi_by_condition(rows).items():
        s = condition_summary(values, cond)
        lines.append(f"{cond},{s.n},{_f(s.mean)},{_f(s.sem)}")
    return "\n".join(lines) + "\n"


def fig_distribution_csv(rows: Sequence[dict]) -> str:
    """Box-plot statistics per condition; whiskers at 1.5 IQR."""
    lines = ["condition,n,median,q25,q75,iqr,whisker_low,whisker_high"]
    for cond, values in psi_by_condition(rows).items():
        q25, q50, q75 = (float(v) for v in np.percentile(values, [25.0, 50.0, 75.0]))
        iqr = q75 - q25
        lines.append(
            ",".join(
                [cond, str(len(values)), _f(q50), _f(q25), _f(q75), _f(iqr),
                 _f(q25 - 1.5 * iqr), _f(q75 + 1.5 * iqr)]
            )
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# stats report
# ---------------------------------------------------------------------------


def stats_to_dict(report: StatsReport) -> dict:
    return {
        "anova": {
            "f": report.anova.f,
            "df_between": report.anova.df_between,
            "df_within": report.anova.df_within,
            "p": report.anova.p,
            "eta_squared": report.anova.eta_squared,
        },
        "comparisons": [
            {
                "condition_a": c.condition_a,
                "condition_b": c.condition_b,
                "t": c.t,
                "df": c.df,
                "p_raw": c.p_raw,
                "p_adjusted": c.p_adjusted,
                "cohens_d": c.cohens_d,
                "significant": c.significant,
            }
            for c in report.comparisons
        ],
        "summaries": [
            {
                "condition": s.condition,
                "n": s.n,
                "mean": s.mean,
                "sem": s.sem,
                "median": s.median,
                "iqr": s.iqr,
            }
            for s in report.summaries
        ],
        "q": report.q,
    }


def stats_json(report: StatsReport) -> str:
    return json.dumps(stats_to_dict(report), indent=2, sort_keys=True) + "\n"


def stats_markdown(report: StatsReport) -> str:
    a = report.anova
    lines = [
        "## Group comparison",
        "",
        f"One-way ANOVA: F({a.df_between},{a.df_within}) = {a.f:.3f}, "
        f"p = {a.p:.4g}, eta^2 = {a.eta_squared:.3f}",
        "",
        f"Pairwise Welch t-tests, BH-FDR corrected at q = {report.q}:",
        "",
        "| a | b | t | df | p_raw | p_adj | d | significant |",
        "| --- | --- | --- | --- | --- | --- | --- | --- |",
    ]
    for c in report.comparisons:
        lines.append(
            f"| {c.condition_a} | {c.condition_b} | {c.t:.3f} | {c.df:.1f} "
            f"| {c.p_raw:.4g} | {c.p_adjusted:.4g} | {c.cohens_d:.3f} "
            f"| {'yes' if c.significant else 'no'} |"
        )
    lines += [
        "",
        "| condition | n | mean | sem | median | iqr |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for s in report.summaries:
        lines.append(
            f"| {s.condition} | {s.n} | {s.mean:.3f} | {s.sem:.3f} "
            f"| {s.median:.3f} | {s.iqr:.3f} |"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# robustness report
# ---------------------------------------------------------------------------


def robustness_to_dict(report: RobustnessReport) -> dict:
    return {
        "mode": report.mode,
        "runs": [
            {
                "label": run.label,
                "mean_psi": run.mean_psi,
                "n_trials": run.n_trials,
            }
            for run in report.runs
        ],
        "cross_seed_std": report.cross_seed_std,
        "ordering_stable": report.ordering_stable,
        "low_n": report.low_n,
    }


def robustness_json(report: RobustnessReport) -> str:
    return json.dumps(robustness_to_dict(report), indent=2, sort_keys=True) + "\n"


def robustness_from_dict(doc: dict) -> RobustnessReport:
    try:
        runs = tuple(
            RobustnessRun(
                label=r["label"],
                mean_psi={k: float(v) for k, v in r["mean_psi"].items()},
                n_trials={k: int(v) for k, v in r["n_trials"].items()},
            )
            for r in doc["runs"]
        )
        return RobustnessReport(
            mode=doc["mode"],
            runs=runs,
            cross_seed_std=doc.get("cross_seed_std"),
            ordering_stable=doc.get("ordering_stable"),
            low_n=bool(doc.get("low_n", False)),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed robustness JSON ({exc})") from exc


def fig_robustness_csv(report: RobustnessReport) -> str:
    """Per-run condition means (one row per run x condition)."""
    lines = ["mode,run,condition,mean_psi,n_trials,cross_seed_std"]
    for run in report.runs:
        for cond, mean in run.mean_psi.items():
            spread = ""
            if report.cross_seed_std is not None:
                spread = _f(report.cross_seed_std[cond])
            lines.append(
                f"{report.mode},{run.label},{cond},{_f(mean)},"
                f"{run.n_trials[cond]},{spread}"
            )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# combined report document
# ---------------------------------------------------------------------------


def full_report_markdown(
    rows: Sequence[dict],
    stats: StatsReport | None,
    robustness: Sequence[RobustnessReport],
) -> str:
    parts = ["# Batch analysis report", "", "## Condition summary", ""]
    parts.append(condition_table_markdown(rows))
    if stats is not None:
        parts += ["", stats_markdown(stats)]
    if robustness:
        parts += ["", "## Robustness"]
        for rep in robustness:
            parts += [
                "",
                f"### mode: {rep.mode}",
                "",
                f"ordering_stable: {rep.ordering_stable}",
                "",
                "| run | " + " | ".join(rep.runs[0].mean_psi) + " |",
                "| --- |" + " --- |" * len(rep.runs[0].mean_psi),
            ]
            for run in rep.runs:
                cells = " | ".join(f"{v:.3f}" for v in run.mean_psi.values())
                parts.append(f"| {run.label} | {cells} |")
    else:
        parts += ["", "## Robustness", "", "(no robustness input supplied)"]
    return "\n".join(parts) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")
