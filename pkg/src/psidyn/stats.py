"""Group statistics: one-way ANOVA, Welch t-tests, BH-FDR, effect sizes.

The F and t tail probabilities both reduce to the regularised
incomplete beta function, evaluated here by the classic continued
fraction (modified Lentz iteration), so the battery has no runtime
dependency on an external stats library.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .core import condition_sort_key
from .errors import ArityError, ConfigError, DegenerateDataError, NumericError

_BETA_EPS = 1e-15
_BETA_FPMIN = 1e-300
_BETA_MAX_ITER = 500


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_FPMIN:
        d = _BETA_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise NumericError(
        f"incomplete beta continued fraction did not converge "
        f"(a={a}, b={b}, x={x})"
    )


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularised incomplete beta I_x(a, b)."""
    if not (0.0 <= x <= 1.0):
        raise ConfigError(f"x must be in [0, 1], got {x}")
    if a <= 0.0 or b <= 0.0:
        raise ConfigError(f"a and b must be positive, got a={a}, b={b}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # the continued fraction converges fast only on one side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(f: float, df1: float, df2: float) -> float:
    """Upper tail P(F > f) for the F distribution."""
    if f <= 0.0:
        return 1.0
    return reg_inc_beta(df2 / (df2 + df1 * f), df2 / 2.0, df1 / 2.0)


def t_sf_two_sided(t: float, df: float) -> float:
    """Two-sided tail probability for Student's t."""
    return reg_inc_beta(df / (df + t * t), df / 2.0, 0.5)


# ---------------------------------------------------------------------------
# tests and summaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnovaTable:
    f: float
    df_between: int
    df_within: int
    p: float
    eta_squared: float


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_raw: float


@dataclass(frozen=True)
class PairwiseComparison:
    condition_a: str
    condition_b: str
    t: float
    df: float
    p_raw: float
    p_adjusted: float
    cohens_d: float
    significant: bool


@dataclass(frozen=True)
class ConditionSummary:
    condition: str
    n: int
    mean: float
    sem: float
    median: float
    iqr: float


@dataclass(frozen=True)
class StatsReport:
    anova: AnovaTable
    comparisons: tuple[PairwiseComparison, ...]
    summaries: tuple[ConditionSummary, ...]
    q: float


def one_way_anova(groups: Sequence[Sequence[float]]) -> AnovaTable:
    """Fisher one-way ANOVA with eta squared."""
    if len(groups) < 2:
        raise ArityError(f"ANOVA needs >= 2 groups, got {len(groups)}")
    arrs = [np.asarray(g, dtype=np.float64) for g in groups]
    if any(a.size < 2 for a in arrs):
        raise ArityError("every group needs >= 2 values")
    grand = np.concatenate(arrs).mean()
    ssb = math.fsum(a.size * (a.mean() - grand) ** 2 for a in arrs)
    ssw = math.fsum(float(((a - a.mean()) ** 2).sum()) for a in arrs)
    df_b = len(arrs) - 1
    df_w = sum(a.size for a in arrs) - len(arrs)
    if ssw <= 0.0:
        raise DegenerateDataError("zero within-group variance")
    f = (ssb / df_b) / (ssw / df_w)
    return AnovaTable(
        f=f,
        df_between=df_b,
        df_within=df_w,
        p=f_sf(f, df_b, df_w),
        eta_squared=ssb / (ssb + ssw),
    )


def welch_t(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Welch's unequal-variance t-test, two-sided."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.size < 2 or y.size < 2:
        raise ArityError("each sample needs >= 2 values")
    vx = x.var(ddof=1) / x.size
    vy = y.var(ddof=1) / y.size
    if vx + vy <= 0.0:
        raise DegenerateDataError("both samples are constant")
    t = (x.mean() - y.mean()) / math.sqrt(vx + vy)
    df = (vx + vy) ** 2 / (vx**2 / (x.size - 1) + vy**2 / (y.size - 1))
    return WelchResult(t=float(t), df=float(df), p_raw=t_sf_two_sided(float(t), df))


def bh_fdr(p_values: Sequence[float], q: float) -> tuple[list[float], list[bool]]:
    """Benjamini-Hochberg step-up; outputs in the input order.

    Adjusted p-values are the running minimum of (m/rank) * p from the
    largest rank down, capped at 1.
    """
    p = np.asarray(p_values, dtype=np.float64)
    if p.size == 0:
        return [], []
    if np.any((p < 0.0) | (p > 1.0)):
        raise ConfigError("p-values must lie in [0, 1]")
    if not (0.0 < q < 1.0):
        raise ConfigError(f"q must be in (0, 1), got {q}")
    m = p.size
    order = np.argsort(p, kind="stable")
    ranked = p[order]
    scaled = ranked * m / np.arange(1, m + 1)
    adjusted_sorted = np.minimum.accumulate(scaled[::-1])[::-1]
    adjusted_sorted = np.minimum(adjusted_sorted, 1.0)
    # rounding of p*m/m can dip a hair below p; adjusted >= raw must hold
    adjusted_sorted = np.maximum(adjusted_sorted, ranked)
    passing = np.nonzero(ranked <= np.arange(1, m + 1) * q / m)[0]
    cutoff = passing[-1] + 1 if passing.size else 0
    adjusted = np.empty(m)
    rejected = np.zeros(m, dtype=bool)
    adjusted[order] = adjusted_sorted
    rejected[order[:cutoff]] = True
    return [float(v) for v in adjusted], [bool(v) for v in rejected]


def cohens_d(a: Sequence[float], b: Sequence[float]) -> float:
    """Mean difference over the pooled (n-1 weighted) standard deviation."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.size < 2 or y.size < 2:
        raise ArityError("each sample needs >= 2 values")
    pooled_var = (
        (x.size - 1) * x.var(ddof=1) + (y.size - 1) * y.var(ddof=1)
    ) / (x.size + y.size - 2)
    if pooled_var <= 0.0:
        raise DegenerateDataError("zero pooled variance")
    return float((x.mean() - y.mean()) / math.sqrt(pooled_var))


def condition_summary(values: Sequence[float], condition: str = "") -> ConditionSummary:
    """Mean/SEM plus interpolation-quantile median and IQR."""
    x = np.asarray(values, dtype=np.float64)
    if x.size < 2:
        raise ArityError("summary needs >= 2 values")
    q25, q50, q75 = np.percentile(x, [25.0, 50.0, 75.0])
    return ConditionSummary(
        condition=condition,
        n=int(x.size),
        mean=float(x.mean()),
        sem=float(x.std(ddof=1) / math.sqrt(x.size)),
        median=float(q50),
        iqr=float(q75 - q25),
    )


def build_stats_report(groups: dict[str, Sequence[float]], q: float = 0.05) -> StatsReport:
    """ANOVA plus every pairwise comparison, FDR-corrected together."""
    if not (0.0 < q < 1.0):
        raise ConfigError(f"q must be in (0, 1), got {q}")
    conditions = sorted(groups, key=condition_sort_key)
    if len(conditions) < 2:
        raise ArityError(f"stats need >= 2 conditions, got {len(conditions)}")
    anova = one_way_anova([groups[c] for c in conditions])
    pairs = list(combinations(conditions, 2))
    welches = [welch_t(groups[a], groups[b]) for a, b in pairs]
    adjusted, rejected = bh_fdr([w.p_raw for w in welches], q)
    comparisons = tuple(
        PairwiseComparison(
            condition_a=a,
            condition_b=b,
            t=w.t,
            df=w.df,
            p_raw=w.p_raw,
            p_adjusted=adj,
            cohens_d=cohens_d(groups[a], groups[b]),
            significant=rej,
        )
        for (a, b), w, adj, rej in zip(pairs, welches, adjusted, rejected)
    )
    summaries = tuple(
        condition_summary(groups[c], condition=c) for c in conditions
    )
    return StatsReport(anova=anova, comparisons=comparisons, summaries=summaries, q=q)
