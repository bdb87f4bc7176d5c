import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from psidyn import (
    ArityError,
    ConfigError,
    DegenerateDataError,
    bh_fdr,
    build_stats_report,
    cohens_d,
    condition_summary,
    one_way_anova,
    reg_inc_beta,
    welch_t,
)
from psidyn.stats import f_sf, t_sf_two_sided


# ---------------------------------------------------------------------------
# regularised incomplete beta backend
# ---------------------------------------------------------------------------


def test_beta_boundaries():
    assert reg_inc_beta(0.0, 2.0, 3.0) == 0.0
    assert reg_inc_beta(1.0, 2.0, 3.0) == 1.0
    assert reg_inc_beta(0.5, 1.0, 1.0) == pytest.approx(0.5, abs=1e-15)


def test_beta_uniform_identity(rng):
    for x in rng.uniform(0, 1, 20):
        assert reg_inc_beta(float(x), 1.0, 1.0) == pytest.approx(x, abs=1e-12)


def test_beta_closed_form_point():
    # I_x(2,3) = 1 - (1-x)^3 (1+3x)
    assert reg_inc_beta(0.25, 2.0, 3.0) == pytest.approx(0.26171875, abs=1e-12)


def test_beta_against_scipy(rng):
    for _ in range(300):
        a = float(rng.uniform(0.2, 80.0))
        b = float(rng.uniform(0.2, 80.0))
        x = float(rng.uniform(0.0, 1.0))
        assert abs(reg_inc_beta(x, a, b) - scipy.special.betainc(a, b, x)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(
    k=st.integers(0, 4096),  # dyadic x so 1-x is exact and only the
    a=st.floats(0.1, 60.0),  # algorithm's two branches are compared
    b=st.floats(0.1, 60.0),
)
def test_beta_symmetry(k, a, b):
    x = k / 4096.0
    assert abs(reg_inc_beta(x, a, b) - (1.0 - reg_inc_beta(1.0 - x, b, a))) <= 1e-12


def test_beta_input_validation():
    with pytest.raises(ConfigError):
        reg_inc_beta(-0.1, 1.0, 1.0)
    with pytest.raises(ConfigError):
        reg_inc_beta(0.5, 0.0, 1.0)


def test_distribution_tails_match_scipy(rng):
    for _ in range(50):
        f = float(rng.uniform(0.01, 20.0))
        d1 = float(rng.integers(1, 30))
        d2 = float(rng.integers(2, 120))
        assert f_sf(f, d1, d2) == pytest.approx(scipy.stats.f.sf(f, d1, d2), abs=1e-12)
        t = float(rng.normal(scale=3.0))
        df = float(rng.uniform(1.5, 200.0))
        assert t_sf_two_sided(t, df) == pytest.approx(
            2.0 * scipy.stats.t.sf(abs(t), df), abs=1e-12
        )


# ---------------------------------------------------------------------------
# one-way ANOVA
# ---------------------------------------------------------------------------


def test_anova_hand_example():
    table = one_way_anova([[1, 2, 3], [2, 3, 4], [3, 4, 5]])
    # SSB = 6, SSW = 6, df = (2, 6)
    assert table.f == pytest.approx(3.0, abs=1e-12)
    assert (table.df_between, table.df_within) == (2, 6)
    assert table.eta_squared == pytest.approx(0.5, abs=1e-12)
    assert table.p == pytest.approx(scipy.stats.f.sf(3.0, 2, 6), abs=1e-12)


def test_anova_reference_tail():
    assert f_sf(3.75, 4, 70) == pytest.approx(0.008, abs=0.001)


def test_anova_zero_between_variance():
    table = one_way_anova([[1, 3], [2, 2]])
    assert table.f == 0.0
    assert table.p == 1.0
    assert table.eta_squared == 0.0


def test_anova_errors():
    with pytest.raises(ArityError):
        one_way_anova([[1, 2, 3]])
    with pytest.raises(ArityError):
        one_way_anova([[1, 2], [3]])
    with pytest.raises(DegenerateDataError):
        one_way_anova([[2, 2], [5, 5]])


def test_anova_shift_scale_invariance(rng):
    groups = [list(rng.normal(loc, 1.0, 12)) for loc in (0.0, 0.4, 1.1)]
    base = one_way_anova(groups)
    shifted = one_way_anova([[v + 17.3 for v in g] for g in groups])
    scaled = one_way_anova([[v * 4.2 for v in g] for g in groups])
    for other in (shifted, scaled):
        assert other.f == pytest.approx(base.f, abs=1e-9)
        assert other.p == pytest.approx(base.p, abs=1e-9)
        assert other.eta_squared == pytest.approx(base.eta_squared, abs=1e-9)


def test_anova_against_scipy(rng):
    groups = [list(rng.normal(loc, s, 15)) for loc, s in
              [(0.0, 1.0), (0.3, 2.0), (0.9, 0.5), (0.1, 1.5)]]
    ours = one_way_anova(groups)
    ref = scipy.stats.f_oneway(*groups)
    assert ours.f == pytest.approx(ref.statistic, rel=1e-12)
    assert ours.p == pytest.approx(ref.pvalue, abs=1e-12)


# ---------------------------------------------------------------------------
# Welch's t
# ---------------------------------------------------------------------------


def test_welch_identical_samples():
    res = welch_t([1, 2, 3], [1, 2, 3])
    assert res.t == 0.0
    assert res.p_raw == 1.0


def test_welch_both_constant():
    with pytest.raises(DegenerateDataError):
        welch_t([0, 0, 0, 0], [1, 1, 1, 1])


def test_welch_hand_example():
    res = welch_t([1, 2, 3, 4, 5], [3, 4, 5, 6, 7])
    assert res.t == pytest.approx(-2.0, abs=1e-12)
    assert res.df == pytest.approx(8.0, abs=1e-12)
    assert res.p_raw == pytest.approx(0.08051623795726257, abs=1e-12)


def test_welch_antisymmetry(rng):
    a = list(rng.normal(0, 1, 9))
    b = list(rng.normal(0.5, 2, 14))
    ab = welch_t(a, b)
    ba = welch_t(b, a)
    assert ab.t == -ba.t
    assert ab.p_raw == ba.p_raw
    assert ab.df == ba.df


def test_welch_against_scipy(rng):
    for _ in range(20):
        a = rng.normal(0, 1, int(rng.integers(3, 20)))
        b = rng.normal(0.3, 2, int(rng.integers(3, 20)))
        ours = welch_t(list(a), list(b))
        ref = scipy.stats.ttest_ind(a, b, equal_var=False)
        assert ours.t == pytest.approx(ref.statistic, rel=1e-10)
        assert ours.p_raw == pytest.approx(ref.pvalue, abs=1e-12)


# ---------------------------------------------------------------------------
# Benjamini-Hochberg
# ---------------------------------------------------------------------------


def test_bh_hand_example():
    adjusted, rejected = bh_fdr([0.002, 0.01, 0.03, 0.04], q=0.05)
    assert adjusted == [0.008, 0.02, 0.04, 0.04]
    assert rejected == [True, True, True, True]


def test_bh_single_value():
    for p, expect in [(0.01, True), (0.2, False)]:
        adjusted, rejected = bh_fdr([p], q=0.05)
        assert adjusted == [p]
        assert rejected == [expect]


def test_bh_all_ones():
    adjusted, rejected = bh_fdr([1.0, 1.0, 1.0], q=0.05)
    assert adjusted == [1.0, 1.0, 1.0]
    assert rejected == [False, False, False]


def test_bh_preserves_input_order():
    ps = [0.04, 0.002, 0.03, 0.01]
    adjusted, rejected = bh_fdr(ps, q=0.05)
    assert adjusted == [0.04, 0.008, 0.04, 0.02]
    assert all(rejected)


def test_bh_against_scipy(rng):
    ps = list(rng.uniform(0, 1, 25))
    adjusted, _ = bh_fdr(ps, q=0.05)
    ref = scipy.stats.false_discovery_control(ps, method="bh")
    assert np.allclose(adjusted, ref, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30))
def test_bh_monotone_in_sorted_order(ps):
    adjusted, _ = bh_fdr(sorted(ps), q=0.05)
    assert all(a <= b + 1e-15 for a, b in zip(adjusted, adjusted[1:]))
    assert all(0.0 <= a <= 1.0 for a in adjusted)
    assert all(a >= p for a, p in zip(adjusted, sorted(ps)))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=20),
       st.floats(0.01, 0.3), st.floats(0.3, 0.99))
def test_bh_rejection_monotone_in_q(ps, q_small, q_big):
    _, small = bh_fdr(ps, q=q_small)
    _, big = bh_fdr(ps, q=q_big)
    assert all(b or not s for s, b in zip(small, big))


# ---------------------------------------------------------------------------
# effect sizes and summaries
# ---------------------------------------------------------------------------


def test_cohens_d_hand_example():
    assert cohens_d([1, 2, 3], [3, 4, 5]) == pytest.approx(-2.0, abs=1e-12)


def test_cohens_d_identity_and_scale(rng):
    a = list(rng.normal(0, 1, 10))
    assert cohens_d(a, a) == 0.0
    b = list(rng.normal(1, 2, 12))
    d = cohens_d(a, b)
    assert cohens_d([3 * v for v in a], [3 * v for v in b]) == pytest.approx(
        d, abs=1e-12
    )
    with pytest.raises(DegenerateDataError):
        cohens_d([1, 1], [1, 1])


def test_summary_hand_example():
    s = condition_summary([1, 2, 3, 4], condition="c")
    assert s.mean == 2.5
    assert s.median == 2.5
    assert s.iqr == pytest.approx(1.5, abs=1e-12)  # q25=1.75, q75=3.25
    assert s.sem == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2, abs=1e-15)


def test_summary_constant():
    s = condition_summary([2, 2, 2])
    assert s.sem == 0.0
    assert s.iqr == 0.0


def test_summary_interpolation_oracle(rng):
    # independent oracle: sort + linear interpolation at (n-1)*p
    values = list(rng.normal(0, 3, 17))
    s = condition_summary(values)
    x = np.sort(values)

    def interp(p):
        pos = (len(x) - 1) * p
        lo = math.floor(pos)
        frac = pos - lo
        hi = min(lo + 1, len(x) - 1)
        return x[lo] * (1 - frac) + x[hi] * frac

    assert s.median == pytest.approx(interp(0.5), abs=1e-12)
    assert s.iqr == pytest.approx(interp(0.75) - interp(0.25), abs=1e-12)


def test_summary_arity():
    with pytest.raises(ArityError):
        condition_summary([1.0])


# ---------------------------------------------------------------------------
# combined report
# ---------------------------------------------------------------------------


def test_report_two_conditions_fdr_identity(rng):
    groups = {"a": list(rng.normal(0, 1, 8)), "b": list(rng.normal(1, 1, 8))}
    rep = build_stats_report(groups, q=0.05)
    assert len(rep.comparisons) == 1
    c = rep.comparisons[0]
    assert c.p_adjusted == c.p_raw
    assert c.significant == (c.p_raw <= 0.05)


def test_report_all_pairs_counted(rng):
    groups = {f"g{i}": list(rng.normal(i, 1, 6)) for i in range(5)}
    rep = build_stats_report(groups, q=0.05)
    assert len(rep.comparisons) == 10
    assert len(rep.summaries) == 5


def test_report_needs_two_conditions(rng):
    with pytest.raises(ArityError):
        build_stats_report({"only": [1.0, 2.0, 3.0]})
