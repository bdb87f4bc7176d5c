"""Dynamical-organisation metrics for multichannel activation time-series.

The pipeline scores each trial on two axes: hierarchical temporal
integration (detrended fluctuation analysis with a Gaussian tuning
curve) and metastability (temporal variability of Kuramoto phase
synchrony), then combines the pool-normalised components into a single
relative index. Synthetic generators with known ground truth, a group
statistics battery, and robustness reruns round out the toolkit.
"""

from .composite import (
    ComponentScores,
    PsiResult,
    PsiWeights,
    pool_identity,
    pool_zscore,
    psi_weights_override,
)
from .core import (
    CONDITIONS,
    ActivationTrial,
    PreprocessedTrial,
    TrialManifest,
    TrialRef,
    load_manifest,
    load_manifest_trials,
    load_trial,
    preprocess,
    restrict_channels,
    save_manifest,
    save_trial,
)
from .dfa import DfaConfig, DfaResult, dfa_channel, dfa_trial, gaussian_tuning
from .errors import (
    ArityError,
    ConfigError,
    CorruptionError,
    DataError,
    DegenerateDataError,
    FormatError,
    MetadataError,
    NumericError,
    PsidynError,
)
from .metastability import SyncSeries, kuramoto_r, metastability_trial
from .phase import (
    ALTERNATE_BANDS,
    BandpassSpec,
    IirCoefficients,
    analytic_phase,
    design_butterworth_bandpass,
    filtfilt,
)
from .pipeline import RunConfig, analyze_pool, analyze_trial, analyze_trials
from .robustness import (
    RobustnessReport,
    RobustnessRun,
    channel_subsample_run,
    layer_subset_report,
    layer_subset_run,
    multi_seed_run,
)
from .stats import (
    AnovaTable,
    ConditionSummary,
    PairwiseComparison,
    StatsReport,
    WelchResult,
    bh_fdr,
    build_stats_report,
    cohens_d,
    condition_summary,
    one_way_anova,
    reg_inc_beta,
    welch_t,
)
from .synth import (
    gen_battery,
    gen_condition_analogue,
    gen_fgn,
    gen_fgn_matrix,
    gen_kuramoto,
    gen_periodic,
    gen_random_walk,
    gen_white,
    near_critical_coupling,
)

__version__ = "0.1.0"
