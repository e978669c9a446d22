"""scriptor: digitizer-pen recording analysis toolkit.

Parses fixed-rate pen sample streams, partitions them into in-air /
on-paper / idle traits, computes a 17-feature profile per recording, and
compares participant groups with one-way ANOVA plus Bonferroni post hoc
tests. A synthetic cohort generator with exact ground truth doubles as the
pipeline's verification oracle and demo data source.
"""

__version__ = "0.1.0"

from .features import (
    CATEGORIES,
    FEATURE_NAMES,
    FeatureRow,
    FeatureUndefinedError,
    FeatureVector,
    extract_all,
    emit_feature_table,
    inclination_feature,
    pressure_features,
    read_feature_table,
    space_features,
)
from .segmentation import (
    DegenerateRecordingError,
    Segmentation,
    Trait,
    TraitCounts,
    TraitKind,
    TraitTimes,
    segment,
    trait_counts,
    trait_times,
)
from .special import f_sf, regularized_incomplete_beta, t_sf
from .stats import (
    AnalysisResult,
    AnovaReport,
    CohortTable,
    GroupDescriptive,
    InsufficientDataError,
    PairwiseComparison,
    analyze_cohort,
    bonferroni_pairwise,
    category_group_effect,
    descriptives,
    feature_group_effect,
    oneway_anova,
)
from .synth import (
    CohortSpec,
    GroundTruth,
    StrokePlan,
    StrokeScript,
    default_cohort_spec,
    generate_cohort,
    generate_recording,
    idle,
    in_air,
    on_paper,
    write_cohort,
)
from .trace import (
    Group,
    ManifestEntry,
    PenSample,
    RecordingDomainError,
    RecordingParseError,
    TaskRecording,
    ValidationReport,
    emit_recording,
    parse_recording,
    read_manifest,
    validate_recording,
)

__all__ = [name for name in dir() if not name.startswith("_")]
