"""Group-comparison protocol: one-way ANOVA per feature and per category,
Bonferroni-adjusted pairwise tests, and descriptive tables.

The category-level analysis reduces each participant to their mean score
across the category's features and runs the between-subjects one-way ANOVA
on those subject means, which is the standard reduction of the
between-groups main effect in a mixed (between x within) design and keeps
the reported degrees of freedom at (g - 1, N - g). Participants missing a
feature are excluded listwise from that cell and logged.

All accumulations use exact float summation (``math.fsum``), so reports are
bit-identical under any permutation of input rows.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from statistics import stdev
from typing import Iterable, Mapping, Sequence

from .features import CATEGORIES, FEATURE_NAMES, FeatureRow
from .special import f_sf, t_sf
from .trace import Group

logger = logging.getLogger(__name__)

GROUP_ORDER = tuple(g.value for g in Group)


class InsufficientDataError(ValueError):
    """Fewer than 2 groups, or a group with fewer than 2 members."""


@dataclass(frozen=True)
class GroupDescriptive:
    group: str
    n: int
    mean: float
    sd: float


@dataclass(frozen=True)
class PairwiseComparison:
    """One Bonferroni-adjusted pairwise contrast on the pooled error term."""

    pair: tuple[str, str]
    mean_diff: float
    t: float
    p_raw: float
    p_bonferroni: float


@dataclass(frozen=True)
class AnovaReport:
    """Omnibus F test plus descriptives and pairwise post hoc results."""

    effect: str
    f_stat: float
    df: tuple[int, int]
    p_value: float
    descriptives: tuple[GroupDescriptive, ...]
    pairwise: tuple[PairwiseComparison, ...]
    excluded: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "effect": self.effect,
            "F": self.f_stat,
            "df": list(self.df),
            "p": self.p_value,
            "descriptives": [
                {"group": d.group, "n": d.n, "mean": d.mean, "sd": d.sd}
                for d in self.descriptives
            ],
            "pairwise": [
                {
                    "pair": list(c.pair),
                    "mean_diff": c.mean_diff,
                    "t": c.t,
                    "p_raw": c.p_raw,
                    "p_bonferroni": c.p_bonferroni,
                }
                for c in self.pairwise
            ],
            "excluded": list(self.excluded),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AnovaReport":
        return cls(
            effect=d["effect"],
            f_stat=float(d["F"]),
            df=(int(d["df"][0]), int(d["df"][1])),
            p_value=float(d["p"]),
            descriptives=tuple(
                GroupDescriptive(g["group"], int(g["n"]), float(g["mean"]), float(g["sd"]))
                for g in d["descriptives"]
            ),
            pairwise=tuple(
                PairwiseComparison(
                    (c["pair"][0], c["pair"][1]),
                    float(c["mean_diff"]),
                    float(c["t"]),
                    float(c["p_raw"]),
                    float(c["p_bonferroni"]),
                )
                for c in d["pairwise"]
            ),
            excluded=tuple(d.get("excluded", ())),
        )


def _label(group) -> str:
    return group.value if isinstance(group, Group) else str(group)


def _group_order(labels: Iterable[str]) -> tuple[str, ...]:
    """Deterministic group ordering independent of row order."""
    present = set(labels)
    if present <= set(GROUP_ORDER):
        return tuple(g for g in GROUP_ORDER if g in present)
    return tuple(sorted(present))


def _collect(values: Sequence[float], groups: Sequence) -> dict[str, list[float]]:
    by_group: dict[str, list[float]] = {}
    for value, group in zip(values, groups, strict=True):
        by_group.setdefault(_label(group), []).append(float(value))
    return by_group


def _check_sizes(by_group: dict[str, list[float]]) -> None:
    if len(by_group) < 2:
        raise InsufficientDataError(
            f"need at least 2 groups, got {len(by_group)}"
        )
    for label, members in by_group.items():
        if len(members) < 2:
            raise InsufficientDataError(
                f"group {label!r} has {len(members)} member(s); need at least 2"
            )


def _pairwise(
    order: tuple[str, ...],
    by_group: dict[str, list[float]],
    means: dict[str, float],
    ms_within: float,
    df_error: int,
) -> tuple[PairwiseComparison, ...]:
    n_groups = len(order)
    n_comparisons = n_groups * (n_groups - 1) // 2
    comparisons = []
    for i in range(n_groups):
        for j in range(i + 1, n_groups):
            a, b = order[i], order[j]
            diff = means[a] - means[b]
            if ms_within > 0.0:
                se = math.sqrt(ms_within * (1.0 / len(by_group[a]) + 1.0 / len(by_group[b])))
                t = diff / se
                p_raw = 2.0 * t_sf(abs(t), df_error)
            elif diff == 0.0:
                t, p_raw = 0.0, 1.0
            else:
                t, p_raw = math.copysign(math.inf, diff), 0.0
            comparisons.append(
                PairwiseComparison(
                    pair=(a, b),
                    mean_diff=diff,
                    t=t,
                    p_raw=p_raw,
                    p_bonferroni=min(1.0, n_comparisons * p_raw),
                )
            )
    return tuple(comparisons)


def oneway_anova(
    values: Sequence[float],
    groups: Sequence,
    *,
    effect: str = "group",
) -> AnovaReport:
    """Unbalanced one-way ANOVA of ``values`` across ``groups``.

    F = (SSb/(g-1)) / (SSw/(N-g)) with the p-value from the F survival
    function. Degenerate cases: all group means equal gives F = 0, p = 1;
    zero within-group variance with distinct means gives F = +inf, p = 0.
    """
    by_group = _collect(values, groups)
    _check_sizes(by_group)
    order = _group_order(by_group)
    g = len(order)
    n_total = sum(len(by_group[label]) for label in order)
    means = {label: math.fsum(by_group[label]) / len(by_group[label]) for label in order}
    grand = math.fsum(v for label in order for v in by_group[label]) / n_total
    ss_between = math.fsum(
        len(by_group[label]) * (means[label] - grand) ** 2 for label in order
    )
    ss_within = math.fsum(
        (v - means[label]) ** 2 for label in order for v in by_group[label]
    )
    df_between = g - 1
    df_error = n_total - g
    if ss_between == 0.0:
        f_stat, p_value = 0.0, 1.0
    elif ss_within == 0.0:
        f_stat, p_value = math.inf, 0.0
    else:
        f_stat = (ss_between / df_between) / (ss_within / df_error)
        p_value = f_sf(f_stat, df_between, df_error)
    ms_within = ss_within / df_error
    descriptives = tuple(
        GroupDescriptive(
            group=label,
            n=len(by_group[label]),
            mean=means[label],
            sd=stdev(by_group[label]),
        )
        for label in order
    )
    return AnovaReport(
        effect=effect,
        f_stat=f_stat,
        df=(df_between, df_error),
        p_value=p_value,
        descriptives=descriptives,
        pairwise=_pairwise(order, by_group, means, ms_within, df_error),
    )


def bonferroni_pairwise(
    values: Sequence[float], groups: Sequence
) -> tuple[PairwiseComparison, ...]:
    """Pairwise contrasts on the pooled MSw with Bonferroni-adjusted p-values.

    For each pair, t = (mean_a - mean_b) / sqrt(MSw (1/n_a + 1/n_b)) on
    N - g degrees of freedom; the adjusted p multiplies the two-sided raw p
    by the number of comparisons, capped at 1.
    """
    return oneway_anova(values, groups).pairwise


def group_descriptives(
    values: Sequence[float], groups: Sequence
) -> tuple[GroupDescriptive, ...]:
    """Per-group mean and n-1 standard deviation; groups in canonical order.

    Empty groups cannot occur (a group exists only via its values); groups
    with a single member report sd = 0.
    """
    by_group = _collect(values, groups)
    out = []
    for label in _group_order(by_group):
        members = by_group[label]
        out.append(
            GroupDescriptive(
                group=label,
                n=len(members),
                mean=math.fsum(members) / len(members),
                sd=stdev(members) if len(members) > 1 else 0.0,
            )
        )
    return tuple(out)


@dataclass(frozen=True)
class CohortTable:
    """Feature rows keyed by (participant, task), one group per participant."""

    rows: tuple[FeatureRow, ...]

    def __post_init__(self):
        seen: dict[tuple[str, int], FeatureRow] = {}
        group_of: dict[str, Group] = {}
        for row in self.rows:
            key = (row.participant_id, row.task_id)
            if key in seen:
                raise ValueError(
                    f"duplicate row for participant {row.participant_id!r}, task {row.task_id}"
                )
            seen[key] = row
            prior = group_of.setdefault(row.participant_id, row.group)
            if prior is not row.group:
                raise ValueError(
                    f"participant {row.participant_id!r} appears in groups "
                    f"{prior.value} and {row.group.value}"
                )

    @classmethod
    def from_rows(cls, rows: Iterable[FeatureRow]) -> "CohortTable":
        return cls(tuple(rows))

    def tasks(self) -> tuple[int, ...]:
        return tuple(sorted({row.task_id for row in self.rows}))

    def rows_for_task(self, task_id: int) -> tuple[FeatureRow, ...]:
        return tuple(row for row in self.rows if row.task_id == task_id)


def _cell_values(
    cohort: CohortTable, task_id: int, name: str
) -> tuple[list[float], list[str], list[str]]:
    """Per-participant values for a feature or category cell.

    Category cells average the participant's features across the category
    (in the fixed feature order); participants missing any of the needed
    features are excluded and returned separately.
    """
    if name in CATEGORIES:
        feature_names = CATEGORIES[name]
    elif name in FEATURE_NAMES:
        feature_names = (name,)
    else:
        raise ValueError(f"unknown feature or category {name!r}")
    values: list[float] = []
    labels: list[str] = []
    excluded: list[str] = []
    for row in cohort.rows_for_task(task_id):
        feature_values = [row.features.get(n) for n in feature_names]
        if any(v is None for v in feature_values):
            excluded.append(row.participant_id)
            continue
        values.append(math.fsum(feature_values) / len(feature_values))
        labels.append(row.group.value)
    return values, labels, sorted(excluded)


def category_group_effect(
    cohort: CohortTable, task_id: int, category: str
) -> AnovaReport:
    """Between-groups effect on one feature category of one task.

    Each included participant contributes the mean of the category's
    features; participants with any undefined feature in the category are
    excluded listwise (and logged).
    """
    values, labels, excluded = _cell_values(cohort, task_id, category)
    if excluded:
        logger.warning(
            "task %d %s: excluded %d participant(s) with undefined features: %s",
            task_id,
            category,
            len(excluded),
            ", ".join(excluded),
        )
    report = oneway_anova(
        values, labels, effect=f"group effect on {category} (task {task_id})"
    )
    return replace(report, excluded=tuple(excluded))


def feature_group_effect(
    cohort: CohortTable, task_id: int, feature_name: str
) -> AnovaReport:
    """Between-groups effect on a single feature of one task."""
    values, labels, excluded = _cell_values(cohort, task_id, feature_name)
    if excluded:
        logger.warning(
            "task %d %s: excluded %d participant(s) with undefined values: %s",
            task_id,
            feature_name,
            len(excluded),
            ", ".join(excluded),
        )
    report = oneway_anova(
        values, labels, effect=f"group effect on {feature_name} (task {task_id})"
    )
    return replace(report, excluded=tuple(excluded))


def descriptives(
    cohort: CohortTable, task_id: int, name: str
) -> tuple[GroupDescriptive, ...]:
    """Per-group mean (SD) of a feature or category score on one task.

    Groups whose every member lacks the feature are omitted with a warning.
    """
    values, labels, _ = _cell_values(cohort, task_id, name)
    table = group_descriptives(values, labels)
    present = {row.group.value for row in cohort.rows_for_task(task_id)}
    for label in sorted(present - {d.group for d in table}):
        logger.warning("task %d %s: group %s omitted (no defined values)", task_id, name, label)
    return table


@dataclass(frozen=True)
class AnalysisCell:
    task: int
    scope: str  # "category" | "feature"
    name: str
    report: AnovaReport


@dataclass(frozen=True)
class AnalysisResult:
    """All per-task category and feature reports for one cohort."""

    alpha: float
    cells: tuple[AnalysisCell, ...]
    skipped: tuple[dict, ...] = ()

    def find(self, task: int, scope: str, name: str) -> AnovaReport | None:
        for cell in self.cells:
            if cell.task == task and cell.scope == scope and cell.name == name:
                return cell.report
        return None

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "reports": [
                {
                    "task": cell.task,
                    "scope": cell.scope,
                    "name": cell.name,
                    "significant": cell.report.p_value < self.alpha,
                    **cell.report.to_dict(),
                }
                for cell in self.cells
            ],
            "skipped": [dict(s) for s in self.skipped],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AnalysisResult":
        cells = tuple(
            AnalysisCell(
                task=int(r["task"]),
                scope=r["scope"],
                name=r["name"],
                report=AnovaReport.from_dict(r),
            )
            for r in d.get("reports", ())
        )
        return cls(
            alpha=float(d.get("alpha", 0.05)),
            cells=cells,
            skipped=tuple(d.get("skipped", ())),
        )


def analyze_cohort(cohort: CohortTable, alpha: float = 0.05) -> AnalysisResult:
    """Run the full protocol: every task x (5 categories + 17 features).

    Cells that cannot be tested (a group dropping below 2 members after
    exclusions) are skipped with a warning and listed in the result.
    """
    cells: list[AnalysisCell] = []
    skipped: list[dict] = []
    for task_id in cohort.tasks():
        for scope, names in (("category", tuple(CATEGORIES)), ("feature", FEATURE_NAMES)):
            for name in names:
                try:
                    if scope == "category":
                        report = category_group_effect(cohort, task_id, name)
                    else:
                        report = feature_group_effect(cohort, task_id, name)
                except InsufficientDataError as exc:
                    logger.warning("task %d %s skipped: %s", task_id, name, exc)
                    skipped.append(
                        {"task": task_id, "scope": scope, "name": name, "reason": str(exc)}
                    )
                    continue
                cells.append(AnalysisCell(task_id, scope, name, report))
    return AnalysisResult(alpha=alpha, cells=tuple(cells), skipped=tuple(skipped))
