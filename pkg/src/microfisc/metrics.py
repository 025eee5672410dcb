"""Weighted poverty, inequality and income-stabilization statistics.

Everything here is a pure function over numpy arrays of person-level
equivalized incomes and weights (hundredths of MKD for money, expansion
factors for weights).  Ordering conventions are fixed so repeated runs
aggregate identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .config import PolicyParameters
from .errors import InputError, NumericalError
from .money import Money
from .policy import IncomeDecomposition

DAYS_PER_YEAR = 365


def weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    """Lower weighted median: smallest value whose cumulative weight reaches
    half of the total."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.size == 0:
        raise InputError("empty input", module="metrics", op="weighted_median")
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    half = 0.5 * cum[-1]
    idx = int(np.searchsorted(cum, half, side="left"))
    return float(values[order][idx])


@dataclass(frozen=True)
class PovertyLine:
    kind: str  # relative_60_median | absolute_usd_ppp
    resolved_annual: float  # hundredths of MKD per equivalent adult, per year
    usd_per_day: float = 0.0


def absolute_line(usd_per_day: str | float, params: PolicyParameters) -> PovertyLine:
    """usd/day x 365 x PPP factor, resolved once from configuration."""
    usd = Fraction(str(usd_per_day))
    annual = usd * DAYS_PER_YEAR * params.ppp_mkd_per_usd * 100  # onto the hundredths grid
    return PovertyLine(kind="absolute_usd_ppp", resolved_annual=float(annual), usd_per_day=float(usd))


def relative_line(equiv_incomes: np.ndarray, weights: np.ndarray) -> PovertyLine:
    """60% of the weighted median equivalized income of this distribution."""
    med = weighted_median(equiv_incomes, weights)
    return PovertyLine(kind="relative_60_median", resolved_annual=0.6 * med)


def headcount(
    equiv_incomes: np.ndarray, weights: np.ndarray, line: PovertyLine
) -> tuple[float, float]:
    """(rate, weighted persons) strictly below the line."""
    equiv_incomes = np.asarray(equiv_incomes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    poor = float(weights[equiv_incomes < line.resolved_annual].sum())
    total = float(weights.sum())
    return poor / total, poor


def gini(incomes: np.ndarray, weights: np.ndarray) -> float:
    """Weighted Gini via the sorted cumulative (Lorenz) formula.

    Agrees with the O(n^2) pairwise mean-absolute-difference definition to
    float precision; fails on a zero-mean distribution.
    """
    incomes = np.asarray(incomes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if incomes.size == 0:
        raise InputError("empty input", module="metrics", op="gini")
    order = np.lexsort((weights, incomes))
    x = incomes[order]
    w = weights[order]
    wx = w * x
    total_income = wx.sum()
    total_weight = w.sum()
    if total_income <= 0:
        raise NumericalError("mean income must be > 0", module="metrics", op="gini")
    cdf = np.cumsum(wx) - 0.5 * wx
    return float(1.0 - 2.0 * (w * cdf).sum() / (total_income * total_weight))


def gini_pairwise(incomes: np.ndarray, weights: np.ndarray) -> float:
    """O(n^2) oracle: weighted mean absolute difference over twice the mean."""
    x = np.asarray(incomes, dtype=float)
    w = np.asarray(weights, dtype=float)
    total_weight = w.sum()
    mean = (w * x).sum() / total_weight
    diff = np.abs(x[:, None] - x[None, :])
    mad = (w[:, None] * w[None, :] * diff).sum() / (total_weight * total_weight)
    return float(mad / (2.0 * mean))


def assign_deciles(
    equiv_incomes: np.ndarray,
    person_weights: np.ndarray,
    household_ids: list[str] | np.ndarray,
) -> np.ndarray:
    """Decile index 0..9 per record, frozen on this (baseline) distribution.

    Records are whole households carrying their person weight; ties are
    broken by (income, household_id) so assignment is deterministic, and a
    household never straddles two deciles.
    """
    equiv_incomes = np.asarray(equiv_incomes, dtype=float)
    person_weights = np.asarray(person_weights, dtype=float)
    ids = np.asarray(household_ids)
    order = np.lexsort((ids, equiv_incomes))
    cum_before = np.concatenate(([0.0], np.cumsum(person_weights[order])))[:-1]
    total = person_weights.sum()
    dec_sorted = np.minimum((10.0 * cum_before / total).astype(int), 9)
    deciles = np.empty(len(ids), dtype=int)
    deciles[order] = dec_sorted
    return deciles


def nrr(pre: IncomeDecomposition, post: IncomeDecomposition) -> float | None:
    """Post-shock disposable income as a share of pre-shock disposable.

    None marks the undefined case (no pre-shock income); callers exclude it
    from aggregates.
    """
    if pre.disposable <= 0:
        return None
    return post.disposable / pre.disposable


def compensation_rate(
    pre: IncomeDecomposition,
    post_no_intervention: IncomeDecomposition,
    post_with_component: IncomeDecomposition,
) -> float | None:
    """Share of the disposable income lost to the shock that the component's
    net new benefits recover.  None when no income was lost."""
    lost = pre.disposable - post_no_intervention.disposable
    if lost <= 0:
        return None
    gained = (post_with_component.benefits - post_no_intervention.benefits) - (
        post_with_component.taxes_on_benefits - post_no_intervention.taxes_on_benefits
    )
    return gained / lost


@dataclass(frozen=True)
class MetricsReport:
    column: str
    group: str  # "all", "women", "youth_15_29"
    relative_rate: float
    relative_persons: float
    absolute_55_rate: float
    absolute_55_persons: float
    absolute_19_rate: float
    absolute_19_persons: float
    gini: float
    weighted_persons: float
    relative_line_annual: float

    def rows(self) -> dict[str, float]:
        return {
            "relative_poverty": self.relative_rate,
            "absolute_poverty_5_5": self.absolute_55_rate,
            "absolute_poverty_1_9": self.absolute_19_rate,
            "gini": self.gini,
        }


def compute_report(
    column: str,
    equiv_disposable: np.ndarray,
    person_weights: np.ndarray,
    line_55: PovertyLine,
    line_19: PovertyLine,
    group: str = "all",
    group_mask: np.ndarray | None = None,
    population_relative_line: PovertyLine | None = None,
) -> MetricsReport:
    """All Table-2 metrics for one scenario column.

    For population groups the relative line stays the population-wide one;
    headcounts and the Gini are recomputed over the group members.
    """
    if group_mask is not None:
        if not bool(group_mask.any()):
            raise InputError("empty group", module="metrics", op="group_metrics", record=group)
        if population_relative_line is None:
            raise InputError(
                "group metrics need the population-wide relative line",
                module="metrics", op="group_metrics", record=group,
            )
        rel_line = population_relative_line
        equiv = equiv_disposable[group_mask]
        weights = person_weights[group_mask]
    else:
        rel_line = relative_line(equiv_disposable, person_weights)
        equiv = equiv_disposable
        weights = person_weights

    rel_rate, rel_persons = headcount(equiv, weights, rel_line)
    r55, p55 = headcount(equiv, weights, line_55)
    r19, p19 = headcount(equiv, weights, line_19)
    return MetricsReport(
        column=column,
        group=group,
        relative_rate=rel_rate,
        relative_persons=rel_persons,
        absolute_55_rate=r55,
        absolute_55_persons=p55,
        absolute_19_rate=r19,
        absolute_19_persons=p19,
        gini=gini(equiv, weights),
        weighted_persons=float(weights.sum()),
        relative_line_annual=rel_line.resolved_annual,
    )


@dataclass(frozen=True)
class StabilizationRecord:
    """NRR and CR aggregates for one decile (or the whole population)."""

    label: str
    mean_disposable_pre: float  # equivalized, hundredths
    nrr_no_intervention: float
    nrr_total: float
    cr_components: dict[str, float] = field(default_factory=dict)

    @property
    def cr_total(self) -> float:
        return sum(self.cr_components.values())
