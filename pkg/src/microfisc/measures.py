"""Government measures: wage-retention schedules, relaxed GMI, one-off cash.

The retention scheme replaces the no-intervention income path for covered
workers over a fixed subsidy window (3 months by default, independent of the
crisis length); it suppresses the job-loss draw for them.  One-off support
is a single payment per person, never counted by the GMI means test.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .config import MeasureConfig, PolicyParameters, ShockScenario
from .errors import InputError
from .money import Money, scale
from .policy import BenefitAward, net_wage
from .population import Individual
from .shock import SectorImpactTable, ShockedIncome, unchanged_path

SECTOR_GROUPS = ("Manufacturing", "Trade", "Transport", "Hotels", "Recreation", "Rest")

_HALF = Fraction(1, 2)
_F75 = Fraction(3, 4)
_F80 = Fraction(4, 5)
_F90 = Fraction(9, 10)

WORKER_STATUSES = ("formal_employee", "informal_employee", "self_employed")


def retention_schedule_employee(
    wage: Money,
    severity: int,
    config: MeasureConfig,
    params: PolicyParameters,
    scenario: ShockScenario | None = None,
    person_id: str = "",
) -> ShockedIncome:
    """Wage path for a covered formal employee under the retention scheme.

    Severity 4: half the minimum wage during the subsidy window, the minimum
    wage for the rest of the year.  Severity 3: a 25% cut floored at the
    minimum wage, then a 20% cut.  Severity 2: a 20% cut floored at the
    minimum wage, then the original wage.  Severity 1 untouched.  The window
    is the subsidy length, not the crisis length; with no crisis at all the
    path is the unchanged wage.
    """
    if scenario is not None and scenario.crisis_months == 0:
        return unchanged_path(person_id, wage, 0)
    m = config.subsidy_months
    if severity == 1:
        return unchanged_path(person_id, wage, m)
    if severity == 2:
        return ShockedIncome(person_id, m, max(scale(wage, _F80), params.minimum_wage), wage)
    if severity == 3:
        return ShockedIncome(
            person_id, m, max(scale(wage, _F75), params.minimum_wage), scale(wage, _F80)
        )
    if severity == 4:
        return ShockedIncome(
            person_id, m, scale(params.minimum_wage, _HALF), params.minimum_wage
        )
    raise InputError(
        f"unknown severity {severity}", module="measures_engine",
        op="retention_schedule_employee", record=person_id,
    )


def retention_schedule_self_employed(
    income: Money,
    severity: int,
    config: MeasureConfig,
    scenario: ShockScenario | None = None,
    person_id: str = "",
) -> ShockedIncome:
    """Self-employment income path with the measures in force."""
    if scenario is not None and scenario.crisis_months == 0:
        return unchanged_path(person_id, income, 0)
    m = config.subsidy_months
    if severity == 1:
        return unchanged_path(person_id, income, m)
    if severity == 2:
        return ShockedIncome(person_id, m, scale(income, _F90), income)
    if severity == 3:
        return ShockedIncome(person_id, m, scale(income, _F75), scale(income, _F90))
    if severity == 4:
        return ShockedIncome(person_id, m, scale(income, _HALF), scale(income, _F80))
    raise InputError(
        f"unknown severity {severity}", module="measures_engine",
        op="retention_schedule_self_employed", record=person_id,
    )


def retention_covers(
    ind: Individual,
    table: SectorImpactTable,
    config: MeasureConfig,
    params: PolicyParameters,
) -> bool:
    """Whether the retention subsidy reaches this worker.

    Formal employees in severity >= 2 sectors (the proxy for the >30%
    turnover-decline condition) are covered; when the wage cap is on,
    workers whose net wage exceeds the cap are excluded and follow the
    no-intervention path instead.
    """
    if not config.retention_enabled or ind.labor_status != "formal_employee":
        return False
    if table.severity(ind.sector_code) < 2:
        return False
    if config.wage_cap_enabled and net_wage(ind.gross_wage, params) > config.wage_cap:
        return False
    return True


def gmi_relaxed_assess(household, member_ages, monthly_assessable_income, params, scenario_tag=""):
    """GMI assessment with the property-ownership test switched off."""
    from .policy import assess_gmi

    return assess_gmi(
        household, member_ages, monthly_assessable_income, params,
        property_test=False, scenario_tag=scenario_tag,
    )


def one_off_award(
    ind: Individual,
    post_shock_monthly_income: Money,
    config: MeasureConfig,
    scenario_tag: str = "",
) -> BenefitAward | None:
    """Single payment by category, priority unemployed > student > low-pay.

    A low-pay worker is any employed person whose post-shock average monthly
    labor income sits strictly below the threshold.  The payment never
    enters the GMI means test.
    """
    if not config.one_off_enabled:
        return None
    category = None
    if ind.labor_status == "unemployed":
        category = "unemployed"
    elif ind.labor_status == "student":
        category = "student"
    elif ind.labor_status in WORKER_STATUSES and post_shock_monthly_income < config.low_pay_threshold:
        category = "low_pay_worker"
    if category is None:
        return None
    amount = config.one_off_amounts[category]
    if amount <= 0:
        return None
    return BenefitAward(
        program="one_off", recipient=ind.person_id, amount=amount, scenario_tag=scenario_tag
    )


def load_sector_groups(path: str | Path) -> dict[str, str]:
    """Read sector_groups.csv mapping sector_code -> budget group label."""
    header = ["sector_code", "group"]
    path = Path(path)
    groups: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        got = next(reader, None)
        if got != header:
            raise InputError(
                f"unexpected header {got!r}", module="measures_engine",
                op="load_sector_groups", record=f"{path.name}:1",
            )
        for lineno, row in enumerate(reader, start=2):
            where = f"{path.name}:{lineno}"
            if len(row) != 2:
                raise InputError(
                    f"expected 2 fields, got {len(row)}",
                    module="measures_engine", op="load_sector_groups", record=where,
                )
            code, group = row[0].strip(), row[1].strip()
            if group not in SECTOR_GROUPS:
                raise InputError(
                    f"unknown group {group!r}", module="measures_engine",
                    op="load_sector_groups", record=where,
                )
            if code in groups:
                raise InputError(
                    f"duplicate sector {code}", module="measures_engine",
                    op="load_sector_groups", record=where,
                )
            groups[code] = group
    return groups


@dataclass(frozen=True)
class BudgetLine:
    program: str
    group: str  # sector group for retention rows, empty otherwise
    amount: Money  # weighted MKD/year, hundredths


@dataclass(frozen=True)
class RetentionBudget:
    """Direct subsidy cost per sector group plus the income-rescue view.

    direct:   subsidy_per_worker x subsidy_months x weighted covered count,
              grouped by sector group (exact product, computed on the group's
              weighted head count).
    rescued_three_fifths: three fifths of the weighted income difference
              between the retention and no-intervention paths, the
              alternative aggregate used for validation against
              administrative spending.
    """

    direct: dict[str, float]
    rescued_three_fifths: dict[str, float]
    weighted_workers: dict[str, float]

    @property
    def direct_total(self) -> float:
        return sum(self.direct[g] for g in SECTOR_GROUPS)
