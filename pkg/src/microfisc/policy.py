"""Baseline tax-benefit rules: flat taxes, GMI top-up, family allowances.

All operations are pure functions of fixed-point monthly amounts.  Annual
figures are built as month-by-month sums so the disposable-income identity
holds exactly.  The automatic-stabilizer pass is simply a re-run of the same
means tests against post-shock incomes; no rule changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .config import PolicyParameters
from .money import Money, div_half_up, scale
from .population import Household, Individual, equivalence_scale_sum


@dataclass(frozen=True)
class IncomeDecomposition:
    """Annual household ledger; disposable = original + benefits - taxes."""

    original: Money
    benefits: Money
    taxes: Money
    disposable: Money
    taxes_on_benefits: Money = 0

    def __post_init__(self) -> None:
        assert self.disposable == self.original + self.benefits - self.taxes
        assert self.taxes_on_benefits <= self.taxes


@dataclass(frozen=True)
class BenefitAward:
    program: str  # gmi | child_allowance | education_allowance | one_off | retention_subsidy
    recipient: str  # household or person id
    amount: Money  # MKD/year
    scenario_tag: str = ""


def social_contributions(gross_wage: Money, params: PolicyParameters) -> Money:
    """Aggregate social contributions on a monthly gross wage."""
    return scale(gross_wage, params.ssc_rate)


def personal_income_tax(gross_wage: Money, params: PolicyParameters) -> Money:
    """Flat tax on the monthly wage net of contributions and allowance."""
    base = gross_wage - social_contributions(gross_wage, params) - params.personal_allowance
    if base <= 0:
        return 0
    return scale(base, params.pit_rate)


def monthly_tax(gross: Money, params: PolicyParameters) -> Money:
    """PIT plus contributions on one month of taxable labor income."""
    return social_contributions(gross, params) + personal_income_tax(gross, params)


def net_wage(gross: Money, params: PolicyParameters) -> Money:
    """Monthly take-home wage (used by the retention wage cap)."""
    return gross - monthly_tax(gross, params)


def gmi_scale_sum(household_ages: list[int], params: PolicyParameters) -> Fraction:
    """Per-member GMI threshold factors: first adult, other adults, children.

    Members under 18 count as children; if no member is 18+, the oldest
    carries the first-adult factor.
    """
    ordered = sorted(household_ages, reverse=True)
    total = params.gmi_first_adult
    for age in ordered[1:]:
        total += params.gmi_other_adult if age >= 18 else params.gmi_child
    return total


def gmi_monthly_threshold(household_ages: list[int], params: PolicyParameters) -> Money:
    return scale(params.gmi_base, gmi_scale_sum(household_ages, params))


def assess_gmi(
    household: Household,
    member_ages: list[int],
    monthly_assessable_income: Money,
    params: PolicyParameters,
    property_test: bool,
    scenario_tag: str = "",
) -> BenefitAward | None:
    """Top-up to the GMI threshold, or None.

    The assessable income is the household's average monthly income counted
    by the means test (labor income, other market income and pensions).
    With the property test on, any of the three ownership flags excludes the
    household outright.
    """
    if property_test and household.property_excluded:
        return None
    threshold = gmi_monthly_threshold(member_ages, params)
    topup = threshold - monthly_assessable_income
    if topup <= 0:
        return None
    return BenefitAward(
        program="gmi",
        recipient=household.household_id,
        amount=12 * topup,
        scenario_tag=scenario_tag,
    )


def assess_family_allowances(
    household: Household,
    members: list[Individual],
    equivalized_monthly_income: float,
    params: PolicyParameters,
    scenario_tag: str = "",
) -> list[BenefitAward]:
    """Child allowance per member under 18, education allowance per enrolled
    student under 18, when equivalized income is strictly below the ceiling."""
    if equivalized_monthly_income >= params.child_allowance_income_ceiling:
        return []
    awards: list[BenefitAward] = []
    for member in members:
        if member.age < 18 and params.child_allowance_amount > 0:
            awards.append(
                BenefitAward(
                    program="child_allowance",
                    recipient=member.person_id,
                    amount=12 * params.child_allowance_amount,
                    scenario_tag=scenario_tag,
                )
            )
        if member.age < 18 and member.labor_status == "student" and params.education_allowance_amount > 0:
            awards.append(
                BenefitAward(
                    program="education_allowance",
                    recipient=member.person_id,
                    amount=12 * params.education_allowance_amount,
                    scenario_tag=scenario_tag,
                )
            )
    return awards


def allocate_benefit_taxes(taxes: Money, taxable_original: Money, taxable_benefits: Money) -> Money:
    """Share of taxes attributable to benefits, proportional to the taxable
    benefit share of the tax base.  Zero whenever benefits are untaxed."""
    if taxable_benefits <= 0 or taxes <= 0:
        return 0
    return scale(taxes, Fraction(taxable_benefits, taxable_original + taxable_benefits))


def assemble_disposable(
    original: Money,
    benefits: Money,
    taxes: Money,
    taxable_benefits: Money = 0,
    taxable_original: Money | None = None,
) -> IncomeDecomposition:
    """Close the annual ledger for one household."""
    if taxable_original is None:
        taxable_original = original
    return IncomeDecomposition(
        original=original,
        benefits=benefits,
        taxes=taxes,
        disposable=original + benefits - taxes,
        taxes_on_benefits=allocate_benefit_taxes(taxes, taxable_original, taxable_benefits),
    )


def equivalized_monthly(annual_income: Money, member_ages: list[int]) -> float:
    """Average monthly income per equivalent adult, for means tests."""
    s = equivalence_scale_sum(member_ages)
    return div_half_up(annual_income, 12) * s.denominator / s.numerator
