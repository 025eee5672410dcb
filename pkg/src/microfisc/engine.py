"""Vectorized evaluation of one scenario column over the whole population.

The Frame is a column-oriented numpy view of a Population, built once and
shared read-only by every column.  All money arrays are int64 hundredths and
every scale operation uses the same half-up rule as the scalar functions in
policy/shock/measures, so both paths produce identical ledgers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .config import MeasureConfig, PolicyParameters, ShockScenario
from .errors import NumericalError
from .money import Money
from .population import LABOR_STATUSES, Population
from .shock import SectorImpactTable

STATUS_CODE = {status: i for i, status in enumerate(LABOR_STATUSES)}
_FORMAL = STATUS_CODE["formal_employee"]
_INFORMAL = STATUS_CODE["informal_employee"]
_SELF = STATUS_CODE["self_employed"]
_UNEMPLOYED = STATUS_CODE["unemployed"]
_STUDENT = STATUS_CODE["student"]


def vscale(arr: np.ndarray, frac: Fraction) -> np.ndarray:
    """Elementwise amount * frac with half-up rounding (non-negative input)."""
    n, d = frac.numerator, frac.denominator
    return (2 * arr * n + d) // (2 * d)


def vdiv12(arr: np.ndarray) -> np.ndarray:
    return (2 * arr + 12) // 24


@dataclass
class Frame:
    """Array view of a Population, person and household records sorted by id."""

    person_ids: list[str]
    hh_ids: list[str]
    hh_idx: np.ndarray  # person -> household row
    age: np.ndarray
    female: np.ndarray
    status: np.ndarray
    severity: np.ndarray  # 0 where no sector code
    wage: np.ndarray  # monthly hundredths
    selfemp: np.ndarray
    pension: np.ndarray
    other: np.ndarray
    weight: np.ndarray  # household expansion factor
    size: np.ndarray
    property_excluded: np.ndarray
    oecd_tenths: np.ndarray  # modified-OECD scale sum x 10
    n_under18: np.ndarray
    n_student_u18: np.ndarray
    n_adult18: np.ndarray

    @property
    def n_persons(self) -> int:
        return len(self.person_ids)

    @property
    def n_households(self) -> int:
        return len(self.hh_ids)

    def person_weight(self) -> np.ndarray:
        return self.weight[self.hh_idx]

    def hh_sum(self, person_values: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n_households, dtype=np.int64)
        np.add.at(out, self.hh_idx, person_values)
        return out


def build_frame(pop: Population, table: SectorImpactTable) -> Frame:
    table.covers(pop)
    hh_pos = {h.household_id: i for i, h in enumerate(pop.households)}
    n_p, n_h = len(pop.individuals), len(pop.households)

    hh_idx = np.empty(n_p, dtype=np.int64)
    age = np.empty(n_p, dtype=np.int64)
    female = np.zeros(n_p, dtype=bool)
    status = np.empty(n_p, dtype=np.int64)
    severity = np.zeros(n_p, dtype=np.int64)
    wage = np.empty(n_p, dtype=np.int64)
    selfemp = np.empty(n_p, dtype=np.int64)
    pension = np.empty(n_p, dtype=np.int64)
    other = np.empty(n_p, dtype=np.int64)

    for i, ind in enumerate(pop.individuals):
        hh_idx[i] = hh_pos[ind.household_id]
        age[i] = ind.age
        female[i] = ind.gender == "female"
        status[i] = STATUS_CODE[ind.labor_status]
        if ind.sector_code:
            severity[i] = table.severity(ind.sector_code)
        wage[i] = ind.gross_wage
        selfemp[i] = ind.self_employment_income
        pension[i] = ind.pension_income
        other[i] = ind.other_income

    weight = np.array([h.weight for h in pop.households], dtype=float)
    property_excluded = np.array([h.property_excluded for h in pop.households], dtype=bool)

    size = np.zeros(n_h, dtype=np.int64)
    np.add.at(size, hh_idx, 1)
    n_14plus = np.zeros(n_h, dtype=np.int64)
    np.add.at(n_14plus, hh_idx, (age >= 14).astype(np.int64))
    n_under18 = np.zeros(n_h, dtype=np.int64)
    np.add.at(n_under18, hh_idx, (age < 18).astype(np.int64))
    n_student_u18 = np.zeros(n_h, dtype=np.int64)
    np.add.at(n_student_u18, hh_idx, ((age < 18) & (status == _STUDENT)).astype(np.int64))
    n_adult18 = size - n_under18

    # first member 1.0, other 14+ 0.5, under-14 0.3 (x10); when nobody is 14+
    # the oldest member carries the first factor.
    has_14plus = n_14plus >= 1
    oecd_tenths = np.where(
        has_14plus,
        10 + 5 * (n_14plus - 1) + 3 * (size - n_14plus),
        10 + 3 * (size - 1),
    )

    return Frame(
        person_ids=[i.person_id for i in pop.individuals],
        hh_ids=[h.household_id for h in pop.households],
        hh_idx=hh_idx,
        age=age,
        female=female,
        status=status,
        severity=severity,
        wage=wage,
        selfemp=selfemp,
        pension=pension,
        other=other,
        weight=weight,
        size=size,
        property_excluded=property_excluded,
        oecd_tenths=oecd_tenths,
        n_under18=n_under18,
        n_student_u18=n_student_u18,
        n_adult18=n_adult18,
    )


@dataclass(frozen=True)
class ColumnSpec:
    label: str
    shock_on: bool
    stabilizers_on: bool
    measures: frozenset[str]


COLUMNS: tuple[ColumnSpec, ...] = (
    ColumnSpec("pre", False, False, frozenset()),
    ColumnSpec("shock_raw", True, False, frozenset()),
    ColumnSpec("shock_stab", True, True, frozenset()),
    ColumnSpec("stab_retention", True, True, frozenset({"retention"})),
    ColumnSpec("stab_gmi_relax", True, True, frozenset({"gmi_relax"})),
    ColumnSpec("stab_one_off", True, True, frozenset({"one_off"})),
    ColumnSpec("total", True, True, frozenset({"retention", "gmi_relax", "one_off"})),
)
COLUMN_LABELS = tuple(c.label for c in COLUMNS)


@dataclass
class ColumnData:
    """All per-person and per-household outcomes of one column."""

    spec: ColumnSpec
    months: np.ndarray  # crisis-window length per person
    taxable_crisis: np.ndarray  # monthly, per person
    taxable_after: np.ndarray
    taxable_annual: np.ndarray
    informal_annual: np.ndarray
    labor_annual: np.ndarray  # taxable + informal, per person
    tax_annual: np.ndarray  # per person
    retention_covered: np.ndarray  # bool per person (formal employees)
    one_off_person: np.ndarray  # annual amount per person
    # household ledgers
    original: np.ndarray
    pensions: np.ndarray
    gmi: np.ndarray
    child_allowance: np.ndarray
    education_allowance: np.ndarray
    one_off: np.ndarray
    benefits: np.ndarray
    taxes: np.ndarray
    disposable: np.ndarray
    equiv_disposable: np.ndarray  # float, per household


def _monthly_tax_vec(gross: np.ndarray, params: PolicyParameters) -> np.ndarray:
    ssc = vscale(gross, params.ssc_rate)
    base = gross - ssc - params.personal_allowance
    np.maximum(base, 0, out=base)
    return ssc + vscale(base, params.pit_rate)


def _gmi_threshold_monthly(frame: Frame, params: PolicyParameters) -> np.ndarray:
    """Per-household GMI threshold on the hundredths grid (exact fractions)."""
    f1, fa, fc = params.gmi_first_adult, params.gmi_other_adult, params.gmi_child
    den = lcm(f1.denominator, fa.denominator, fc.denominator)
    n1 = f1.numerator * (den // f1.denominator)
    na = fa.numerator * (den // fa.denominator)
    nc = fc.numerator * (den // fc.denominator)
    has_adult = frame.n_adult18 >= 1
    num = np.where(
        has_adult,
        n1 + na * (frame.n_adult18 - 1) + nc * frame.n_under18,
        n1 + nc * (frame.size - 1),
    )
    return (2 * params.gmi_base * num + den) // (2 * den)


def evaluate_column(
    frame: Frame,
    spec: ColumnSpec,
    scenario: ShockScenario,
    params: PolicyParameters,
    measures: MeasureConfig,
    lost_mask: np.ndarray,
    baseline: ColumnData | None = None,
) -> ColumnData:
    """Evaluate one scenario column; `baseline` must be the pre column for
    every column that freezes means-tested awards or re-assesses them."""
    d = scenario.crisis_months
    n_p = frame.n_persons

    active = {m for m in spec.measures}
    if not measures.retention_enabled:
        active.discard("retention")
    if not measures.gmi_relax_enabled:
        active.discard("gmi_relax")
    if not measures.one_off_enabled:
        active.discard("one_off")

    shock_on = spec.shock_on and d > 0
    formal = frame.status == _FORMAL
    informal = frame.status == _INFORMAL
    selfemp_mask = frame.status == _SELF
    worker = formal | informal | selfemp_mask

    base_taxable = np.where(informal, 0, frame.wage + frame.selfemp)
    months = np.full(n_p, d, dtype=np.int64)
    crisis = base_taxable.copy()
    after = base_taxable.copy()
    informal_crisis = np.where(informal, frame.wage, 0)
    informal_after = informal_crisis.copy()

    retention_covered = np.zeros(n_p, dtype=bool)

    if shock_on:
        sev = frame.severity
        # formal employees, no-intervention schedule
        m = formal & (sev == 2)
        crisis[m] = vscale(frame.wage[m], Fraction(7, 10))
        m = formal & (sev == 3)
        crisis[m] = np.minimum(frame.wage[m], params.minimum_wage)
        after[m] = vscale(frame.wage[m], Fraction(7, 10))
        m = formal & (sev == 4) & lost_mask
        crisis[m] = 0
        after[m] = 0
        # self-employed, no-intervention schedule
        m = selfemp_mask & (sev == 2)
        crisis[m] = vscale(frame.selfemp[m], Fraction(7, 10))
        m = selfemp_mask & (sev == 3)
        crisis[m] = vscale(frame.selfemp[m], Fraction(1, 2))
        after[m] = vscale(frame.selfemp[m], Fraction(7, 10))
        m = selfemp_mask & (sev == 4)
        crisis[m] = 0
        after[m] = vscale(frame.selfemp[m], Fraction(3, 4))
        # informal earnings
        informal_crisis = np.where(
            informal, vscale(frame.wage, 1 - scenario.informal_decline), 0
        )

        if "retention" in active:
            covered = formal & (sev >= 2)
            if measures.wage_cap_enabled:
                net = frame.wage - _monthly_tax_vec(frame.wage, params)
                covered &= net <= measures.wage_cap
            retention_covered = covered
            sm = measures.subsidy_months
            months[covered] = sm
            m = covered & (sev == 2)
            crisis[m] = np.maximum(vscale(frame.wage[m], Fraction(4, 5)), params.minimum_wage)
            after[m] = frame.wage[m]
            m = covered & (sev == 3)
            crisis[m] = np.maximum(vscale(frame.wage[m], Fraction(3, 4)), params.minimum_wage)
            after[m] = vscale(frame.wage[m], Fraction(4, 5))
            m = covered & (sev == 4)
            crisis[m] = vscale(np.full(m.sum(), params.minimum_wage, dtype=np.int64), Fraction(1, 2))
            after[m] = params.minimum_wage
            # self-employed relief shares the 3-month window
            m = selfemp_mask & (sev >= 2)
            months[m] = sm
            mm = selfemp_mask & (sev == 2)
            crisis[mm] = vscale(frame.selfemp[mm], Fraction(9, 10))
            after[mm] = frame.selfemp[mm]
            mm = selfemp_mask & (sev == 3)
            crisis[mm] = vscale(frame.selfemp[mm], Fraction(3, 4))
            after[mm] = vscale(frame.selfemp[mm], Fraction(9, 10))
            mm = selfemp_mask & (sev == 4)
            crisis[mm] = vscale(frame.selfemp[mm], Fraction(1, 2))
            after[mm] = vscale(frame.selfemp[mm], Fraction(4, 5))

    taxable_annual = months * crisis + (12 - months) * after
    informal_annual = d * informal_crisis + (12 - d) * informal_after
    labor_annual = taxable_annual + informal_annual

    tax_annual = months * _monthly_tax_vec(crisis, params) + (12 - months) * _monthly_tax_vec(
        after, params
    )

    original = frame.hh_sum(labor_annual + 12 * frame.other)
    pensions = frame.hh_sum(12 * frame.pension)
    taxes = frame.hh_sum(tax_annual)
    assessable = original + pensions

    if spec.stabilizers_on or spec.label == "pre" or not spec.shock_on:
        monthly_assessable = vdiv12(assessable)
        threshold = _gmi_threshold_monthly(frame, params)
        gmi_monthly = np.maximum(threshold - monthly_assessable, 0)
        property_test = params.gmi_property_test_enabled and "gmi_relax" not in active
        if property_test:
            gmi_monthly[frame.property_excluded] = 0
        gmi = 12 * gmi_monthly
        # family allowances on equivalized assessable income
        equiv_monthly = monthly_assessable * 10.0 / frame.oecd_tenths
        eligible = equiv_monthly < params.child_allowance_income_ceiling
        child_allowance = np.where(
            eligible, 12 * params.child_allowance_amount * frame.n_under18, 0
        ).astype(np.int64)
        education_allowance = np.where(
            eligible, 12 * params.education_allowance_amount * frame.n_student_u18, 0
        ).astype(np.int64)
    else:
        if baseline is None:
            raise NumericalError(
                "frozen-stabilizer column needs the baseline ledger",
                module="scenario_runner", op="run_column", record=spec.label,
            )
        gmi = baseline.gmi
        child_allowance = baseline.child_allowance
        education_allowance = baseline.education_allowance

    one_off_person = np.zeros(n_p, dtype=np.int64)
    if shock_on and "one_off" in active:
        monthly_labor = vdiv12(labor_annual)
        low_pay = worker & (monthly_labor < measures.low_pay_threshold)
        unemployed = frame.status == _UNEMPLOYED
        student = frame.status == _STUDENT
        one_off_person[low_pay] = measures.one_off_amounts["low_pay_worker"]
        one_off_person[student] = measures.one_off_amounts["student"]
        one_off_person[unemployed] = measures.one_off_amounts["unemployed"]
    one_off = frame.hh_sum(one_off_person)

    benefits = pensions + gmi + child_allowance + education_allowance + one_off
    disposable = original + benefits - taxes
    equiv_disposable = disposable * 10.0 / frame.oecd_tenths

    return ColumnData(
        spec=spec,
        months=months,
        taxable_crisis=crisis,
        taxable_after=after,
        taxable_annual=taxable_annual,
        informal_annual=informal_annual,
        labor_annual=labor_annual,
        tax_annual=tax_annual,
        retention_covered=retention_covered,
        one_off_person=one_off_person,
        original=original,
        pensions=pensions,
        gmi=gmi,
        child_allowance=child_allowance,
        education_allowance=education_allowance,
        one_off=one_off,
        benefits=benefits,
        taxes=taxes,
        disposable=disposable,
        equiv_disposable=equiv_disposable,
    )


def audit_identity(column: ColumnData) -> None:
    """Disposable-income identity must hold exactly for every household."""
    ok = column.disposable == column.original + column.benefits - column.taxes
    if not bool(ok.all()):
        bad = int(np.nonzero(~ok)[0][0])
        raise NumericalError(
            f"disposable identity violated at household row {bad}",
            module="scenario_runner", op="run_column", record=column.spec.label,
        )
