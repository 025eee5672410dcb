"""No-intervention income shock: sector severity schedules and job losses.

Severity classes run 1 (unaffected) to 4 (hardest hit).  Each schedule sets
a monthly income for the crisis window of d months and for the remaining
12 - d months; the annual figure is the exact month sum.  A crisis length
of zero disables the shock entirely, including the job-loss draw.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import PolicyParameters, ShockScenario
from .errors import InputError, NumericalError
from .money import Money, scale
from .population import Population

# NACE divisions coerced to severity 1: no public wage cuts happened.
PUBLIC_ADMIN_CODES = ("84",)

_HALF = Fraction(1, 2)
_F70 = Fraction(7, 10)
_F75 = Fraction(3, 4)


@dataclass(frozen=True)
class SectorImpact:
    sector_code: str
    severity: int
    actual_turnover_delta: float  # signed change, negative = decline
    actual_hours_delta: float


@dataclass(frozen=True)
class SectorImpactTable:
    rows: tuple[SectorImpact, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_severity", {r.sector_code: r.severity for r in self.rows}
        )

    def severity(self, sector_code: str) -> int:
        try:
            return self._severity[sector_code]
        except KeyError:
            raise InputError(
                f"sector {sector_code} missing from impact table",
                module="shock_engine", op="apply_shock", record=sector_code,
            ) from None

    def covers(self, pop: Population) -> None:
        known = set(self._severity)
        for ind in pop.individuals:
            if ind.sector_code and ind.sector_code not in known:
                raise InputError(
                    f"sector {ind.sector_code} missing from impact table",
                    module="shock_engine", op="apply_shock", record=ind.person_id,
                )


def load_sector_table(path: str | Path) -> SectorImpactTable:
    """Read sectors.csv; public-administration codes are forced to severity 1."""
    header = ["sector_code", "severity", "actual_turnover_delta", "actual_hours_delta"]
    rows: list[SectorImpact] = []
    path = Path(path)
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        got = next(reader, None)
        if got != header:
            raise InputError(
                f"unexpected header {got!r}", module="shock_engine",
                op="load_sector_table", record=f"{path.name}:1",
            )
        for lineno, row in enumerate(reader, start=2):
            where = f"{path.name}:{lineno}"
            if len(row) != 4:
                raise InputError(
                    f"expected 4 fields, got {len(row)}",
                    module="shock_engine", op="load_sector_table", record=where,
                )
            code = row[0].strip()
            if code in seen:
                raise InputError(
                    f"duplicate sector {code}", module="shock_engine",
                    op="load_sector_table", record=where,
                )
            seen.add(code)
            try:
                severity = int(row[1])
                turnover = float(row[2])
                hours = float(row[3])
            except ValueError:
                raise InputError(
                    "malformed sector row", module="shock_engine",
                    op="load_sector_table", record=where,
                ) from None
            if severity not in (1, 2, 3, 4):
                raise InputError(
                    f"severity must be 1..4, got {severity}",
                    module="shock_engine", op="load_sector_table", record=where,
                )
            if code in PUBLIC_ADMIN_CODES:
                severity = 1
            rows.append(SectorImpact(code, severity, turnover, hours))
    if not rows:
        raise InputError("empty sector table", module="shock_engine", op="load_sector_table")
    return SectorImpactTable(tuple(sorted(rows, key=lambda r: r.sector_code)))


@dataclass(frozen=True)
class ShockedIncome:
    person_id: str
    months: int  # crisis-window length behind this record
    crisis_phase_monthly: Money
    after_phase_monthly: Money
    job_lost: bool = False

    @property
    def annual(self) -> Money:
        return self.months * self.crisis_phase_monthly + (12 - self.months) * self.after_phase_monthly


def unchanged_path(person_id: str, monthly: Money, months: int) -> ShockedIncome:
    return ShockedIncome(person_id, months, monthly, monthly)


def shock_employee(
    wage: Money,
    severity: int,
    scenario: ShockScenario,
    params: PolicyParameters,
    job_lost: bool = False,
    person_id: str = "",
) -> ShockedIncome:
    """Monthly wage path under the no-intervention shock.

    Severity 4: selected workers lose the job for the rest of the year, the
    rest keep full pay.  Severity 3: the minimum wage during the crisis
    (capped at the original wage so low earners are not raised), then 70% of
    the original.  Severity 2: 70% during the crisis, then full.  Severity 1
    untouched.
    """
    d = scenario.crisis_months
    if d == 0:
        return unchanged_path(person_id, wage, d)
    if severity == 1:
        return unchanged_path(person_id, wage, d)
    if severity == 2:
        return ShockedIncome(person_id, d, scale(wage, _F70), wage)
    if severity == 3:
        return ShockedIncome(person_id, d, min(wage, params.minimum_wage), scale(wage, _F70))
    if severity == 4:
        if job_lost:
            return ShockedIncome(person_id, d, 0, 0, job_lost=True)
        return unchanged_path(person_id, wage, d)
    raise InputError(
        f"unknown severity {severity}", module="shock_engine", op="shock_employee", record=person_id
    )


def shock_self_employed(
    income: Money,
    severity: int,
    scenario: ShockScenario,
    person_id: str = "",
) -> ShockedIncome:
    """Monthly self-employment income path under the no-intervention shock."""
    d = scenario.crisis_months
    if d == 0 or severity == 1:
        return unchanged_path(person_id, income, d)
    if severity == 2:
        return ShockedIncome(person_id, d, scale(income, _F70), income)
    if severity == 3:
        return ShockedIncome(person_id, d, scale(income, _HALF), scale(income, _F70))
    if severity == 4:
        return ShockedIncome(person_id, d, 0, scale(income, _F75))
    raise InputError(
        f"unknown severity {severity}", module="shock_engine",
        op="shock_self_employed", record=person_id,
    )


def shock_informal(income: Money, scenario: ShockScenario, person_id: str = "") -> ShockedIncome:
    """Informal earnings drop by the configured share during the crisis
    months and recover afterwards (no sector dependence)."""
    d = scenario.crisis_months
    if d == 0:
        return unchanged_path(person_id, income, d)
    kept = 1 - scenario.informal_decline
    return ShockedIncome(person_id, d, scale(income, kept), income)


@dataclass(frozen=True)
class JobLossDraw:
    person_ids: frozenset[str]
    achieved_share: float  # selected wage mass / severity-4 wage mass
    weighted_persons: float
    target_count: int


def select_job_losses(
    pop: Population,
    table: SectorImpactTable,
    scenario: ShockScenario,
) -> JobLossDraw:
    """Seed-deterministic pick of severity-4 formal employees whose weighted
    wage mass matches the configured share within one percentage point.

    A shuffled greedy fill is refined by single add/swap moves until the
    share lands in the band; the implied weighted head count is reported for
    comparison with the calibration target.
    """
    op = "select_job_losses"
    share = scenario.job_loss_wage_mass_share
    weights = {h.household_id: h.weight for h in pop.households}
    candidates = [
        ind for ind in pop.individuals
        if ind.labor_status == "formal_employee"
        and ind.sector_code
        and table.severity(ind.sector_code) == 4
    ]
    if scenario.crisis_months == 0 or share == 0.0 or not candidates:
        if share > 0 and not candidates and scenario.crisis_months > 0:
            raise NumericalError(
                "severity-4 wage mass is zero but job_loss_wage_mass_share > 0",
                module="shock_engine", op=op,
            )
        return JobLossDraw(frozenset(), 0.0, 0.0, scenario.job_loss_count_target)

    mass = np.array([weights[c.household_id] * c.gross_wage for c in candidates], dtype=float)
    total = float(mass.sum())
    if total <= 0:
        raise NumericalError(
            "severity-4 wage mass is zero but job_loss_wage_mass_share > 0",
            module="shock_engine", op=op,
        )
    if share == 1.0:
        ids = frozenset(c.person_id for c in candidates)
        persons = sum(weights[c.household_id] for c in candidates)
        return JobLossDraw(ids, 1.0, persons, scenario.job_loss_count_target)

    target = share * total
    rng = np.random.default_rng(scenario.seed)
    order = rng.permutation(len(candidates))

    selected = np.zeros(len(candidates), dtype=bool)
    current = 0.0
    for i in order:
        if current + mass[i] <= target:
            selected[i] = True
            current += mass[i]

    tolerance = 0.01 * total

    def error(value: float) -> float:
        return abs(value - target)

    # Single additions, then add/remove/swap passes until inside the band.
    for _pass in range(200):
        if error(current) <= tolerance:
            break
        best_gain, best_move = 0.0, None
        for i in order:
            if selected[i]:
                gain = error(current) - error(current - mass[i])
                if gain > best_gain:
                    best_gain, best_move = gain, ("drop", i)
            else:
                gain = error(current) - error(current + mass[i])
                if gain > best_gain:
                    best_gain, best_move = gain, ("add", i)
        if best_move is None:
            break
        kind, i = best_move
        if kind == "add":
            selected[i] = True
            current += mass[i]
        else:
            selected[i] = False
            current -= mass[i]

    achieved = current / total
    if abs(achieved - share) > 0.01:
        raise NumericalError(
            f"cannot match wage-mass share {share:.3f}; best achievable {achieved:.3f}",
            module="shock_engine", op=op,
        )
    ids = frozenset(candidates[i].person_id for i in np.nonzero(selected)[0])
    persons = sum(weights[c.household_id] for c in candidates if c.person_id in ids)
    return JobLossDraw(ids, achieved, persons, scenario.job_loss_count_target)


def apply_shock(
    pop: Population,
    table: SectorImpactTable,
    scenario: ShockScenario,
    params: PolicyParameters,
    job_losses: frozenset[str] | None = None,
) -> dict[str, ShockedIncome]:
    """Per-person shocked labor-income path for every individual.

    Dispatches on labor status; pensions and other income always pass
    through untouched and are not part of these records.  The job-loss set
    defaults to a fresh seeded draw.
    """
    table.covers(pop)
    if job_losses is None:
        job_losses = select_job_losses(pop, table, scenario).person_ids
    out: dict[str, ShockedIncome] = {}
    d = scenario.crisis_months
    for ind in pop.individuals:
        pid = ind.person_id
        if ind.labor_status == "formal_employee":
            out[pid] = shock_employee(
                ind.gross_wage, table.severity(ind.sector_code), scenario, params,
                job_lost=pid in job_losses, person_id=pid,
            )
        elif ind.labor_status == "self_employed":
            out[pid] = shock_self_employed(
                ind.self_employment_income, table.severity(ind.sector_code), scenario, person_id=pid
            )
        elif ind.labor_status == "informal_employee":
            out[pid] = shock_informal(ind.gross_wage, scenario, person_id=pid)
        else:
            # Non-worker statuses keep whatever labor income they carry
            # (normally zero); pensions are not part of these records.
            out[pid] = unchanged_path(pid, ind.gross_wage + ind.self_employment_income, d)
    return out
