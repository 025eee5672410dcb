"""Survey micro-data substrate: households, individuals, validation and IO.

A Population is immutable after construction and shared read-only by every
scenario column.  Records are kept sorted by id so that all downstream
reductions run in one fixed order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

from .errors import InputError
from .money import Money, mkd_str, money

LABOR_STATUSES = (
    "formal_employee",
    "informal_employee",
    "self_employed",
    "unemployed",
    "student",
    "pensioner",
    "inactive",
    "child",
)
GENDERS = ("female", "male")

# Statuses that must not carry labor income.
_NO_LABOR_INCOME = {"unemployed", "student", "inactive", "child"}
# Statuses whose schedule dispatch requires a severity lookup.
SECTOR_REQUIRED = {"formal_employee", "self_employed"}

HOUSEHOLD_HEADER = [
    "household_id",
    "weight",
    "owns_extra_property",
    "parcel_over_500m2",
    "car_newer_than_5y",
]
INDIVIDUAL_HEADER = [
    "person_id",
    "household_id",
    "age",
    "gender",
    "labor_status",
    "sector_code",
    "gross_wage",
    "self_employment_income",
    "pension_income",
    "other_income",
]


@dataclass(frozen=True)
class Individual:
    person_id: str
    household_id: str
    age: int
    gender: str
    labor_status: str
    sector_code: str | None
    gross_wage: Money  # MKD/month
    self_employment_income: Money  # MKD/month
    pension_income: Money  # MKD/month
    other_income: Money  # MKD/month


@dataclass(frozen=True)
class Household:
    household_id: str
    weight: float
    owns_extra_property: bool
    parcel_over_500m2: bool
    car_newer_than_5y: bool

    @property
    def property_excluded(self) -> bool:
        return self.owns_extra_property or self.parcel_over_500m2 or self.car_newer_than_5y


@dataclass(frozen=True)
class Population:
    households: tuple[Household, ...]
    individuals: tuple[Individual, ...]
    reference_year: str = "2019"

    def members(self) -> dict[str, list[Individual]]:
        """Members per household id, in person-id order."""
        out: dict[str, list[Individual]] = {h.household_id: [] for h in self.households}
        for ind in self.individuals:
            out[ind.household_id].append(ind)
        return out

    def with_weights(self, weights: dict[str, float]) -> "Population":
        """New population with replaced household weights; everything else untouched."""
        households = tuple(
            replace(h, weight=weights[h.household_id]) for h in self.households
        )
        return Population(households, self.individuals, self.reference_year)

    def weighted_persons(self) -> float:
        w = {h.household_id: h.weight for h in self.households}
        return sum(w[ind.household_id] for ind in self.individuals)


def validate_population(pop: Population) -> Population:
    """Check all structural invariants; raise InputError on the first breach."""
    mod = "population"
    if not pop.households or not pop.individuals:
        raise InputError("empty population", module=mod, op="validate")

    hh_ids: set[str] = set()
    for h in pop.households:
        if h.household_id in hh_ids:
            raise InputError("duplicate household_id", module=mod, op="validate", record=h.household_id)
        hh_ids.add(h.household_id)
        if not h.weight > 0:
            raise InputError("weight must be > 0", module=mod, op="validate", record=h.household_id)

    seen: set[str] = set()
    inhabited: set[str] = set()
    for ind in pop.individuals:
        rec = ind.person_id
        if ind.person_id in seen:
            raise InputError("duplicate person_id", module=mod, op="validate", record=rec)
        seen.add(ind.person_id)
        if ind.household_id not in hh_ids:
            raise InputError(
                f"references missing household {ind.household_id}",
                module=mod, op="validate", record=rec,
            )
        inhabited.add(ind.household_id)
        if ind.age < 0:
            raise InputError("age must be >= 0", module=mod, op="validate", record=rec)
        if ind.gender not in GENDERS:
            raise InputError(f"unknown gender {ind.gender!r}", module=mod, op="validate", record=rec)
        if ind.labor_status not in LABOR_STATUSES:
            raise InputError(
                f"unknown labor_status {ind.labor_status!r}", module=mod, op="validate", record=rec
            )
        for field in ("gross_wage", "self_employment_income", "pension_income", "other_income"):
            if getattr(ind, field) < 0:
                raise InputError(f"negative {field}", module=mod, op="validate", record=rec)
        if ind.age < 15 and ind.labor_status != "child":
            raise InputError("age < 15 requires labor_status child", module=mod, op="validate", record=rec)
        if ind.labor_status == "formal_employee" and (ind.gross_wage <= 0 or not ind.sector_code):
            raise InputError(
                "formal_employee requires gross_wage > 0 and sector_code",
                module=mod, op="validate", record=rec,
            )
        if ind.labor_status == "informal_employee" and ind.gross_wage <= 0:
            raise InputError(
                "informal_employee requires gross_wage > 0", module=mod, op="validate", record=rec
            )
        if ind.labor_status == "self_employed" and (
            ind.self_employment_income <= 0 or not ind.sector_code
        ):
            raise InputError(
                "self_employed requires self_employment_income > 0 and sector_code",
                module=mod, op="validate", record=rec,
            )
        if ind.labor_status in _NO_LABOR_INCOME and (
            ind.gross_wage != 0 or ind.self_employment_income != 0
        ):
            raise InputError(
                f"{ind.labor_status} must have zero labor income",
                module=mod, op="validate", record=rec,
            )

    empty = hh_ids - inhabited
    if empty:
        raise InputError("household has no members", module=mod, op="validate", record=sorted(empty)[0])
    return pop


def _parse_money_field(raw: str, field: str, where: str) -> Money:
    raw = raw.strip()
    if raw == "":
        raise InputError(f"empty {field}", module="population", op="load_population", record=where)
    try:
        d = Decimal(raw)
    except InvalidOperation:
        raise InputError(
            f"malformed {field} {raw!r}", module="population", op="load_population", record=where
        ) from None
    if d < 0:
        raise InputError(f"negative {field}", module="population", op="load_population", record=where)
    return money(d)


def _parse_flag(raw: str, field: str, where: str) -> bool:
    if raw not in ("0", "1"):
        raise InputError(
            f"{field} must be 0 or 1, got {raw!r}",
            module="population", op="load_population", record=where,
        )
    return raw == "1"


def load_population(
    households_path: str | Path,
    individuals_path: str | Path,
    reference_year: str = "2019",
) -> Population:
    """Load and validate the two delimited input tables.

    Errors carry the file name and 1-based line number of the offending row.
    """
    mod, op = "population", "load_population"
    households: list[Household] = []
    hh_path = Path(households_path)
    with open(hh_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HOUSEHOLD_HEADER:
            raise InputError(
                f"unexpected header {header!r}", module=mod, op=op, record=f"{hh_path.name}:1"
            )
        for lineno, row in enumerate(reader, start=2):
            where = f"{hh_path.name}:{lineno}"
            if len(row) != len(HOUSEHOLD_HEADER):
                raise InputError(
                    f"expected {len(HOUSEHOLD_HEADER)} fields, got {len(row)}",
                    module=mod, op=op, record=where,
                )
            hid, weight_raw, f1, f2, f3 = (v.strip() for v in row)
            try:
                weight = float(weight_raw)
            except ValueError:
                raise InputError(
                    f"malformed weight {weight_raw!r}", module=mod, op=op, record=where
                ) from None
            households.append(
                Household(
                    household_id=hid,
                    weight=weight,
                    owns_extra_property=_parse_flag(f1, "owns_extra_property", where),
                    parcel_over_500m2=_parse_flag(f2, "parcel_over_500m2", where),
                    car_newer_than_5y=_parse_flag(f3, "car_newer_than_5y", where),
                )
            )

    individuals: list[Individual] = []
    ind_path = Path(individuals_path)
    with open(ind_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != INDIVIDUAL_HEADER:
            raise InputError(
                f"unexpected header {header!r}", module=mod, op=op, record=f"{ind_path.name}:1"
            )
        for lineno, row in enumerate(reader, start=2):
            where = f"{ind_path.name}:{lineno}"
            if len(row) != len(INDIVIDUAL_HEADER):
                raise InputError(
                    f"expected {len(INDIVIDUAL_HEADER)} fields, got {len(row)}",
                    module=mod, op=op, record=where,
                )
            pid, hid, age_raw, gender, status, sector, wage, selfemp, pension, other = (
                v.strip() for v in row
            )
            try:
                age = int(age_raw)
            except ValueError:
                raise InputError(
                    f"malformed age {age_raw!r}", module=mod, op=op, record=where
                ) from None
            individuals.append(
                Individual(
                    person_id=pid,
                    household_id=hid,
                    age=age,
                    gender=gender,
                    labor_status=status,
                    sector_code=sector or None,
                    gross_wage=_parse_money_field(wage, "gross_wage", where),
                    self_employment_income=_parse_money_field(selfemp, "self_employment_income", where),
                    pension_income=_parse_money_field(pension, "pension_income", where),
                    other_income=_parse_money_field(other, "other_income", where),
                )
            )

    pop = Population(
        households=tuple(sorted(households, key=lambda h: h.household_id)),
        individuals=tuple(sorted(individuals, key=lambda i: i.person_id)),
        reference_year=reference_year,
    )
    return validate_population(pop)


def save_population(pop: Population, households_path: str | Path, individuals_path: str | Path) -> None:
    """Write the two tables back in the exact load format (round-trip safe)."""
    with open(households_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(HOUSEHOLD_HEADER)
        for h in pop.households:
            writer.writerow(
                [
                    h.household_id,
                    repr(h.weight),
                    int(h.owns_extra_property),
                    int(h.parcel_over_500m2),
                    int(h.car_newer_than_5y),
                ]
            )
    with open(individuals_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(INDIVIDUAL_HEADER)
        for ind in pop.individuals:
            writer.writerow(
                [
                    ind.person_id,
                    ind.household_id,
                    ind.age,
                    ind.gender,
                    ind.labor_status,
                    ind.sector_code or "",
                    mkd_str(ind.gross_wage),
                    mkd_str(ind.self_employment_income),
                    mkd_str(ind.pension_income),
                    mkd_str(ind.other_income),
                ]
            )


# Modified OECD equivalence scale: first member (oldest) 1.0, other members
# aged 14+ 0.5, members under 14 0.3.
OECD_OTHER_ADULT = Fraction(1, 2)
OECD_CHILD = Fraction(3, 10)


def equivalence_scale_sum(ages: list[int]) -> Fraction:
    """Sum of modified-OECD factors for a household given member ages."""
    if not ages:
        raise InputError("household has no members", module="population", op="equivalized_income")
    ordered = sorted(ages, reverse=True)
    total = Fraction(1)
    for age in ordered[1:]:
        total += OECD_OTHER_ADULT if age >= 14 else OECD_CHILD
    return total


def equivalized_income(total_income: Money, ages: list[int]) -> float:
    """Household income per equivalent adult (same value for every member).

    Returned in hundredths of MKD as a float; it feeds distributional
    statistics, not the exact-ledger pipeline.
    """
    s = equivalence_scale_sum(ages)
    return total_income * s.denominator / s.numerator
