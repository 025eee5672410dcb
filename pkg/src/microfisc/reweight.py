"""Iterative proportional fitting of household expansion weights.

Margins are categorical partitions of households or of individuals.  Each
category's weighted total is matched by multiplicative updates of household
weights.  For household-level margins this is classic raking; for
person-level margins a household contributes its member count per category,
which generalizes the update (a household spanning several categories is
rescaled once per category it touches and the sweep is iterated).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError, NumericalError
from .population import Household, Individual, Population

# dimension name -> (unit, classifier)
_AGE_BANDS = ((15, "0_14"), (30, "15_29"), (65, "30_64"), (10**9, "65_plus"))


def _age_group(ind: Individual) -> str:
    for bound, label in _AGE_BANDS:
        if ind.age < bound:
            return label
    raise AssertionError("unreachable")


def _size_band(size: int) -> str:
    return str(size) if size < 5 else "5_plus"


PERSON_DIMENSIONS = {
    "labor_status": lambda ind: ind.labor_status,
    "gender": lambda ind: ind.gender,
    "age_group": _age_group,
}
HOUSEHOLD_DIMENSIONS = {
    "owns_extra_property": lambda h: str(int(h.owns_extra_property)),
    "parcel_over_500m2": lambda h: str(int(h.parcel_over_500m2)),
    "car_newer_than_5y": lambda h: str(int(h.car_newer_than_5y)),
}
# household_size is resolved against the member lists, handled separately.
_SPECIAL_HOUSEHOLD_DIMENSIONS = {"household_size"}


@dataclass(frozen=True)
class Margin:
    dimension: str
    targets: dict[str, float]


@dataclass(frozen=True)
class ReweightTargets:
    margins: tuple[Margin, ...]
    tolerance: float = 1e-6
    max_iterations: int = 100

    def validate(self) -> None:
        if not self.margins:
            raise InputError("no margins given", module="population", op="reweight")
        if self.tolerance <= 0 or self.max_iterations < 1:
            raise InputError(
                "tolerance must be > 0 and max_iterations >= 1",
                module="population", op="reweight",
            )
        known = set(PERSON_DIMENSIONS) | set(HOUSEHOLD_DIMENSIONS) | _SPECIAL_HOUSEHOLD_DIMENSIONS
        for margin in self.margins:
            if margin.dimension not in known:
                raise InputError(
                    f"unknown margin dimension {margin.dimension!r}",
                    module="population", op="reweight", record=margin.dimension,
                )
            for category, total in margin.targets.items():
                if not total > 0:
                    raise InputError(
                        f"target for {margin.dimension}={category} must be > 0",
                        module="population", op="reweight", record=category,
                    )


def _cell_counts(pop: Population, margin: Margin) -> dict[str, dict[str, int]]:
    """household_id -> {category: contribution} for one margin."""
    counts: dict[str, dict[str, int]] = {h.household_id: {} for h in pop.households}
    if margin.dimension in PERSON_DIMENSIONS:
        classify = PERSON_DIMENSIONS[margin.dimension]
        for ind in pop.individuals:
            cell = counts[ind.household_id]
            cat = classify(ind)
            cell[cat] = cell.get(cat, 0) + 1
    elif margin.dimension == "household_size":
        sizes: dict[str, int] = {h.household_id: 0 for h in pop.households}
        for ind in pop.individuals:
            sizes[ind.household_id] += 1
        for hid, size in sizes.items():
            counts[hid][_size_band(size)] = 1
    else:
        classify_h = HOUSEHOLD_DIMENSIONS[margin.dimension]
        for h in pop.households:
            counts[h.household_id][classify_h(h)] = 1
    return counts


def margin_errors(pop: Population, targets: ReweightTargets) -> dict[str, dict[str, float]]:
    """Relative error per margin category at the population's current weights."""
    weights = {h.household_id: h.weight for h in pop.households}
    report: dict[str, dict[str, float]] = {}
    for margin in targets.margins:
        counts = _cell_counts(pop, margin)
        current: dict[str, float] = {c: 0.0 for c in margin.targets}
        for hid, cell in counts.items():
            for cat, n in cell.items():
                if cat in current:
                    current[cat] += weights[hid] * n
        report[margin.dimension] = {
            cat: abs(current[cat] - target) / target for cat, target in margin.targets.items()
        }
    return report


def reweight(pop: Population, targets: ReweightTargets) -> Population:
    """Fit household weights to every margin within tolerance.

    Returns a new Population; the input is untouched.  Raises NumericalError
    with the worst margin error if max_iterations sweeps do not converge.
    Within each cell of the cross-classification of all margins relative
    weights are preserved (all members of a cell receive the same factor).
    """
    targets.validate()
    weights = {h.household_id: h.weight for h in pop.households}

    margin_counts = []
    for margin in targets.margins:
        counts = _cell_counts(pop, margin)
        observed: set[str] = set()
        for cell in counts.values():
            observed.update(cell)
        missing = set(margin.targets) - observed
        if missing:
            raise InputError(
                f"margin category absent from population: {margin.dimension}={sorted(missing)[0]}",
                module="population", op="reweight", record=sorted(missing)[0],
            )
        extra = observed - set(margin.targets)
        if extra:
            raise InputError(
                f"population category missing from targets: {margin.dimension}={sorted(extra)[0]}",
                module="population", op="reweight", record=sorted(extra)[0],
            )
        # contributors per category, in household order for determinism
        by_cat: dict[str, list[tuple[str, int]]] = {c: [] for c in margin.targets}
        for h in pop.households:
            for cat, n in counts[h.household_id].items():
                by_cat[cat].append((h.household_id, n))
        margin_counts.append((margin, by_cat))

    def worst_error() -> tuple[float, str]:
        worst, worst_label = 0.0, ""
        for margin, by_cat in margin_counts:
            for cat, contributors in by_cat.items():
                current = sum(weights[hid] * n for hid, n in contributors)
                err = abs(current - margin.targets[cat]) / margin.targets[cat]
                if err > worst:
                    worst, worst_label = err, f"{margin.dimension}={cat}"
        return worst, worst_label

    for _ in range(targets.max_iterations):
        for margin, by_cat in margin_counts:
            for cat in margin.targets:
                contributors = by_cat[cat]
                current = sum(weights[hid] * n for hid, n in contributors)
                if current <= 0:
                    raise NumericalError(
                        f"zero weighted total for {margin.dimension}={cat}",
                        module="population", op="reweight", record=cat,
                    )
                factor = margin.targets[cat] / current
                for hid, _n in contributors:
                    weights[hid] *= factor
        err, _label = worst_error()
        if err <= targets.tolerance:
            return pop.with_weights(weights)

    err, label = worst_error()
    raise NumericalError(
        f"no convergence after {targets.max_iterations} iterations; "
        f"worst margin {label} relative error {err:.3e}",
        module="population", op="reweight", record=label,
    )
