"""Run configuration: policy parameters, shock scenario, measures, bounds.

One TOML file drives a whole run.  Unknown sections or keys are load errors,
never silently ignored; the same applies to --override key=value pairs.
All monetary amounts are parsed onto the fixed-point grid and all rates into
exact fractions at load time.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .money import Money, money, rate
from .reweight import Margin, ReweightTargets

ONE_OFF_CATEGORIES = ("low_pay_worker", "unemployed", "student")


@dataclass(frozen=True)
class PolicyParameters:
    pit_rate: Fraction
    ssc_rate: Fraction
    minimum_wage: Money
    personal_allowance: Money
    gmi_base: Money
    gmi_first_adult: Fraction
    gmi_other_adult: Fraction
    gmi_child: Fraction
    gmi_property_test_enabled: bool
    child_allowance_amount: Money
    child_allowance_income_ceiling: Money
    education_allowance_amount: Money
    ppp_mkd_per_usd: Fraction
    eur_mkd: Fraction


@dataclass(frozen=True)
class ShockScenario:
    crisis_months: int
    job_loss_wage_mass_share: float
    job_loss_count_target: int
    informal_decline: Fraction
    seed: int


@dataclass(frozen=True)
class MeasureConfig:
    retention_enabled: bool
    subsidy_per_worker: Money
    subsidy_months: int
    wage_cap_enabled: bool
    wage_cap: Money  # net MKD/month
    gmi_relax_enabled: bool
    one_off_enabled: bool
    one_off_amounts: dict[str, Money]
    low_pay_threshold: Money


@dataclass(frozen=True)
class RunConfig:
    policy: PolicyParameters
    scenario: ShockScenario
    measures: MeasureConfig
    bounds_durations: tuple[int, ...]
    reweight_targets: ReweightTargets | None = None


# section -> key -> (converter, default); _REQUIRED means the key must be set.
_REQUIRED = object()


def _bool(v):
    if not isinstance(v, bool):
        raise ValueError("expected true/false")
    return v


def _int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError("expected an integer")
    return v


_SCHEMA: dict[str, dict[str, tuple]] = {
    "tax": {
        "pit_rate": (rate, rate("0.10")),
        "ssc_rate": (rate, rate("0.28")),
        "minimum_wage": (money, money(14_500)),
        "personal_allowance": (money, money(0)),
    },
    "gmi": {
        "base": (money, money(4_000)),
        "first_adult": (rate, Fraction(1)),
        "other_adult": (rate, Fraction(1, 2)),
        "child": (rate, Fraction(3, 10)),
        "property_test_enabled": (_bool, True),
    },
    "allowances": {
        "child_amount": (money, money(1_000)),
        "education_amount": (money, money(1_000)),
        "income_ceiling": (money, money(8_000)),
    },
    "conversion": {
        "ppp_mkd_per_usd": (rate, _REQUIRED),
        "eur_mkd": (rate, rate("61.5")),
    },
    "scenario": {
        "crisis_months": (_int, 5),
        "job_loss_wage_mass_share": (float, 0.40),
        "job_loss_count_target": (_int, 60_000),
        "informal_decline": (rate, rate("0.70")),
        "seed": (_int, 0),
    },
    "measures": {
        "retention_enabled": (_bool, True),
        "subsidy_per_worker": (money, money(14_500)),
        "subsidy_months": (_int, 3),
        "wage_cap_enabled": (_bool, False),
        "wage_cap": (money, money(39_900)),
        "gmi_relax_enabled": (_bool, True),
        "one_off_enabled": (_bool, True),
        "low_pay_threshold": (money, money(21_750)),
    },
    "one_off_amounts": {  # nested under [measures.one_off_amounts]
        "low_pay_worker": (money, money(9_000)),
        "unemployed": (money, money(9_000)),
        "student": (money, money(3_690)),
    },
    "bounds": {
        "durations": (None, (3, 5, 9)),
    },
    "reweight": {
        "tolerance": (float, 1e-6),
        "max_iterations": (_int, 100),
        "margins": (None, None),
    },
}


def _convert(section: str, key: str, value, converter):
    try:
        return converter(value)
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(
            f"bad value for {section}.{key}: {exc}", module="cli", op="load_config",
            record=f"{section}.{key}",
        ) from None


def _check_unknown(raw: dict) -> None:
    for section, body in raw.items():
        if section not in _SCHEMA or section == "one_off_amounts":
            raise ConfigError(
                f"unknown config section [{section}]", module="cli", op="load_config", record=section
            )
        if not isinstance(body, dict):
            raise ConfigError(
                f"[{section}] must be a table", module="cli", op="load_config", record=section
            )
        for key in body:
            if section == "measures" and key == "one_off_amounts":
                for sub in body[key]:
                    if sub not in _SCHEMA["one_off_amounts"]:
                        raise ConfigError(
                            f"unknown config key measures.one_off_amounts.{sub}",
                            module="cli", op="load_config", record=sub,
                        )
                continue
            if section == "reweight" and key == "margins":
                continue
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"unknown config key {section}.{key}",
                    module="cli", op="load_config", record=f"{section}.{key}",
                )


def _section_values(raw: dict, section: str) -> dict:
    body = dict(raw.get(section, {}))
    if section == "measures":
        body.pop("one_off_amounts", None)
    if section == "reweight":
        body.pop("margins", None)
    out = {}
    for key, (converter, default) in _SCHEMA[section].items():
        if key in ("margins", "durations"):
            continue
        if key in body:
            out[key] = _convert(section, key, body[key], converter)
        elif default is _REQUIRED:
            raise ConfigError(
                f"missing required config key {section}.{key}",
                module="cli", op="load_config", record=f"{section}.{key}",
            )
        else:
            out[key] = default
    return out


def _validate(policy: PolicyParameters, scenario: ShockScenario, measures: MeasureConfig) -> None:
    def err(msg: str, record: str = "") -> ConfigError:
        return ConfigError(msg, module="cli", op="load_config", record=record)

    for name in ("pit_rate", "ssc_rate"):
        r = getattr(policy, name)
        if not (0 <= r < 1):
            raise err(f"{name} must be in [0, 1)", name)
    if policy.minimum_wage <= 0:
        raise err("minimum_wage must be > 0", "tax.minimum_wage")
    for name in (
        "personal_allowance", "gmi_base", "child_allowance_amount",
        "child_allowance_income_ceiling", "education_allowance_amount",
    ):
        if getattr(policy, name) < 0:
            raise err(f"{name} must be >= 0", name)
    for name in ("gmi_first_adult", "gmi_other_adult", "gmi_child"):
        if getattr(policy, name) <= 0:
            raise err(f"{name} must be > 0", name)
    if policy.ppp_mkd_per_usd <= 0:
        raise err(
            "conversion.ppp_mkd_per_usd must be set to a positive PPP factor",
            "conversion.ppp_mkd_per_usd",
        )
    if policy.eur_mkd <= 0:
        raise err("conversion.eur_mkd must be > 0", "conversion.eur_mkd")

    if not (0 <= scenario.crisis_months <= 12):
        raise err("scenario.crisis_months must be in [0, 12]", "scenario.crisis_months")
    if not (0.0 <= scenario.job_loss_wage_mass_share <= 1.0):
        raise err("scenario.job_loss_wage_mass_share must be in [0, 1]")
    if not (0 <= scenario.informal_decline <= 1):
        raise err("scenario.informal_decline must be in [0, 1]")
    if scenario.job_loss_count_target < 0:
        raise err("scenario.job_loss_count_target must be >= 0")

    if measures.subsidy_months < 0 or measures.subsidy_months > 12:
        raise err("measures.subsidy_months must be in [0, 12]")
    for name in ("subsidy_per_worker", "wage_cap", "low_pay_threshold"):
        if getattr(measures, name) < 0:
            raise err(f"measures.{name} must be >= 0")
    # One-off amounts must sit inside the 50-150 EUR band at the configured rate.
    for category, amount in measures.one_off_amounts.items():
        eur = Fraction(amount) / policy.eur_mkd / 100
        if not (Fraction(50) <= eur <= Fraction(150)):
            raise err(
                f"one_off amount for {category} is {float(eur):.2f} EUR, "
                "outside the 50-150 EUR band",
                f"measures.one_off_amounts.{category}",
            )


def _parse_reweight(raw: dict) -> ReweightTargets | None:
    body = raw.get("reweight")
    if body is None:
        return None
    margins_raw = body.get("margins", [])
    if not isinstance(margins_raw, list):
        raise ConfigError(
            "reweight.margins must be an array of tables",
            module="cli", op="load_config", record="reweight.margins",
        )
    margins = []
    for i, m in enumerate(margins_raw):
        if not isinstance(m, dict) or "dimension" not in m or "targets" not in m:
            raise ConfigError(
                f"reweight.margins[{i}] needs 'dimension' and 'targets'",
                module="cli", op="load_config", record=f"margins[{i}]",
            )
        unknown = set(m) - {"dimension", "targets"}
        if unknown:
            raise ConfigError(
                f"unknown key in reweight.margins[{i}]: {sorted(unknown)[0]}",
                module="cli", op="load_config", record=f"margins[{i}]",
            )
        targets = {str(k): float(v) for k, v in m["targets"].items()}
        margins.append(Margin(dimension=str(m["dimension"]), targets=targets))
    rw = ReweightTargets(
        margins=tuple(margins),
        tolerance=float(body.get("tolerance", 1e-6)),
        max_iterations=int(body.get("max_iterations", 100)),
    )
    if margins:
        rw.validate()
    return rw


def _build(raw: dict) -> RunConfig:
    _check_unknown(raw)

    tax = _section_values(raw, "tax")
    gmi = _section_values(raw, "gmi")
    allow = _section_values(raw, "allowances")
    conv = _section_values(raw, "conversion")
    scen = _section_values(raw, "scenario")
    meas = _section_values(raw, "measures")

    one_off_raw = raw.get("measures", {}).get("one_off_amounts", {})
    one_off: dict[str, Money] = {}
    for category, (converter, default) in _SCHEMA["one_off_amounts"].items():
        if category in one_off_raw:
            one_off[category] = _convert("one_off_amounts", category, one_off_raw[category], converter)
        else:
            one_off[category] = default

    durations_raw = raw.get("bounds", {}).get("durations", list(_SCHEMA["bounds"]["durations"][1]))
    if not isinstance(durations_raw, list) or not durations_raw or not all(
        isinstance(d, int) and not isinstance(d, bool) and 0 <= d <= 12 for d in durations_raw
    ):
        raise ConfigError(
            "bounds.durations must be a non-empty list of integers in [0, 12]",
            module="cli", op="load_config", record="bounds.durations",
        )
    durations = tuple(sorted(set(durations_raw)))

    policy = PolicyParameters(
        pit_rate=tax["pit_rate"],
        ssc_rate=tax["ssc_rate"],
        minimum_wage=tax["minimum_wage"],
        personal_allowance=tax["personal_allowance"],
        gmi_base=gmi["base"],
        gmi_first_adult=gmi["first_adult"],
        gmi_other_adult=gmi["other_adult"],
        gmi_child=gmi["child"],
        gmi_property_test_enabled=gmi["property_test_enabled"],
        child_allowance_amount=allow["child_amount"],
        child_allowance_income_ceiling=allow["income_ceiling"],
        education_allowance_amount=allow["education_amount"],
        ppp_mkd_per_usd=conv["ppp_mkd_per_usd"],
        eur_mkd=conv["eur_mkd"],
    )
    scenario = ShockScenario(
        crisis_months=scen["crisis_months"],
        job_loss_wage_mass_share=scen["job_loss_wage_mass_share"],
        job_loss_count_target=scen["job_loss_count_target"],
        informal_decline=scen["informal_decline"],
        seed=scen["seed"],
    )
    measures = MeasureConfig(
        retention_enabled=meas["retention_enabled"],
        subsidy_per_worker=meas["subsidy_per_worker"],
        subsidy_months=meas["subsidy_months"],
        wage_cap_enabled=meas["wage_cap_enabled"],
        wage_cap=meas["wage_cap"],
        gmi_relax_enabled=meas["gmi_relax_enabled"],
        one_off_enabled=meas["one_off_enabled"],
        one_off_amounts=one_off,
        low_pay_threshold=meas["low_pay_threshold"],
    )
    _validate(policy, scenario, measures)
    return RunConfig(
        policy=policy,
        scenario=scenario,
        measures=measures,
        bounds_durations=durations,
        reweight_targets=_parse_reweight(raw),
    )


def _parse_override_value(text: str):
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """Apply key=value pairs onto the raw config mapping.

    Keys are dotted paths (scenario.crisis_months=3).  Unknown paths are
    configuration errors.
    """
    for item in overrides:
        if "=" not in item:
            raise ConfigError(
                f"override must look like section.key=value, got {item!r}",
                module="cli", op="apply_overrides", record=item,
            )
        path, value = item.split("=", 1)
        parts = path.strip().split(".")
        schema_parts = parts
        if len(parts) == 3 and parts[0] == "measures" and parts[1] == "one_off_amounts":
            schema_parts = ["one_off_amounts", parts[2]]
        if len(schema_parts) != 2 or schema_parts[0] not in _SCHEMA:
            raise ConfigError(
                f"unknown override key {path!r}", module="cli", op="apply_overrides", record=path
            )
        section, key = schema_parts
        if key not in _SCHEMA[section]:
            raise ConfigError(
                f"unknown override key {path!r}", module="cli", op="apply_overrides", record=path
            )
        node = raw
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = _parse_override_value(value.strip())
    return raw


def load_config(path: str | Path, overrides: list[str] | None = None) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", module="cli", op="load_config") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config does not parse: {exc}", module="cli", op="load_config") from None
    if overrides:
        raw = apply_overrides(raw, overrides)
    return _build(raw)


def config_from_dict(raw: dict) -> RunConfig:
    """Build a RunConfig from an in-memory mapping (tests, tooling)."""
    return _build(raw)
