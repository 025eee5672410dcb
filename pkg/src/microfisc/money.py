"""Fixed-point money arithmetic.

All monetary values are integers holding hundredths of a denar (MKD).  Every
multiplication by a rate or scale factor quantizes back onto that grid with
half-up rounding, so household income identities hold exactly and repeated
runs are bit-identical.  Amounts are non-negative throughout the model;
signed values only appear in report-level differences.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation, ROUND_HALF_UP
from fractions import Fraction

Money = int  # hundredths of MKD

_CENT = Decimal("0.01")


def money(value: str | int | float | Decimal) -> Money:
    """Parse an MKD amount into hundredths, rounding half-up beyond 2 decimals."""
    if isinstance(value, int):
        return value * 100
    try:
        d = value if isinstance(value, Decimal) else Decimal(str(value))
    except InvalidOperation as exc:
        raise ValueError(f"not a monetary amount: {value!r}") from exc
    return int(d.quantize(_CENT, rounding=ROUND_HALF_UP) * 100)


def rate(value: str | float | Decimal) -> Fraction:
    """Parse a decimal rate (e.g. 0.28) into an exact fraction."""
    try:
        return Fraction(Decimal(str(value)))
    except InvalidOperation as exc:
        raise ValueError(f"not a rate: {value!r}") from exc


def scale(amount: Money, factor: Fraction) -> Money:
    """amount * factor, rounded half-up onto the hundredths grid.

    Requires amount >= 0 and factor >= 0.
    """
    num = amount * factor.numerator
    den = factor.denominator
    return (2 * num + den) // (2 * den)


def div_half_up(amount: Money, divisor: int) -> Money:
    """amount / divisor, rounded half-up.  Requires amount >= 0, divisor > 0."""
    return (2 * amount + divisor) // (2 * divisor)


def mkd_str(amount: Money) -> str:
    """Format hundredths as a plain decimal string with 2 fractional digits."""
    sign = "-" if amount < 0 else ""
    amount = abs(amount)
    return f"{sign}{amount // 100}.{amount % 100:02d}"


def to_eur_str(amount_mkd: Money, eur_mkd: Fraction) -> str:
    """Convert MKD hundredths to EUR and format with 2 decimals, half-up."""
    eur = Decimal(amount_mkd) / (Decimal(eur_mkd.numerator) / Decimal(eur_mkd.denominator))
    return str((eur / 100).quantize(_CENT, rounding=ROUND_HALF_UP))
