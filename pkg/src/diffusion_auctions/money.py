"""Exact money arithmetic.

All bids and payments are exact rationals (``fractions.Fraction``), parsed
from decimal strings.  Comparisons between prices are therefore exact and
tie-breaking is deterministic, never a float artifact.
"""

from __future__ import annotations

from fractions import Fraction

Money = Fraction

ZERO = Fraction(0)


class MoneyError(ValueError):
    pass


def parse_money(text: str | int | Fraction) -> Money:
    """Parse a non-negative decimal string (or int) into an exact rational."""
    if isinstance(text, Fraction):
        value = text
    elif isinstance(text, int):
        value = Fraction(text)
    elif isinstance(text, str):
        try:
            value = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise MoneyError(f"not a valid money amount: {text!r}") from exc
    else:
        raise MoneyError(f"not a valid money amount: {text!r}")
    if value < 0:
        raise MoneyError(f"money amount must be non-negative: {text!r}")
    return value


def format_money(value: Fraction) -> str:
    """Render an exact rational as a decimal string when one exists.

    Values whose denominator is of the form 2^a * 5^b have a terminating
    decimal expansion and are rendered exactly; anything else falls back to
    the ``p/q`` form so no precision is silently lost.
    """
    num, den = value.numerator, value.denominator
    if den == 1:
        return str(num)
    twos = fives = 0
    d = den
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{num}/{den}"
    digits = max(twos, fives)
    scaled = num * 10**digits // den
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    whole, frac = text[:-digits], text[-digits:]
    frac = frac.rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"
