from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from diffusion_auctions import Money, format_money, parse_money
from diffusion_auctions.money import MoneyError


def test_parse_integers_and_decimals():
    assert parse_money(5) == 5
    assert parse_money("5") == 5
    assert parse_money("0.25") == Fraction(1, 4)
    assert parse_money("12.5") == Fraction(25, 2)


def test_parse_fraction_passthrough():
    assert parse_money(Fraction(7, 3)) == Fraction(7, 3)


def test_negative_rejected():
    with pytest.raises(MoneyError):
        parse_money("-1")
    with pytest.raises(MoneyError):
        parse_money(Fraction(-1, 2))


def test_garbage_rejected():
    with pytest.raises(MoneyError):
        parse_money("five")


def test_format_exact_decimal():
    assert format_money(Fraction(25, 2)) == "12.5"
    assert format_money(Fraction(10)) == "10"
    assert format_money(Fraction(1, 4)) == "0.25"


def test_format_nondecimal_falls_back_to_ratio():
    # 1/3 has no finite decimal expansion; emit it exactly
    assert format_money(Fraction(1, 3)) == "1/3"


@given(
    num=st.integers(min_value=0, max_value=10**12),
    den=st.integers(min_value=1, max_value=10**6),
)
def test_roundtrip(num, den):
    m: Money = Fraction(num, den)
    assert parse_money(format_money(m)) == m
