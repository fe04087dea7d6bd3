from datetime import datetime, timezone
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rsp.cells import format_cell, is_canonical, parse_cell


@pytest.mark.parametrize(
    "data_type, text, value",
    [
        ("int", "0", 0),
        ("int", "-17", -17),
        ("int", "2147483647", 2**31 - 1),
        ("long", "-9223372036854775808", -(2**63)),
        ("decimal", "12.50", Decimal("12.50")),
        ("decimal", "-0.5", Decimal("-0.5")),
        ("boolean", "true", True),
        ("boolean", "false", False),
        ("varchar", "", ""),
        ("text", " x ", " x "),
        ("datetime", "2021-11-30T12:00:00Z", datetime(2021, 11, 30, 12, tzinfo=timezone.utc)),
    ],
)
def test_parse_accepts_canonical_forms(data_type, text, value):
    assert parse_cell(data_type, text) == value


@pytest.mark.parametrize(
    "data_type, text",
    [
        ("int", "007"),
        ("int", "-0"),
        ("int", "+1"),
        ("int", "1.0"),
        ("int", "2147483648"),
        ("long", "9223372036854775808"),
        ("decimal", "1."),
        ("decimal", ".5"),
        ("decimal", "1e3"),
        ("boolean", "True"),
        ("boolean", "1"),
        ("datetime", "2021-11-30 12:00:00"),
        ("datetime", "2021-02-30T00:00:00Z"),
        ("datetime", "2021-11-30T12:00:00+01:00"),
        ("money", "1"),
    ],
)
def test_parse_rejects_non_canonical(data_type, text):
    assert not is_canonical(data_type, text)
    with pytest.raises(ValueError):
        parse_cell(data_type, text)


@given(st.integers(-(2**31), 2**31 - 1))
def test_int_format_roundtrip(n):
    assert parse_cell("int", format_cell("int", n)) == n


@given(st.decimals(allow_nan=False, allow_infinity=False, places=3, min_value=-10**6, max_value=10**6))
def test_decimal_format_is_canonical(d):
    text = format_cell("decimal", d)
    assert is_canonical("decimal", text)
    assert parse_cell("decimal", text) == d


@given(st.datetimes(min_value=datetime(1000, 1, 1), max_value=datetime(9999, 1, 1)).map(lambda d: d.replace(microsecond=0, tzinfo=timezone.utc)))
def test_datetime_format_roundtrip(d):
    assert parse_cell("datetime", format_cell("datetime", d)) == d
