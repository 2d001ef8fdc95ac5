import pytest

from riskrank.errors import ValidationError
from riskrank.months import add_months, format_month, parse_month


def test_round_trip():
    for text in ["1999-01", "2000-12", "2026-08"]:
        assert format_month(parse_month(text)) == text


def test_ordering_is_calendar_order():
    assert parse_month("2000-12") + 1 == parse_month("2001-01")
    assert parse_month("2010-06") - parse_month("2009-06") == 12


def test_add_months():
    assert add_months("2000-01", 0) == "2000-01"
    assert add_months("2000-01", 59) == "2004-12"
    assert add_months("2004-12", -59) == "2000-01"


@pytest.mark.parametrize(
    "bad", ["2000-13", "2000-00", "2000/01", "200-01", "2000-1", "", "abcd-ef", "3000-01"]
)
def test_rejects_malformed(bad):
    with pytest.raises(ValidationError):
        parse_month(bad)
