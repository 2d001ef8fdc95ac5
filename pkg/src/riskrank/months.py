"""Calendar month arithmetic.

Months are handled as "YYYY-MM" strings at the API surface and as flat
integer indices (year * 12 + month - 1) internally, so that window math
is plain integer arithmetic.
"""

from __future__ import annotations

import re

from .errors import ValidationError

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")

MIN_YEAR = 1980
MAX_YEAR = 2100


def parse_month(text: str) -> int:
    """Parse "YYYY-MM" into a flat month index."""
    m = _MONTH_RE.match(text)
    if not m:
        raise ValidationError(f"bad month {text!r}: expected YYYY-MM")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise ValidationError(f"bad month {text!r}: month must be 01-12")
    if not MIN_YEAR <= year <= MAX_YEAR:
        raise ValidationError(
            f"bad month {text!r}: year must be in [{MIN_YEAR}, {MAX_YEAR}]"
        )
    return year * 12 + month - 1


def format_month(index: int) -> str:
    """Format a flat month index back to "YYYY-MM"."""
    year, month = divmod(index, 12)
    return f"{year:04d}-{month + 1:02d}"


def add_months(text: str, offset: int) -> str:
    return format_month(parse_month(text) + offset)
