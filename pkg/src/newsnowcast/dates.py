"""Calendar helpers: month/quarter periods and their arithmetic.

Periods are plain strings in canonical form ("2019-03-15" daily,
"2019-03" monthly, "2019Q1" quarterly) so they sort lexicographically,
round-trip through CSV unchanged, and need no third-party time types.
"""

from __future__ import annotations

import calendar
import datetime as dt
import re

DAILY = "daily"
MONTHLY = "monthly"
QUARTERLY = "quarterly"

_QUARTER_RE = re.compile(r"^(\d{4})Q([1-4])$")
_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


def parse_date(s: str) -> dt.date:
    return dt.date.fromisoformat(s)


def month_of(date: dt.date) -> str:
    return f"{date.year:04d}-{date.month:02d}"


def quarter_of(date: dt.date) -> str:
    return f"{date.year:04d}Q{(date.month - 1) // 3 + 1}"


def month_index(period: str) -> int:
    """Serial month number (year*12 + month-1) for regularity checks."""
    m = _MONTH_RE.match(period)
    if not m or not 1 <= int(m.group(2)) <= 12:
        raise ValueError(f"not a monthly period: {period!r}")
    return int(m.group(1)) * 12 + int(m.group(2)) - 1


def quarter_index(period: str) -> int:
    m = _QUARTER_RE.match(period)
    if not m:
        raise ValueError(f"not a quarterly period: {period!r}")
    return int(m.group(1)) * 4 + int(m.group(2)) - 1


def month_from_index(idx: int) -> str:
    return f"{idx // 12:04d}-{idx % 12 + 1:02d}"


def quarter_from_index(idx: int) -> str:
    return f"{idx // 4:04d}Q{idx % 4 + 1}"


def shift_month(period: str, k: int) -> str:
    return month_from_index(month_index(period) + k)


def shift_quarter(period: str, k: int) -> str:
    return quarter_from_index(quarter_index(period) + k)


def month_end(period: str) -> dt.date:
    m = _MONTH_RE.match(period)
    if not m:
        raise ValueError(f"not a monthly period: {period!r}")
    year, month = int(m.group(1)), int(m.group(2))
    return dt.date(year, month, calendar.monthrange(year, month)[1])


def month_start(period: str) -> dt.date:
    m = _MONTH_RE.match(period)
    if not m:
        raise ValueError(f"not a monthly period: {period!r}")
    return dt.date(int(m.group(1)), int(m.group(2)), 1)


def quarter_end(period: str) -> dt.date:
    m = _QUARTER_RE.match(period)
    if not m:
        raise ValueError(f"not a quarterly period: {period!r}")
    year, q = int(m.group(1)), int(m.group(2))
    month = 3 * q
    return dt.date(year, month, calendar.monthrange(year, month)[1])


def quarter_start(period: str) -> dt.date:
    m = _QUARTER_RE.match(period)
    if not m:
        raise ValueError(f"not a quarterly period: {period!r}")
    return dt.date(int(m.group(1)), 3 * int(m.group(2)) - 2, 1)


def period_end(period: str, frequency: str) -> dt.date:
    if frequency == DAILY:
        return parse_date(period)
    if frequency == MONTHLY:
        return month_end(period)
    if frequency == QUARTERLY:
        return quarter_end(period)
    raise ValueError(f"unknown frequency {frequency!r}")


def period_start(period: str, frequency: str) -> dt.date:
    if frequency == DAILY:
        return parse_date(period)
    if frequency == MONTHLY:
        return month_start(period)
    if frequency == QUARTERLY:
        return quarter_start(period)
    raise ValueError(f"unknown frequency {frequency!r}")


def period_index(period: str, frequency: str) -> int:
    """Serial index within a frequency; consecutive periods differ by 1."""
    if frequency == DAILY:
        return parse_date(period).toordinal()
    if frequency == MONTHLY:
        return month_index(period)
    if frequency == QUARTERLY:
        return quarter_index(period)
    raise ValueError(f"unknown frequency {frequency!r}")


def months_of_quarter(period: str) -> list[str]:
    m = _QUARTER_RE.match(period)
    if not m:
        raise ValueError(f"not a quarterly period: {period!r}")
    year, q = int(m.group(1)), int(m.group(2))
    return [f"{year:04d}-{3 * (q - 1) + i:02d}" for i in (1, 2, 3)]


def quarter_of_month(period: str) -> str:
    idx = month_index(period)
    return quarter_from_index(idx // 3)


def quarter_range(first: str, last: str) -> list[str]:
    a, b = quarter_index(first), quarter_index(last)
    if a > b:
        raise ValueError(f"quarter range reversed: {first} > {last}")
    return [quarter_from_index(i) for i in range(a, b + 1)]
