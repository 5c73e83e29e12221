"""Temporal words: a post timestamp rendered as four vocabulary items.

Index layout: month w1-w12, day of month w13-w43, day of week w44-w50
(Monday first), hour w51-w74 (midnight first). Bins use the timestamp's own
local fields, i.e. after its UTC offset is applied.
"""

from __future__ import annotations

import re
from datetime import datetime

MONTH_BASE = 0
DAY_BASE = 12
WEEKDAY_BASE = 43
HOUR_BASE = 50
TEMPORAL_SIZE = 74

TEMPORAL_VOCABULARY = frozenset(f"w{i}" for i in range(1, TEMPORAL_SIZE + 1))
_TEMPORAL_RE = re.compile(r"w([1-9]|[1-6][0-9]|7[0-4])")


def temporal_word(index: int) -> str:
    if not 1 <= index <= TEMPORAL_SIZE:
        raise ValueError(f"temporal word index {index} outside [1, {TEMPORAL_SIZE}]")
    return f"w{index}"


def is_temporal_word(token: str) -> bool:
    return _TEMPORAL_RE.fullmatch(token) is not None


def featurize_timestamp(t: datetime) -> tuple[str, str, str, str]:
    """Return the (month, day, weekday, hour) temporal words for ``t``.

    >>> from datetime import datetime
    >>> featurize_timestamp(datetime(2016, 8, 5, 2))
    ('w8', 'w17', 'w48', 'w53')
    """
    return (
        f"w{MONTH_BASE + t.month}",
        f"w{DAY_BASE + t.day}",
        f"w{WEEKDAY_BASE + t.isoweekday()}",
        f"w{HOUR_BASE + t.hour + 1}",
    )


def temporal_stream(account) -> list[str]:
    """Concatenate the temporal words of every post of ``account``."""
    stream: list[str] = []
    for post in account.posts:
        stream.extend(featurize_timestamp(post.timestamp))
    return stream
