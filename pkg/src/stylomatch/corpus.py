"""Post ingestion, filtering and per-account corpora."""

from __future__ import annotations

import csv
import enum
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lang_model import tokenize
from .temporal import featurize_timestamp


class Platform(str, enum.Enum):
    A = "A"
    B = "B"

    def other(self) -> "Platform":
        return Platform.B if self is Platform.A else Platform.A


@dataclass(frozen=True)
class Post:
    account_id: str
    platform: Platform
    timestamp: datetime
    text: str


@dataclass(frozen=True)
class Rejection:
    line_number: int
    reason: str


@dataclass
class ParseResult:
    posts: list[Post]
    rejections: list[Rejection]


@dataclass(frozen=True)
class AccountCorpus:
    """All analysis-window posts of one account, with derived streams."""

    account_id: str
    platform: Platform
    posts: tuple[Post, ...]
    token_stream: tuple[str, ...] = field(repr=False)
    temporal_stream: tuple[str, ...] = field(repr=False)

    @property
    def key(self) -> tuple[str, str]:
        return (self.platform.value, self.account_id)

    @classmethod
    def from_posts(cls, account_id: str, platform: Platform, posts: Sequence[Post]) -> "AccountCorpus":
        tokens: list[str] = []
        times: list[str] = []
        for post in posts:
            tokens.extend(tokenize(post.text))
            times.extend(featurize_timestamp(post.timestamp))
        return cls(account_id, Platform(platform), tuple(posts), tuple(tokens), tuple(times))


@dataclass(frozen=True)
class GroundTruthPair:
    user_id: str
    account_id_A: str
    account_id_B: str


class GroundTruthError(ValueError):
    pass


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp that carries an explicit UTC offset."""
    if not isinstance(value, str):
        raise ValueError("timestamp must be a string")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.utcoffset() is None:
        raise ValueError(f"timestamp {value!r} has no UTC offset")
    return ts


_FIELDS = ("account_id", "platform", "timestamp", "text")


def parse_posts(lines: Iterable[str]) -> ParseResult:
    """Parse JSON-lines post records, collecting bad lines as rejections."""
    posts, rejections = [], []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            if not isinstance(record, dict):
                raise ValueError("record is not an object")
            missing = [f for f in _FIELDS if f not in record]
            if missing:
                raise ValueError(f"missing field(s): {', '.join(missing)}")
            if not isinstance(record["account_id"], str) or not record["account_id"]:
                raise ValueError("account_id must be a non-empty string")
            if not isinstance(record["text"], str):
                raise ValueError("text must be a string")
            platform = Platform(record["platform"])
            ts = parse_timestamp(record["timestamp"])
        except (ValueError, TypeError) as exc:
            rejections.append(Rejection(lineno, str(exc)))
            continue
        posts.append(Post(record["account_id"], platform, ts, record["text"]))
    return ParseResult(posts, rejections)


def read_posts(path) -> ParseResult:
    with open(path, encoding="utf-8") as fh:
        return parse_posts(fh)


def build_accounts(
    posts: Iterable[Post],
    window: tuple[datetime, datetime] | None = None,
    min_posts: int = 20,
) -> list[AccountCorpus]:
    """Group posts by account, keep the window, drop sparse accounts.

    The window is half-open ``[start, end)`` and is applied before the
    ``min_posts`` threshold.
    """
    if min_posts < 1:
        raise ValueError("min_posts must be >= 1")
    if window is not None:
        start, end = window
        if not start < end:
            raise ValueError("window start must precede window end")
    grouped: dict[tuple[Platform, str], list[Post]] = defaultdict(list)
    for post in posts:
        if window is not None and not (start <= post.timestamp < end):
            continue
        grouped[(post.platform, post.account_id)].append(post)
    accounts = [
        AccountCorpus.from_posts(account_id, platform, plist)
        for (platform, account_id), plist in grouped.items()
        if len(plist) >= min_posts
    ]
    accounts.sort(key=lambda a: (a.platform.value, a.account_id))
    return accounts


def parse_ground_truth(lines: Iterable[str]) -> list[GroundTruthPair]:
    reader = csv.DictReader(lines)
    required = {"user_id", "account_id_A", "account_id_B"}
    if reader.fieldnames is None or not required <= set(reader.fieldnames):
        raise GroundTruthError(
            f"ground truth header must contain {sorted(required)}, got {reader.fieldnames}"
        )
    pairs: list[GroundTruthPair] = []
    seen_a: dict[str, int] = {}
    seen_b: dict[str, int] = {}
    for rowno, row in enumerate(reader, start=2):
        pair = GroundTruthPair(row["user_id"], row["account_id_A"], row["account_id_B"])
        if not pair.account_id_A or not pair.account_id_B:
            raise GroundTruthError(f"row {rowno}: empty account id")
        for seen, acc, side in ((seen_a, pair.account_id_A, "A"), (seen_b, pair.account_id_B, "B")):
            if acc in seen:
                raise GroundTruthError(
                    f"duplicate platform-{side} account id {acc!r} (rows {seen[acc]} and {rowno})"
                )
            seen[acc] = rowno
        pairs.append(pair)
    return pairs


def load_ground_truth(path) -> list[GroundTruthPair]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_ground_truth(fh)


@dataclass
class PlatformStats:
    accounts: int
    mean: float
    median: float
    maximum: int
    minimum: int
    histogram: list[int]
    bin_edges: list[float]

    def to_dict(self) -> dict:
        return {
            "accounts": self.accounts,
            "mean": self.mean,
            "median": self.median,
            "maximum": self.maximum,
            "minimum": self.minimum,
            "histogram": self.histogram,
            "bin_edges": self.bin_edges,
        }


@dataclass
class CorpusStats:
    platforms: dict[str, PlatformStats]
    total_posts: int

    def to_dict(self) -> dict:
        return {
            "total_posts": self.total_posts,
            "platforms": {k: v.to_dict() for k, v in sorted(self.platforms.items())},
        }


def corpus_stats(accounts: Sequence[AccountCorpus], bins: int = 500) -> CorpusStats:
    """Table-1 style order statistics and an equal-width histogram per platform."""
    if not accounts:
        raise ValueError("corpus_stats needs at least one account")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    by_platform: dict[str, list[int]] = defaultdict(list)
    for acc in accounts:
        by_platform[acc.platform.value].append(len(acc.posts))
    platforms = {}
    for name, counts in by_platform.items():
        arr = np.sort(np.asarray(counts, dtype=np.int64))
        hist, edges = np.histogram(arr, bins=bins, range=(arr[0], arr[-1]))
        platforms[name] = PlatformStats(
            accounts=int(arr.size),
            mean=float(arr.mean()),
            median=float(np.median(arr)),
            maximum=int(arr[-1]),
            minimum=int(arr[0]),
            histogram=[int(h) for h in hist],
            bin_edges=[float(e) for e in edges],
        )
    return CorpusStats(platforms, sum(len(a.posts) for a in accounts))


def format_post(post: Post) -> str:
    """Serialize one post as a JSON line (no trailing newline)."""
    return json.dumps(
        {
            "account_id": post.account_id,
            "platform": post.platform.value,
            "timestamp": post.timestamp.isoformat(),
            "text": post.text,
        },
        ensure_ascii=False,
    )


def format_ground_truth(pairs: Iterable[GroundTruthPair]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["user_id", "account_id_A", "account_id_B"])
    for p in pairs:
        writer.writerow([p.user_id, p.account_id_A, p.account_id_B])
    return buf.getvalue()


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")
