"""Seeded synthetic paired-account corpora.

Each user gets a word signature drawn from a Dirichlet centred on a shared
Zipfian background. Each of the user's two accounts emits words from a mix
of that signature and a platform-specific topic blend, and posts at times
drawn from habits (weekday, hour) the user keeps on both platforms.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .corpus import GroundTruthPair, Platform, Post, format_ground_truth, format_post, parse_timestamp

_ONSETS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
_SYLLABLES = [c + v for c in _ONSETS for v in _VOWELS]
_OFFSETS_H = (-8, -7, -6, -5, -4, -3, 0, 1, 2, 3, 5, 8, 9)


@dataclass(frozen=True)
class GeneratorSpec:
    """Knobs of the synthetic corpus.

    ``signature_concentration`` is the total Dirichlet mass around the
    background distribution: large values make users alike (``inf`` makes
    them identical). ``topic_shift`` is the weight each account puts on its
    platform topics instead of the user's signature. Lower
    ``temporal_concentration`` means sharper posting habits.
    """

    seed: int
    user_count: int = 200
    vocabulary_size: int = 2000
    signature_concentration: float = 300.0
    topic_shift: float = 0.4
    topic_count: int = 20
    topic_concentration: float = 0.05
    posts_min: int = 20
    posts_max: int = 80
    tokens_per_post: float = 30.0
    temporal_concentration: float = 2.0
    zipf_exponent: float = 1.0
    window_start: str = "2014-02-01T00:00:00+00:00"
    window_end: str = "2015-02-01T00:00:00+00:00"

    def validate(self) -> None:
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.vocabulary_size < 10:
            raise ValueError(f"vocabulary_size {self.vocabulary_size} too small (need >= 10)")
        for name in ("user_count", "topic_count", "posts_min"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.posts_max < self.posts_min:
            raise ValueError("posts_max must be >= posts_min")
        for name in ("signature_concentration", "topic_concentration", "temporal_concentration",
                     "tokens_per_post", "zipf_exponent"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not 0.0 <= self.topic_shift <= 1.0:
            raise ValueError("topic_shift must lie in [0, 1]")
        start, end = parse_timestamp(self.window_start), parse_timestamp(self.window_end)
        if (end - start) < timedelta(days=14):
            raise ValueError("window must span at least two weeks")

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        if "seed" not in d or d["seed"] is None:
            raise ValueError("generator spec needs an explicit seed")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown generator spec field(s): {unknown}")
        return cls(**d)


def pseudo_word(i: int) -> str:
    """Deterministic pronounceable word for vocabulary index ``i``."""
    n = len(_SYLLABLES)
    parts = [_SYLLABLES[i % n]]
    i //= n
    parts.append(_SYLLABLES[i % n])
    i //= n
    while i:
        parts.append(_SYLLABLES[i % n])
        i //= n
    return "".join(parts)


def _dirichlet(rng, alpha):
    # normalized gammas; tiny alphas can underflow every draw to zero
    g = rng.gamma(alpha)
    total = g.sum()
    if total == 0:
        g = np.zeros_like(alpha)
        g[np.argmax(alpha)] = 1.0
        return g
    return g / total


def _local_dates(start: datetime, end: datetime) -> list[date]:
    # keep a one-day margin so any local offset stays inside the window
    first = start.astimezone(timezone.utc).date() + timedelta(days=1)
    last = end.astimezone(timezone.utc).date() - timedelta(days=2)
    return [first + timedelta(days=d) for d in range((last - first).days + 1)]


def generate(spec: GeneratorSpec) -> tuple[str, str]:
    """Return ``(posts_jsonl, ground_truth_csv)`` file contents."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    v = spec.vocabulary_size
    words = [pseudo_word(i) for i in range(v)]
    background = 1.0 / np.arange(1, v + 1) ** spec.zipf_exponent
    background /= background.sum()

    topics = {
        plat: np.vstack([_dirichlet(rng, np.full(v, spec.topic_concentration)) for _ in range(spec.topic_count)])
        for plat in (Platform.A, Platform.B)
    }
    dates = _local_dates(parse_timestamp(spec.window_start), parse_timestamp(spec.window_end))
    by_weekday = [[d for d in dates if d.weekday() == wd] for wd in range(7)]

    used_ids: set[str] = set()

    def new_id(prefix):
        while True:
            ident = prefix + "".join(rng.choice(list("0123456789abcdef"), size=10))
            if ident not in used_ids:
                used_ids.add(ident)
                return ident

    pairs: list[GroundTruthPair] = []
    lines: list[str] = []
    width = len(str(spec.user_count))
    for u in range(spec.user_count):
        if math.isinf(spec.signature_concentration):
            signature = background.copy()
        else:
            signature = _dirichlet(rng, spec.signature_concentration * background)
        hour_habit = _dirichlet(rng, np.full(24, spec.temporal_concentration))
        weekday_habit = _dirichlet(rng, np.full(7, spec.temporal_concentration))
        tz = timezone(timedelta(hours=int(rng.choice(_OFFSETS_H))))
        ids = {Platform.A: new_id("a"), Platform.B: new_id("b")}
        pairs.append(GroundTruthPair(f"u{u:0{width}d}", ids[Platform.A], ids[Platform.B]))
        for plat in (Platform.A, Platform.B):
            mix = _dirichlet(rng, np.full(spec.topic_count, 0.5))
            emission = (1.0 - spec.topic_shift) * signature + spec.topic_shift * (mix @ topics[plat])
            emission /= emission.sum()
            n_posts = int(rng.integers(spec.posts_min, spec.posts_max + 1))
            lengths = 1 + rng.poisson(spec.tokens_per_post - 1, size=n_posts)
            tokens = rng.choice(v, size=int(lengths.sum()), p=emission)
            weekdays = rng.choice(7, size=n_posts, p=weekday_habit)
            hours = rng.choice(24, size=n_posts, p=hour_habit)
            seconds = rng.integers(0, 3600, size=n_posts)
            posts = []
            pos = 0
            for i in range(n_posts):
                pool = by_weekday[weekdays[i]]
                day = pool[int(rng.integers(len(pool)))]
                ts = datetime(day.year, day.month, day.day, int(hours[i]), int(seconds[i]) // 60,
                              int(seconds[i]) % 60, tzinfo=tz)
                text = " ".join(words[t] for t in tokens[pos:pos + lengths[i]])
                pos += lengths[i]
                posts.append(Post(ids[plat], plat, ts, text))
            posts.sort(key=lambda p: p.timestamp)
            lines.extend(format_post(p) for p in posts)
    return "\n".join(lines) + "\n", format_ground_truth(pairs)


def write_synthetic(spec: GeneratorSpec, out_dir) -> tuple[Path, Path]:
    posts, truth = generate(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    posts_path, truth_path = out / "posts.jsonl", out / "ground_truth.csv"
    posts_path.write_text(posts, encoding="utf-8", newline="\n")
    truth_path.write_text(truth, encoding="utf-8", newline="\n")
    return posts_path, truth_path
