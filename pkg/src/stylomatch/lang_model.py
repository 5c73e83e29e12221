"""Tokenization and Witten-Bell smoothed unigram models."""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

URL_TOKEN = "<url>"
_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_KEEP_PREFIX = frozenset("#@")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip(token: str) -> str:
    end = len(token)
    while end and _is_punct(token[end - 1]):
        end -= 1
    start = 0
    while start < end and token[start] not in _KEEP_PREFIX and _is_punct(token[start]):
        start += 1
    return token[start:end]


def tokenize(text: str) -> list[str]:
    """Split post text into normalized tokens.

    Case-folds, replaces URLs with ``<url>``, splits on whitespace and strips
    surrounding punctuation while keeping ``#`` and ``@`` prefixes.

    >>> tokenize("@Bob #Fun!!")
    ['@bob', '#fun']
    """
    text = _URL_RE.sub(f" {URL_TOKEN} ", text.casefold())
    tokens = []
    for raw in text.split():
        tok = raw if raw == URL_TOKEN else _strip(raw)
        if tok:
            tokens.append(tok)
    return tokens


@dataclass(frozen=True)
class UnigramModel:
    """Word counts over a declared vocabulary.

    ``N`` is the number of observed tokens, ``T`` the number of observed
    types and ``Z`` the number of vocabulary words never observed.
    """

    counts: Mapping[str, int]
    vocabulary: frozenset[str]
    N: int = field(init=False)
    T: int = field(init=False)
    Z: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "N", sum(self.counts.values()))
        object.__setattr__(self, "T", sum(1 for c in self.counts.values() if c > 0))
        object.__setattr__(self, "Z", len(self.vocabulary) - self.T)


def build_unigram(tokens: Iterable[str], vocabulary: Iterable[str]) -> UnigramModel:
    vocab = frozenset(vocabulary)
    counts = Counter(tokens)
    outside = sorted(set(counts) - vocab)
    if outside:
        raise ValueError(f"tokens outside vocabulary: {outside[:5]}")
    return UnigramModel(dict(counts), vocab)


def wb_prob(model: UnigramModel, word: str) -> float:
    """Witten-Bell probability of ``word``.

    Falls back to the maximum likelihood estimate when every vocabulary word
    has been observed (``Z == 0``), since no mass needs reserving.
    """
    if word not in model.vocabulary:
        raise KeyError(f"{word!r} not in vocabulary")
    if model.N == 0:
        raise ValueError("cannot smooth an empty model (N = 0)")
    c = model.counts.get(word, 0)
    if model.Z == 0:
        return c / model.N
    if c > 0:
        return c / (model.N + model.T)
    return model.T / (model.Z * (model.N + model.T))


def distribution(model: UnigramModel, order: Iterable[str] | None = None) -> list[float]:
    """Smoothed probabilities in ``order`` (sorted vocabulary by default)."""
    words = sorted(model.vocabulary) if order is None else order
    return [wb_prob(model, w) for w in words]


def _check_shared(p: UnigramModel, q: UnigramModel, vocabulary=None) -> list[str]:
    if p.vocabulary != q.vocabulary:
        raise ValueError("models are built over different vocabularies")
    if vocabulary is not None and frozenset(vocabulary) != p.vocabulary:
        raise ValueError("vocabulary does not match the models' vocabulary")
    return sorted(p.vocabulary)


def cross_entropy(p: UnigramModel, q: UnigramModel, vocabulary=None) -> float:
    """H(p, q) in bits, summed in sorted vocabulary order."""
    words = _check_shared(p, q, vocabulary)
    return -math.fsum(wb_prob(p, w) * math.log2(wb_prob(q, w)) for w in words)


def kl_divergence(p: UnigramModel, q: UnigramModel) -> float:
    """KL(p || q) in nats."""
    words = _check_shared(p, q)
    total = 0.0
    for w in words:
        pw, qw = wb_prob(p, w), wb_prob(q, w)
        total += pw * math.log(pw / qw)
    return total


def pair_models(tokens_a: Iterable[str], tokens_b: Iterable[str]) -> tuple[UnigramModel, UnigramModel]:
    """Build both models over the union of the two streams' observed types."""
    tokens_a, tokens_b = list(tokens_a), list(tokens_b)
    vocab = frozenset(tokens_a) | frozenset(tokens_b)
    return build_unigram(tokens_a, vocab), build_unigram(tokens_b, vocab)
