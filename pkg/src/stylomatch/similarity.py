"""Account similarity measures over linguistic, temporal and combined streams.

Two layers live here. The model-level functions (``kl2``, ``pp2``,
``cosine``, ``confusion_similarity``) work on single pairs and are the
readable reference. ``MeasureScorer`` precomputes per-corpus structures and
scores whole query-by-candidate blocks, using the compiled kernels for the
pairwise smoothed measures.
"""

from __future__ import annotations

import enum
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from . import kernels
from .lang_model import UnigramModel, cross_entropy, kl_divergence
from .temporal import TEMPORAL_VOCABULARY

MEASURES = ("kl2", "pp2", "tfidf", "confusion")
MODES = ("linguistic", "temporal", "combined")

DEFAULT_ALPHA = 1.0
DEFAULT_BETA = 0.5


class Polarity(str, enum.Enum):
    HIGHER_IS_SIMILAR = "higher_is_similar"
    LOWER_IS_SIMILAR = "lower_is_similar"


POLARITY = {
    "kl2": Polarity.LOWER_IS_SIMILAR,
    "pp2": Polarity.LOWER_IS_SIMILAR,
    "tfidf": Polarity.HIGHER_IS_SIMILAR,
    "confusion": Polarity.HIGHER_IS_SIMILAR,
}


@dataclass(frozen=True)
class ScoredPair:
    query_account_id: str
    candidate_account_id: str
    score: float
    polarity: Polarity


# --- streams -----------------------------------------------------------------

_COLLIDES = re.compile(r"\\*w([1-9]|[1-6][0-9]|7[0-4])")


def escape_linguistic(token: str) -> str:
    """Prefix a backslash to tokens that could be read as temporal words.

    Already-escaped forms gain another backslash, which keeps the mapping
    injective.
    """
    if _COLLIDES.fullmatch(token):
        return "\\" + token
    return token


def merge_combined(account) -> list[str]:
    """Linguistic tokens (escaped) followed by the account's temporal words."""
    return [escape_linguistic(t) for t in account.token_stream] + list(account.temporal_stream)


def combined_vocabulary(linguistic_vocabulary: Iterable[str]) -> frozenset[str]:
    return frozenset(escape_linguistic(w) for w in linguistic_vocabulary) | TEMPORAL_VOCABULARY


def stream_for(account, mode: str) -> list[str]:
    if mode == "linguistic":
        return list(account.token_stream)
    if mode == "temporal":
        return list(account.temporal_stream)
    if mode == "combined":
        return merge_combined(account)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


# --- pairwise smoothed measures ---------------------------------------------


def kl2(p: UnigramModel, q: UnigramModel) -> float:
    """Symmetric KL divergence in nats; both models share one vocabulary."""
    return kl_divergence(p, q) + kl_divergence(q, p)


def pp2(p: UnigramModel, q: UnigramModel) -> float:
    return 2.0 ** cross_entropy(p, q) + 2.0 ** cross_entropy(q, p)


# --- TF-IDF ---------------------------------------------------------------------


@dataclass(frozen=True)
class TfidfVector:
    weights: Mapping[str, float]
    n_documents: int
    document_frequency: Mapping[str, int]

    @property
    def norm(self) -> float:
        return math.sqrt(math.fsum(w * w for w in self.weights.values()))


def tfidf_from_streams(streams: Mapping[Hashable, Sequence[str]]) -> dict[Hashable, TfidfVector]:
    if len(streams) < 2:
        raise ValueError("TF-IDF needs at least two documents")
    df: dict[str, int] = {}
    counts = {}
    for key, tokens in streams.items():
        if not tokens:
            raise ValueError(f"account {key!r} has no tokens")
        c: dict[str, int] = {}
        for tok in tokens:
            c[tok] = c.get(tok, 0) + 1
        counts[key] = c
        for w in c:
            df[w] = df.get(w, 0) + 1
    n_docs = len(streams)
    out = {}
    for key, c in counts.items():
        n = len(streams[key])
        weights = {w: (cnt / n) * math.log(n_docs / df[w]) for w, cnt in c.items()}
        out[key] = TfidfVector(weights, n_docs, df)
    return out


def tfidf_vectors(accounts: Sequence, mode: str = "linguistic") -> dict[tuple[str, str], TfidfVector]:
    """One TF-IDF vector per account, keyed by ``(platform, account_id)``."""
    return tfidf_from_streams({a.key: stream_for(a, mode) for a in accounts})


def cosine(d1: TfidfVector, d2: TfidfVector) -> float:
    n1, n2 = d1.norm, d2.norm
    if n1 == 0 or n2 == 0:
        raise ValueError("cosine is undefined for a zero-magnitude vector")
    small, large = sorted((d1.weights, d2.weights), key=len)
    dot = math.fsum(w * large[t] for t, w in small.items() if t in large)
    return min(1.0, dot / (n1 * n2))


# --- confusion model -----------------------------------------------------------


@dataclass
class ConfusionEstimates:
    """Dirichlet-smoothed estimates of p(u), p(w) and p(u|w).

    p(u|w) is never stored densely: it equals ``scale[u] * (c[u,w] + beta)
    / p_word[w]`` with ``scale[u] = p(u) / (n_u + beta V)``.
    """

    users: list
    words: list[str]
    counts: sparse.csr_matrix  # users x words
    alpha: float
    beta: float
    p_user: np.ndarray
    p_word: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        self.user_index = {u: i for i, u in enumerate(self.users)}
        self.word_index = {w: i for i, w in enumerate(self.words)}
        inv = 1.0 / self.p_word
        self._inv_p_word = inv
        self._c_inv = np.asarray(self.counts @ inv).ravel()
        self._inv_sum = float(inv.sum())

    def p_user_given_word(self, word: str, user) -> float:
        u, w = self.user_index[user], self.word_index[word]
        return float(self.scale[u] * (self.counts[u, w] + self.beta) / self.p_word[w])

    def user_given_word_table(self) -> np.ndarray:
        """Dense ``(V, U)`` table of p(u|w); rows sum to one."""
        dense = self.counts.toarray().T + self.beta
        return dense * self.scale[None, :] / self.p_word[:, None]

    def similarity_matrix(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> np.ndarray:
        """S(u1, u2) for the requested user index blocks."""
        rows = np.arange(len(self.users)) if rows is None else np.asarray(rows, dtype=np.int64)
        cols = np.arange(len(self.users)) if cols is None else np.asarray(cols, dtype=np.int64)
        cr, cc = self.counts[rows], self.counts[cols]
        cross = (cr.multiply(self._inv_p_word[None, :]).tocsr() @ cc.T).toarray()
        b = self.beta
        inner = cross + b * self._c_inv[rows][:, None] + b * self._c_inv[cols][None, :] + b * b * self._inv_sum
        return self.scale[rows][:, None] * self.scale[cols][None, :] * inner


def fit_confusion_streams(
    streams: Mapping[Hashable, Sequence[str]],
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
) -> ConfusionEstimates:
    if not alpha > 0 or not beta > 0:
        raise ValueError(f"confusion priors must be positive (alpha={alpha}, beta={beta})")
    if len(streams) < 2:
        raise ValueError("the confusion model needs at least two users")
    users = list(streams)
    for u in users:
        if not streams[u]:
            raise ValueError(f"account {u!r} has no tokens")
    counts, words = _count_matrix([streams[u] for u in users])
    n_user = np.asarray(counts.sum(axis=1)).ravel()
    n_users, n_words = counts.shape
    p_user = (n_user + alpha) / (n_user.sum() + alpha * n_users)
    scale = p_user / (n_user + beta * n_words)
    p_word = np.asarray(counts.T @ scale).ravel() + beta * scale.sum()
    return ConfusionEstimates(users, words, counts, alpha, beta, p_user, p_word, scale)


def fit_confusion(accounts: Sequence, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA,
                  mode: str = "linguistic") -> ConfusionEstimates:
    """Fit the auxiliary user-then-word model over every account's stream."""
    return fit_confusion_streams({a.key: stream_for(a, mode) for a in accounts}, alpha, beta)


def confusion_similarity(est: ConfusionEstimates, u1, u2, log_base: float = math.e) -> tuple[float, float]:
    """Return ``(S, S * log(S))`` for two users of ``est``."""
    for u in (u1, u2):
        if u not in est.user_index:
            raise KeyError(f"unknown user {u!r}")
    s = float(est.similarity_matrix([est.user_index[u1]], [est.user_index[u2]])[0, 0])
    return s, _s_log_s(s, log_base)


def _s_log_s(s, base):
    s = np.asarray(s, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(s > 0, s * np.log(np.where(s > 0, s, 1.0)) / math.log(base), 0.0)
    return float(out) if out.ndim == 0 else out


# --- batch scoring -------------------------------------------------------------


def _count_matrix(streams: Sequence[Sequence[str]]) -> tuple[sparse.csr_matrix, list[str]]:
    words = sorted({t for s in streams for t in s})
    index = {w: i for i, w in enumerate(words)}
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for s in streams:
        row: dict[int, int] = {}
        for t in s:
            j = index[t]
            row[j] = row.get(j, 0) + 1
        for j in sorted(row):
            indices.append(j)
            data.append(row[j])
        indptr.append(len(indices))
    mat = sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(streams), len(words)),
    )
    return mat, words


class MeasureScorer:
    """Scores candidate accounts against queries for one (measure, mode).

    Corpus-wide statistics (IDF, confusion estimates) are fitted over every
    account passed in. ``confusion_rank="slogs"`` ranks the confusion model
    by ``S * log(S)`` instead of ``S``.
    """

    def __init__(self, accounts: Sequence, measure: str, mode: str = "linguistic", *,
                 alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA,
                 confusion_rank: str = "s", log_base: float = math.e):
        if measure not in MEASURES:
            raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        if confusion_rank not in ("s", "slogs"):
            raise ValueError("confusion_rank must be 's' or 'slogs'")
        self.measure, self.mode = measure, mode
        self.name = measure
        self.polarity = POLARITY[measure]
        self.confusion_rank, self.log_base = confusion_rank, log_base
        self.keys = [a.key for a in accounts]
        self.index = {k: i for i, k in enumerate(self.keys)}
        if len(self.index) != len(self.keys):
            raise ValueError("duplicate account keys")
        streams = [stream_for(a, mode) for a in accounts]
        for key, s in zip(self.keys, streams):
            if not s:
                raise ValueError(f"account {key!r} has no {mode} tokens")
        if measure == "confusion":
            self.estimates = fit_confusion_streams(dict(zip(self.keys, streams)), alpha, beta)
            return
        self.counts, self.words = _count_matrix(streams)
        if measure == "tfidf":
            self._tfidf = self._tfidf_matrix(self.counts)

    @staticmethod
    def _tfidf_matrix(counts: sparse.csr_matrix) -> sparse.csr_matrix:
        n_docs = counts.shape[0]
        df = np.bincount(counts.indices, minlength=counts.shape[1])
        idf = np.log(n_docs / df)
        tf = sparse.diags(1.0 / np.asarray(counts.sum(axis=1)).ravel()) @ counts
        weights = (tf @ sparse.diags(idf)).tocsr()
        norms = np.sqrt(np.asarray(weights.multiply(weights).sum(axis=1)).ravel())
        if np.any(norms == 0):
            raise ValueError("zero-magnitude TF-IDF vector (every word occurs in every document)")
        return (sparse.diags(1.0 / norms) @ weights).tocsr()

    def _rows(self, keys) -> np.ndarray:
        try:
            return np.asarray([self.index[k] for k in keys], dtype=np.int64)
        except KeyError as exc:
            raise KeyError(f"account {exc.args[0]!r} not in scorer corpus") from None

    def score_matrix(self, queries: Sequence, candidates: Sequence, jobs: int = 1) -> np.ndarray:
        """Scores with shape ``(len(queries), len(candidates))``."""
        qi, ci = self._rows(queries), self._rows(candidates)
        if self.measure == "confusion":
            s = self.estimates.similarity_matrix(qi, ci)
            return _s_log_s(s, self.log_base) if self.confusion_rank == "slogs" else s
        if self.measure == "tfidf":
            sim = (self._tfidf[qi] @ self._tfidf[ci].T).toarray()
            return np.clip(sim, 0.0, 1.0)
        cand = self.counts[ci]
        c_indptr = cand.indptr.astype(np.int64)
        c_indices = cand.indices.astype(np.int64)
        c_data = cand.data.astype(np.float64)
        q_ptr, q_idx = self.counts.indptr, self.counts.indices.astype(np.int64)
        q_dat = self.counts.data
        pick = 0 if self.measure == "kl2" else 1

        def row(i):
            lo, hi = q_ptr[i], q_ptr[i + 1]
            return kernels.kl2_pp2_row(q_idx[lo:hi], q_dat[lo:hi], c_indptr, c_indices, c_data)[pick]

        if jobs > 1 and len(qi) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                out = list(pool.map(row, qi))
        else:
            out = [row(i) for i in qi]
        return np.vstack(out) if out else np.empty((0, len(ci)))

    def score(self, query, candidates: Sequence) -> list[ScoredPair]:
        scores = self.score_matrix([query], candidates)[0]
        return [ScoredPair(query[1], c[1], float(s), self.polarity) for c, s in zip(candidates, scores)]


def score_measure(measure: str, mode: str, accounts: Sequence, query, candidates: Sequence,
                  **options) -> list[ScoredPair]:
    """Score ``candidates`` (AccountCorpus values) against ``query``.

    ``accounts`` is the corpus used for corpus-wide statistics; the query and
    every candidate must belong to it.
    """
    if any(c.platform == query.platform for c in candidates):
        raise ValueError("candidates must come from the other platform than the query")
    scorer = MeasureScorer(accounts, measure, mode, **options)
    return scorer.score(query.key, [c.key for c in candidates])
