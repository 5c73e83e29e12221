"""Ranking evaluation: accuracy, average rank, rank-percentile histograms."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import AccountCorpus, GroundTruthPair
from .similarity import MeasureScorer, Polarity, ScoredPair

log = logging.getLogger(__name__)

HISTOGRAM_BINS = 20
DIRECTIONS = ("AB", "BA", "both")


@dataclass(frozen=True)
class RankingResult:
    query_account_id: str
    true_match_id: str
    rank: int
    N: int


@dataclass
class MatchReport:
    measure: str
    mode: str
    direction: str
    accuracy: float
    average_rank: float
    percentile_histogram: list[float]
    results: list[RankingResult] = field(repr=False)
    n_candidates: int = 0
    covered_pairs: int = 0
    uncovered_pairs: int = 0
    one_of_k_accuracy: float | None = None

    def to_dict(self) -> dict:
        out = {
            "measure": self.measure,
            "mode": self.mode,
            "direction": self.direction,
            "accuracy": self.accuracy,
            "average_rank": self.average_rank,
            "n_candidates": self.n_candidates,
            "covered_pairs": self.covered_pairs,
            "uncovered_pairs": self.uncovered_pairs,
            "percentile_histogram": self.percentile_histogram,
            "results": [
                {"query": r.query_account_id, "true_match": r.true_match_id, "rank": r.rank, "N": r.N}
                for r in self.results
            ],
        }
        if self.one_of_k_accuracy is not None:
            out["one_of_k_accuracy"] = self.one_of_k_accuracy
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "MatchReport":
        results = [RankingResult(r["query"], r["true_match"], r["rank"], r["N"]) for r in d["results"]]
        return cls(
            d["measure"], d["mode"], d["direction"], d["accuracy"], d["average_rank"],
            d["percentile_histogram"], results, d["n_candidates"], d["covered_pairs"],
            d["uncovered_pairs"], d.get("one_of_k_accuracy"),
        )


# --- baseline scorers ----------------------------------------------------------


class ConstantScorer:
    """Gives every candidate the same score; rank then follows id order."""

    name = "constant"
    polarity = Polarity.HIGHER_IS_SIMILAR

    def score_matrix(self, queries, candidates, jobs=1):
        return np.zeros((len(queries), len(candidates)))


class RandomScorer:
    """Independent uniform scores from a seeded generator."""

    name = "random"
    polarity = Polarity.HIGHER_IS_SIMILAR

    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)

    def score_matrix(self, queries, candidates, jobs=1):
        return self.rng.random((len(queries), len(candidates)))


# --- ranking -------------------------------------------------------------------


def _order_key(polarity: Polarity):
    if polarity == Polarity.HIGHER_IS_SIMILAR:
        return lambda sp: (-sp.score, sp.candidate_account_id)
    return lambda sp: (sp.score, sp.candidate_account_id)


def rank_candidates(scores: Sequence[ScoredPair], true_match_id: str) -> RankingResult:
    """Rank of the true match; ties go to the smaller candidate id."""
    if not scores:
        raise ValueError("no candidates to rank")
    ordered = sorted(scores, key=_order_key(scores[0].polarity))
    for position, sp in enumerate(ordered, start=1):
        if sp.candidate_account_id == true_match_id:
            return RankingResult(sp.query_account_id, true_match_id, position, len(ordered))
    raise ValueError(f"true match {true_match_id!r} is not among the candidates")


def _ranks(matrix: np.ndarray, true_cols: np.ndarray, polarity: Polarity) -> np.ndarray:
    """Vectorized :func:`rank_candidates` for columns already sorted by id."""
    s = matrix if polarity == Polarity.HIGHER_IS_SIMILAR else -matrix
    true = s[np.arange(len(true_cols)), true_cols][:, None]
    better = (s > true).sum(axis=1)
    cols = np.arange(s.shape[1])[None, :]
    tied_before = ((s == true) & (cols < true_cols[:, None])).sum(axis=1)
    return 1 + better + tied_before


def percentile_histogram(results: Sequence[RankingResult]) -> list[float]:
    """Fraction of results per 5% rank-percentile bin (bin = ceil(20 rank / N))."""
    if not results:
        raise ValueError("no results")
    counts = [0] * HISTOGRAM_BINS
    for r in results:
        b = (HISTOGRAM_BINS * r.rank + r.N - 1) // r.N
        counts[b - 1] += 1
    return [c / len(results) for c in counts]


# --- protocol ------------------------------------------------------------------


def covered_pairs(pairs: Iterable[GroundTruthPair], accounts: Sequence[AccountCorpus]):
    """Split pairs into covered ones, an uncovered count, and the covered accounts."""
    present = {a.key for a in accounts}
    covered, uncovered = [], 0
    for p in pairs:
        if ("A", p.account_id_A) in present and ("B", p.account_id_B) in present:
            covered.append(p)
        else:
            uncovered += 1
    by_key = {a.key: a for a in accounts}
    pool = [by_key[("A", p.account_id_A)] for p in covered] + [by_key[("B", p.account_id_B)] for p in covered]
    return covered, uncovered, pool


def _make_scorer(measure, mode, pool, scorer_options):
    if isinstance(measure, str):
        return MeasureScorer(pool, measure, mode, **scorer_options)
    return measure


def _run_direction(scorer, covered, side, jobs):
    if side == "AB":
        links = sorted((p.account_id_A, p.account_id_B) for p in covered)
        q_plat, c_plat = "A", "B"
    else:
        links = sorted((p.account_id_B, p.account_id_A) for p in covered)
        q_plat, c_plat = "B", "A"
    cand_ids = sorted(c for _, c in links)
    col = {c: j for j, c in enumerate(cand_ids)}
    queries = [(q_plat, q) for q, _ in links]
    matrix = scorer.score_matrix(queries, [(c_plat, c) for c in cand_ids], jobs=jobs)
    true_cols = np.asarray([col[c] for _, c in links], dtype=np.int64)
    ranks = _ranks(matrix, true_cols, scorer.polarity)
    n = len(cand_ids)
    return [RankingResult(q, c, int(r), n) for (q, c), r in zip(links, ranks)]


def evaluate(pairs: Sequence[GroundTruthPair], accounts: Sequence[AccountCorpus], measure="confusion",
             mode: str = "linguistic", *, direction: str = "AB", jobs: int = 1, **scorer_options) -> MatchReport:
    """Rank every covered pair's true match among all candidate-side accounts.

    ``measure`` is a measure name or any object with ``name``, ``polarity``
    and ``score_matrix``. Pairs whose accounts were filtered out are
    excluded and counted in ``uncovered_pairs``.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    covered, uncovered, pool = covered_pairs(pairs, accounts)
    if not covered:
        raise ValueError("no ground-truth pair has both accounts in the corpus")
    if uncovered:
        log.info("%d ground-truth pairs not covered by the corpus", uncovered)
    scorer = _make_scorer(measure, mode, pool, scorer_options)
    sides = ("AB", "BA") if direction == "both" else (direction,)
    results: list[RankingResult] = []
    for side in sides:
        results.extend(_run_direction(scorer, covered, side, jobs))
    ranks = np.asarray([r.rank for r in results])
    return MatchReport(
        measure=getattr(scorer, "name", str(measure)),
        mode=mode,
        direction=direction,
        accuracy=float(np.mean(ranks == 1)),
        average_rank=float(ranks.mean()),
        percentile_histogram=percentile_histogram(results),
        results=results,
        n_candidates=len(covered),
        covered_pairs=len(covered),
        uncovered_pairs=uncovered,
    )


def one_of_k_task(pairs: Sequence[GroundTruthPair], accounts: Sequence[AccountCorpus], measure="confusion",
                  mode: str = "combined", *, k: int = 10, n: int = 100, seed: int = 0,
                  direction: str = "AB", **scorer_options) -> float:
    """Accuracy on n queries, each picking its match out of k candidates.

    Every query is a distinct user; each candidate list holds the true match
    plus k-1 distractors drawn without replacement from the other users.
    """
    if direction not in ("AB", "BA"):
        raise ValueError("direction must be 'AB' or 'BA'")
    covered, _, pool = covered_pairs(pairs, accounts)
    covered.sort(key=lambda p: p.user_id)
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 and n >= 1")
    if len(covered) < max(n, k):
        raise ValueError(f"need at least {max(n, k)} covered pairs, have {len(covered)}")
    scorer = _make_scorer(measure, mode, pool, scorer_options)
    rng = np.random.default_rng(seed)
    if direction == "AB":
        side = [(("A", p.account_id_A), ("B", p.account_id_B)) for p in covered]
    else:
        side = [(("B", p.account_id_B), ("A", p.account_id_A)) for p in covered]
    hits = 0
    for qi in rng.choice(len(side), size=n, replace=False):
        others = np.delete(np.arange(len(side)), qi)
        picks = rng.choice(others, size=k - 1, replace=False)
        query, truth = side[qi]
        cands = sorted([truth] + [side[j][1] for j in picks], key=lambda c: c[1])
        row = scorer.score_matrix([query], cands)
        rank = _ranks(row, np.asarray([cands.index(truth)]), scorer.polarity)[0]
        hits += int(rank == 1)
    return hits / n


# --- serialization -------------------------------------------------------------


def report_stem(report: MatchReport) -> str:
    return f"{report.measure}_{report.mode}"


def histogram_table(report: MatchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin", "percentile_low", "percentile_high", "fraction"])
    for b, frac in enumerate(report.percentile_histogram, start=1):
        w.writerow([b, 5 * (b - 1), 5 * b, repr(frac)])
    return buf.getvalue()


def summary_table(reports: Sequence[MatchReport]) -> str:
    """Flat CSV of (measure, mode, accuracy, average rank), best accuracy first."""
    ordered = sorted(reports, key=lambda r: (-r.accuracy, r.average_rank, r.measure, r.mode))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["measure", "mode", "direction", "accuracy", "average_rank", "n_candidates"]
    with_k = any(r.one_of_k_accuracy is not None for r in reports)
    if with_k:
        header.append("one_of_k_accuracy")
    w.writerow(header)
    for r in ordered:
        row = [r.measure, r.mode, r.direction, repr(r.accuracy), repr(r.average_rank), r.n_candidates]
        if with_k:
            row.append("" if r.one_of_k_accuracy is None else repr(r.one_of_k_accuracy))
        w.writerow(row)
    return buf.getvalue()


def format_summary(reports: Sequence[MatchReport]) -> str:
    """Human-readable accuracy / average-rank table per mode."""
    lines = []
    for mode in sorted({r.mode for r in reports}):
        group = sorted((r for r in reports if r.mode == mode), key=lambda r: (r.accuracy, -r.average_rank))
        lines.append(f"{mode} (N = {group[0].n_candidates})")
        lines.append(f"  {'Model':<12}{'Accuracy':>10}{'AverageRank':>14}")
        for r in group:
            lines.append(f"  {r.measure:<12}{r.accuracy:>10.4f}{r.average_rank:>14.1f}")
        lines.append("")
    return "\n".join(lines)


def write_report(report: MatchReport, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"report_{report_stem(report)}.json"
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out / f"histogram_{report_stem(report)}.csv").write_text(histogram_table(report), encoding="utf-8")
    return path


def read_report(path) -> MatchReport:
    return MatchReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def score_rows(scorer, queries: Sequence, candidates: Sequence, mode: str) -> str:
    """CSV rows ``query_id, candidate_id, measure, mode, score``."""
    matrix = scorer.score_matrix(queries, candidates)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["query_id", "candidate_id", "measure", "mode", "score"])
    for q, row in zip(queries, matrix):
        for c, s in zip(candidates, row):
            w.writerow([q[1], c[1], scorer.name, mode, repr(float(s))])
    return buf.getvalue()
