import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stylomatch.corpus import GroundTruthPair
from stylomatch.evaluator import (
    ConstantScorer,
    RandomScorer,
    RankingResult,
    evaluate,
    one_of_k_task,
    percentile_histogram,
    rank_candidates,
    _ranks,
)
from stylomatch.similarity import Polarity, ScoredPair

from conftest import account


class PerfectScorer:
    name = "perfect"
    polarity = Polarity.HIGHER_IS_SIMILAR

    def __init__(self, pairs):
        self.match = {("A", p.account_id_A): ("B", p.account_id_B) for p in pairs}
        self.match.update({v: k for k, v in self.match.items()})

    def score_matrix(self, queries, candidates, jobs=1):
        return np.array([[float(self.match[q] == c) for c in candidates] for q in queries])


class MonotoneWrapped:
    """A higher-is-similar scorer passed through a strictly increasing map."""

    def __init__(self, inner, fn):
        self.inner, self.fn = inner, fn
        self.name, self.polarity = inner.name, inner.polarity

    def score_matrix(self, queries, candidates, jobs=1):
        return self.fn(self.inner.score_matrix(queries, candidates))


def sp(cid, score, polarity=Polarity.HIGHER_IS_SIMILAR):
    return ScoredPair("q", cid, score, polarity)


class TestRankCandidates:
    def test_best_is_rank_one(self):
        assert rank_candidates([sp("a", 0.1), sp("t", 0.9), sp("c", 0.5)], "t").rank == 1

    def test_ties_by_id(self):
        r = rank_candidates([sp("c", 1.0), sp("a", 1.0), sp("b", 1.0)], "b")
        assert (r.rank, r.N) == (2, 3)

    def test_strictly_worse_of_two(self):
        assert rank_candidates([sp("t", 0.2), sp("x", 0.3)], "t").rank == 2

    def test_lower_is_similar(self):
        low = Polarity.LOWER_IS_SIMILAR
        assert rank_candidates([sp("t", 0.2, low), sp("x", 0.3, low)], "t").rank == 1

    def test_missing_true_match(self):
        with pytest.raises(ValueError):
            rank_candidates([sp("a", 1.0)], "zz")

    @settings(max_examples=200)
    @given(st.lists(st.integers(0, 4), min_size=1, max_size=12), st.data(), st.sampled_from(list(Polarity)))
    def test_vectorized_ranks_match_sort(self, scores, data, polarity):
        ids = [f"c{i:02d}" for i in range(len(scores))]
        true = data.draw(st.integers(0, len(scores) - 1))
        ref = rank_candidates([sp(i, float(s), polarity) for i, s in zip(ids, scores)], ids[true]).rank
        fast = _ranks(np.array([scores], dtype=float), np.array([true]), polarity)[0]
        assert fast == ref


class TestHistogram:
    def test_all_first(self):
        h = percentile_histogram([RankingResult("q", "t", 1, 100)] * 10)
        assert h[0] == 1.0 and sum(h) == 1.0

    def test_bin_of_rank_50_of_100(self):
        h = percentile_histogram([RankingResult("q", "t", 50, 100)])
        assert h.index(1.0) == 9  # bin 10

    def test_boundaries(self):
        # ceil(20 * rank / N) for N = 200: ranks 1..10 -> bin 1, 191..200 -> bin 20
        rs = [RankingResult("q", "t", r, 200) for r in range(1, 201)]
        h = percentile_histogram(rs)
        assert h == [10 / 200] * 20

    def test_small_n(self):
        # N = 3: ranks map to bins ceil(20/3)=7, ceil(40/3)=14, 20
        h = percentile_histogram([RankingResult("q", "t", r, 3) for r in (1, 2, 3)])
        assert [i + 1 for i, v in enumerate(h) if v] == [7, 14, 20]


def tiny_corpus():
    texts = {
        "1": ["apples and pears", "pears again"],
        "2": ["rockets launch", "orbit rockets"],
        "3": ["jazz piano", "piano trio jazz"],
    }
    accounts = []
    pairs = []
    for uid, t in texts.items():
        accounts.append(account(f"a{uid}", "A", t))
        accounts.append(account(f"b{uid}", "B", t))
        pairs.append(GroundTruthPair(f"u{uid}", f"a{uid}", f"b{uid}"))
    return pairs, accounts


class TestEvaluate:
    def test_perfect_scorer(self):
        pairs, accounts = tiny_corpus()
        rep = evaluate(pairs, accounts, PerfectScorer(pairs))
        assert rep.accuracy == 1.0 and rep.average_rank == 1.0
        assert rep.percentile_histogram[6] == 1.0  # N = 3: rank 1 is bin ceil(20/3)

    @pytest.mark.parametrize("measure", ["kl2", "pp2", "tfidf", "confusion"])
    def test_identical_corpora_found(self, measure):
        pairs, accounts = tiny_corpus()
        rep = evaluate(pairs, accounts, measure, "linguistic")
        assert rep.accuracy == 1.0
        assert [r.query_account_id for r in rep.results] == ["a1", "a2", "a3"]

    def test_uncovered_pairs_excluded(self):
        pairs, accounts = tiny_corpus()
        pairs = pairs + [GroundTruthPair("ghost", "a9", "b9")]
        rep = evaluate(pairs, accounts, "tfidf")
        assert rep.uncovered_pairs == 1 and rep.covered_pairs == 3 and rep.n_candidates == 3
        assert all(r.N == 3 for r in rep.results)

    def test_no_coverage(self):
        _, accounts = tiny_corpus()
        with pytest.raises(ValueError):
            evaluate([GroundTruthPair("g", "x", "y")], accounts, "kl2")

    def test_constant_scorer_follows_id_order(self, small_synthetic):
        pairs, accounts = small_synthetic
        rep = evaluate(pairs, accounts, ConstantScorer())
        n = len(pairs)
        assert sorted(r.rank for r in rep.results) == list(range(1, n + 1))
        assert rep.average_rank == pytest.approx((n + 1) / 2)
        assert rep.accuracy == pytest.approx(1 / n)

    def test_directions(self, small_synthetic):
        pairs, accounts = small_synthetic
        ab = evaluate(pairs, accounts, "tfidf", "linguistic")
        ba = evaluate(pairs, accounts, "tfidf", "linguistic", direction="BA")
        both = evaluate(pairs, accounts, "tfidf", "linguistic", direction="both")
        assert len(both.results) == 2 * len(ab.results)
        assert both.accuracy == pytest.approx((ab.accuracy + ba.accuracy) / 2)
        assert all(r.query_account_id.startswith("b") for r in ba.results)

    def test_permutation_invariant(self, small_synthetic):
        pairs, accounts = small_synthetic
        shuffled = list(pairs)
        random.Random(3).shuffle(shuffled)
        a = evaluate(pairs, accounts, "confusion", "combined")
        b = evaluate(shuffled, list(reversed(accounts)), "confusion", "combined")
        assert a.to_dict() == b.to_dict()

    def test_monotone_transform_keeps_ranks(self, small_synthetic):
        pairs, accounts = small_synthetic
        from stylomatch.similarity import MeasureScorer

        base = MeasureScorer(accounts, "tfidf", "combined")
        ref = evaluate(pairs, accounts, base)
        for fn in (lambda s: 3 * s + 1, np.exp, lambda s: s**3):
            assert evaluate(pairs, accounts, MonotoneWrapped(base, fn)).results == ref.results

    def test_report_invariants(self, small_synthetic):
        pairs, accounts = small_synthetic
        for measure in ("kl2", "pp2", "tfidf", "confusion"):
            rep = evaluate(pairs, accounts, measure, "combined", jobs=2)
            assert 0 <= rep.accuracy <= 1 and 1 <= rep.average_rank <= rep.n_candidates
            assert math.fsum(rep.percentile_histogram) == pytest.approx(1.0, abs=1e-9)
            assert rep.accuracy == pytest.approx(np.mean([r.rank == 1 for r in rep.results]))

    def test_report_round_trip(self, small_synthetic):
        from stylomatch.evaluator import MatchReport

        pairs, accounts = small_synthetic
        rep = evaluate(pairs, accounts, "kl2", "temporal")
        assert MatchReport.from_dict(rep.to_dict()).to_dict() == rep.to_dict()


class TestOneOfK:
    def test_perfect(self, small_synthetic):
        pairs, accounts = small_synthetic
        assert one_of_k_task(pairs, accounts, PerfectScorer(pairs), k=10, n=20, seed=1) == 1.0

    def test_deterministic(self, small_synthetic):
        pairs, accounts = small_synthetic
        runs = [one_of_k_task(pairs, accounts, "kl2", "linguistic", n=25, seed=5) for _ in range(2)]
        assert runs[0] == runs[1]

    def test_insufficient_accounts(self, small_synthetic):
        pairs, accounts = small_synthetic
        with pytest.raises(ValueError):
            one_of_k_task(pairs, accounts, ConstantScorer(), n=len(pairs) + 1)

    def test_random_scorer_near_one_in_k(self, small_synthetic):
        pairs, accounts = small_synthetic
        acc = np.mean([one_of_k_task(pairs, accounts, RandomScorer(s), n=30, seed=s) for s in range(100)])
        assert acc == pytest.approx(0.10, abs=0.02)
