import json
import math

import numpy as np
import pytest

from stylomatch.corpus import build_accounts, parse_posts
from stylomatch.evaluator import evaluate
from stylomatch.synth import GeneratorSpec, generate, pseudo_word, write_synthetic

from conftest import load_synthetic


def test_deterministic_bytes(tmp_path):
    spec = GeneratorSpec(seed=5, user_count=10)
    assert generate(spec) == generate(spec)
    p1, t1 = write_synthetic(spec, tmp_path / "one")
    p2, t2 = write_synthetic(spec, tmp_path / "two")
    assert p1.read_bytes() == p2.read_bytes() and t1.read_bytes() == t2.read_bytes()
    assert generate(GeneratorSpec(seed=6, user_count=10)) != generate(spec)


def test_round_trip_and_floor():
    spec = GeneratorSpec(seed=2, user_count=15, posts_min=20, posts_max=35)
    posts, truth = generate(spec)
    parsed = parse_posts(posts.splitlines())
    assert parsed.rejections == []
    accounts = build_accounts(parsed.posts, min_posts=20)
    assert sum(a.platform.value == "A" for a in accounts) == 15
    assert sum(a.platform.value == "B" for a in accounts) == 15
    assert all(20 <= len(a.posts) <= 35 for a in accounts)
    assert truth.splitlines()[0] == "user_id,account_id_A,account_id_B"
    assert len(truth.splitlines()) == 16


def test_posts_inside_default_window():
    from stylomatch.corpus import parse_timestamp

    spec = GeneratorSpec(seed=4, user_count=20)
    start, end = parse_timestamp(spec.window_start), parse_timestamp(spec.window_end)
    posts = parse_posts(generate(spec)[0].splitlines()).posts
    assert all(start <= p.timestamp < end for p in posts)
    window_accounts = build_accounts(posts, (start, end), 20)
    assert len(window_accounts) == 40


def test_zero_shift_accounts_share_distribution():
    # same seed, topic_shift 0: per-user A and B vocabularies are draws from one distribution
    pairs, accounts = load_synthetic(seed=8, user_count=20, topic_shift=0.0, posts_min=40, posts_max=40)
    rep = evaluate(pairs, accounts, "kl2", "linguistic")
    assert rep.accuracy > 0.5


def test_indistinguishable_users_near_random():
    # infinite concentration: every signature is the shared background
    accs = []
    for seed in range(8):
        pairs, accounts = load_synthetic(seed=seed, user_count=50, signature_concentration=math.inf,
                                         tokens_per_post=6, posts_min=20, posts_max=25)
        accs.append(evaluate(pairs, accounts, "tfidf", "linguistic").accuracy)
    assert np.mean(accs) < 0.06  # random baseline is 1/50 = 0.02


@pytest.mark.parametrize(
    "bad",
    [
        dict(vocabulary_size=5),
        dict(posts_min=30, posts_max=20),
        dict(topic_shift=1.5),
        dict(signature_concentration=0),
        dict(seed=-1),
    ],
)
def test_invalid_specs(bad):
    args = dict(seed=1)
    args.update(bad)
    with pytest.raises(ValueError):
        generate(GeneratorSpec(**args))


def test_from_dict_requires_seed():
    with pytest.raises(ValueError, match="seed"):
        GeneratorSpec.from_dict({"user_count": 3})
    with pytest.raises(ValueError, match="unknown"):
        GeneratorSpec.from_dict({"seed": 1, "users": 3})
    assert GeneratorSpec.from_dict({"seed": 1, "user_count": 3}).user_count == 3


def test_pseudo_words_unique_and_not_temporal():
    words = [pseudo_word(i) for i in range(20000)]
    assert len(set(words)) == len(words)
    assert all(w.isalpha() and "w" not in w for w in words)


def test_lines_are_json_records():
    posts, _ = generate(GeneratorSpec(seed=3, user_count=2, posts_min=20, posts_max=20))
    rec = json.loads(posts.splitlines()[0])
    assert list(rec) == ["account_id", "platform", "timestamp", "text"]
