from datetime import datetime, timedelta, timezone

import pytest

from stylomatch.corpus import AccountCorpus, Platform, Post, build_accounts, parse_ground_truth, parse_posts
from stylomatch.synth import GeneratorSpec, generate

UTC = timezone.utc
T0 = datetime(2014, 6, 1, 12, 0, tzinfo=UTC)

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def account(account_id, platform, texts, start=T0, step=timedelta(hours=7)):
    """AccountCorpus with one post per text, spaced ``step`` apart."""
    platform = Platform(platform)
    posts = [Post(account_id, platform, start + i * step, t) for i, t in enumerate(texts)]
    return AccountCorpus.from_posts(account_id, platform, posts)


def load_synthetic(**spec_kwargs):
    posts, truth = generate(GeneratorSpec(**spec_kwargs))
    accounts = build_accounts(parse_posts(posts.splitlines()).posts, min_posts=1)
    return parse_ground_truth(truth.splitlines()), accounts


@pytest.fixture(scope="session")
def small_synthetic():
    return load_synthetic(seed=11, user_count=30, posts_min=20, posts_max=30, tokens_per_post=12)


@pytest.fixture
def record_criterion():
    def record(name, passed, detail=""):
        _ACCEPTANCE.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
