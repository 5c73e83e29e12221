"""Command-line entry point: ``ingest``, ``gen-synth``, ``evaluate``, ``report``.

Settings come from an optional JSON config file (``--config``); flags
override it. Exit status is 0 on success, 1 for usage errors and 2 for data
errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import corpus, evaluator, similarity, synth

log = logging.getLogger("stylomatch")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunConfig:
    posts: str | None = None
    ground_truth: str | None = None
    out: str = "out"
    window_start: str | None = None
    window_end: str | None = None
    min_posts: int = 20
    bins: int = 500
    measures: list[str] = field(default_factory=lambda: list(similarity.MEASURES))
    modes: list[str] = field(default_factory=lambda: list(similarity.MODES))
    alpha: float = similarity.DEFAULT_ALPHA
    beta: float = similarity.DEFAULT_BETA
    confusion_rank: str = "s"
    log_base: float = 2.718281828459045
    direction: str = "AB"
    seed: int | None = None
    jobs: int = 1
    one_of_k: bool = False
    k: int = 10
    n_queries: int = 100
    baseline: bool = True
    write_scores: bool = False

    def window(self):
        if self.window_start is None and self.window_end is None:
            return None
        if self.window_start is None or self.window_end is None:
            raise UsageError("window needs both window_start and window_end")
        try:
            start = corpus.parse_timestamp(self.window_start)
            end = corpus.parse_timestamp(self.window_end)
        except ValueError as exc:
            raise UsageError(f"bad window bound: {exc}") from None
        if not start < end:
            raise UsageError("window_start must precede window_end")
        return start, end

    def validate_evaluate(self) -> None:
        for m in self.measures:
            if m not in similarity.MEASURES:
                raise UsageError(f"unknown measure {m!r}; choose from {', '.join(similarity.MEASURES)}")
        for m in self.modes:
            if m not in similarity.MODES:
                raise UsageError(f"unknown mode {m!r}; choose from {', '.join(similarity.MODES)}")
        if not self.alpha > 0 or not self.beta > 0:
            raise UsageError(f"confusion priors must be > 0 (alpha={self.alpha}, beta={self.beta})")
        if self.confusion_rank not in ("s", "slogs"):
            raise UsageError("confusion_rank must be 's' or 'slogs'")
        if not self.log_base > 0 or self.log_base == 1:
            raise UsageError("log_base must be positive and not 1")
        if self.direction not in evaluator.DIRECTIONS:
            raise UsageError(f"direction must be one of {', '.join(evaluator.DIRECTIONS)}")
        if self.jobs < 1:
            raise UsageError("jobs must be >= 1")
        if self.min_posts < 1:
            raise UsageError("min_posts must be >= 1")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"unknown config key(s) in {path}: {', '.join(unknown)}")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    values = _load_config(getattr(args, "config", None))
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    for key in ("measures", "modes"):
        if isinstance(values.get(key), str):
            values[key] = [s.strip() for s in values[key].split(",") if s.strip()]
        if values.get(key) == ["all"]:
            values[key] = list(similarity.MEASURES if key == "measures" else similarity.MODES)
    return RunConfig(**values)


def _require_file(path: str | None, what: str) -> Path:
    if path is None:
        raise UsageError(f"no {what} file given")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {path}")
    return p


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _load_accounts(cfg: RunConfig):
    posts_path = _require_file(cfg.posts, "posts")
    parsed = corpus.read_posts(posts_path)
    for rej in parsed.rejections[:10]:
        log.warning("%s:%d rejected: %s", posts_path, rej.line_number, rej.reason)
    if len(parsed.rejections) > 10:
        log.warning("... %d more rejected lines", len(parsed.rejections) - 10)
    accounts = corpus.build_accounts(parsed.posts, cfg.window(), cfg.min_posts)
    return parsed, accounts


def cmd_ingest(cfg: RunConfig) -> int:
    if cfg.bins < 1:
        raise UsageError("bins must be >= 1")
    if cfg.min_posts < 1:
        raise UsageError("min_posts must be >= 1")
    parsed, accounts = _load_accounts(cfg)
    report = {
        "parsed_posts": len(parsed.posts),
        "rejected_lines": len(parsed.rejections),
        "accounts": len(accounts),
        "min_posts": cfg.min_posts,
        "window": [cfg.window_start, cfg.window_end],
    }
    if accounts:
        report.update(corpus.corpus_stats(accounts, cfg.bins).to_dict())
    else:
        report.update({"total_posts": 0, "platforms": {}})
    out = Path(cfg.out)
    _write(out / "stats.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["line_number", "reason"])
    for rej in parsed.rejections:
        w.writerow([rej.line_number, rej.reason])
    _write(out / "rejections.csv", buf.getvalue())
    print(f"{len(accounts)} accounts, {len(parsed.rejections)} rejected lines -> {out / 'stats.json'}")
    return EXIT_OK


def cmd_gen_synth(args: argparse.Namespace) -> int:
    spec_path = _require_file(args.spec, "generator spec")
    try:
        data = json.loads(spec_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"spec {spec_path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"spec {spec_path} must hold a JSON object")
    if args.seed is not None:
        data["seed"] = args.seed
    try:
        spec = synth.GeneratorSpec.from_dict(data)
        spec.validate()
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid generator spec: {exc}") from None
    posts_path, truth_path = synth.write_synthetic(spec, args.out or "out")
    print(f"wrote {posts_path} and {truth_path}")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig) -> int:
    cfg.validate_evaluate()
    truth_path = _require_file(cfg.ground_truth, "ground truth")
    _require_file(cfg.posts, "posts")
    if cfg.seed is None and (cfg.baseline or cfg.one_of_k):
        raise UsageError("--seed is required for the random baseline and the 1-of-k task")
    try:
        pairs = corpus.load_ground_truth(truth_path)
    except corpus.GroundTruthError as exc:
        raise DataError(str(exc)) from None
    _, accounts = _load_accounts(cfg)
    out = Path(cfg.out)
    pool = evaluator.covered_pairs(pairs, accounts)[2]
    if not pool:
        raise DataError("no ground-truth pair has both accounts in the corpus")
    options = dict(alpha=cfg.alpha, beta=cfg.beta, confusion_rank=cfg.confusion_rank, log_base=cfg.log_base)
    reports = []
    try:
        for mode in cfg.modes:
            for measure in cfg.measures:
                scorer = similarity.MeasureScorer(pool, measure, mode, **options)
                rep = evaluator.evaluate(pairs, accounts, scorer, mode, direction=cfg.direction, jobs=cfg.jobs)
                if cfg.one_of_k:
                    rep.one_of_k_accuracy = _one_of_k(cfg, pairs, accounts, scorer, mode)
                reports.append(rep)
                evaluator.write_report(rep, out)
                if cfg.write_scores:
                    _write_scores(cfg, pairs, scorer, mode, out)
                log.info("%s/%s accuracy=%.4f average_rank=%.2f", measure, mode, rep.accuracy, rep.average_rank)
            if cfg.baseline:
                rep = evaluator.evaluate(pairs, accounts, evaluator.RandomScorer(cfg.seed), mode,
                                         direction=cfg.direction)
                if cfg.one_of_k:
                    rep.one_of_k_accuracy = _one_of_k(cfg, pairs, accounts, evaluator.RandomScorer(cfg.seed), mode)
                reports.append(rep)
                evaluator.write_report(rep, out)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    _write_summaries(reports, out)
    sys.stdout.write(evaluator.format_summary(reports))
    return EXIT_OK


def _one_of_k(cfg, pairs, accounts, scorer, mode):
    direction = "AB" if cfg.direction == "both" else cfg.direction
    return evaluator.one_of_k_task(pairs, accounts, scorer, mode, k=cfg.k, n=cfg.n_queries,
                                   seed=cfg.seed, direction=direction)


def _write_scores(cfg, pairs, scorer, mode, out):
    queries = sorted(k for k in scorer.keys if k[0] == "A")
    cands = sorted(k for k in scorer.keys if k[0] == "B")
    if cfg.direction == "BA":
        queries, cands = cands, queries
    _write(out / f"scores_{scorer.name}_{mode}.csv", evaluator.score_rows(scorer, queries, cands, mode))


def _write_summaries(reports, out: Path) -> None:
    _write(out / "summary.csv", evaluator.summary_table(reports))
    _write(out / "summary.txt", evaluator.format_summary(reports))
    for mode in sorted({r.mode for r in reports}):
        group = sorted((r for r in reports if r.mode == mode), key=lambda r: r.measure)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin", "percentile_high"] + [r.measure for r in group])
        for b in range(evaluator.HISTOGRAM_BINS):
            w.writerow([b + 1, 5 * (b + 1)] + [repr(r.percentile_histogram[b]) for r in group])
        _write(out / f"histograms_{mode}.csv", buf.getvalue())


def cmd_report(args: argparse.Namespace) -> int:
    out = Path(args.out or "out")
    if not out.is_dir():
        raise UsageError(f"report directory not found: {out}")
    paths = sorted(out.glob("report_*.json"))
    if not paths:
        raise DataError(f"no report_*.json files in {out}")
    try:
        reports = [evaluator.read_report(p) for p in paths]
    except (KeyError, ValueError) as exc:
        raise DataError(f"unreadable report: {exc}") from None
    _write_summaries(reports, out)
    sys.stdout.write(evaluator.format_summary(reports))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("-v", "--verbose", action="store_true")


def _corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--posts", help="posts file (JSON lines)")
    p.add_argument("--window-start", dest="window_start", help="ISO-8601 instant with offset")
    p.add_argument("--window-end", dest="window_end", help="ISO-8601 instant with offset (exclusive)")
    p.add_argument("--min-posts", dest="min_posts", type=int)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stylomatch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse and filter posts, write corpus statistics")
    _common(p)
    _corpus_flags(p)
    p.add_argument("--bins", type=int, help="histogram bins (default 500)")

    p = sub.add_parser("gen-synth", help="generate a synthetic paired corpus")
    _common(p)
    p.add_argument("--spec", required=True, help="JSON generator spec")

    p = sub.add_parser("evaluate", help="rank true matches and write match reports")
    _common(p)
    _corpus_flags(p)
    p.add_argument("--ground-truth", dest="ground_truth")
    p.add_argument("--measure", dest="measures", help="comma-separated measures or 'all'")
    p.add_argument("--mode", dest="modes", help="comma-separated modes or 'all'")
    p.add_argument("--alpha", type=float, help="confusion user prior")
    p.add_argument("--beta", type=float, help="confusion word prior")
    p.add_argument("--confusion-rank", dest="confusion_rank", choices=("s", "slogs"))
    p.add_argument("--direction", choices=evaluator.DIRECTIONS)
    p.add_argument("--jobs", type=int)
    p.add_argument("--one-of-k", dest="one_of_k", action="store_const", const=True,
                   help="also run the 1-of-k candidate task")
    p.add_argument("--k", type=int, help="candidates per 1-of-k query (default 10)")
    p.add_argument("--n-queries", dest="n_queries", type=int, help="1-of-k queries (default 100)")
    p.add_argument("--no-baseline", dest="baseline", action="store_const", const=False)
    p.add_argument("--write-scores", dest="write_scores", action="store_const", const=True)

    p = sub.add_parser("report", help="re-render summary tables from existing reports")
    p.add_argument("--out", help="directory holding report_*.json")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "gen-synth":
            return cmd_gen_synth(args)
        if args.command == "report":
            return cmd_report(args)
        cfg = build_config(args)
        if args.command == "ingest":
            return cmd_ingest(cfg)
        return cmd_evaluate(cfg)
    except UsageError as exc:
        print(f"stylomatch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, corpus.GroundTruthError) as exc:
        print(f"stylomatch: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TypeError as exc:
        print(f"stylomatch: error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
