"""Command-line pipeline: config-driven, deterministic, manifest-stamped runs."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, commnet, corpus, evalkit, lexgraph, polarity, proplabel, synthgen
from .errors import ConfigError, DataError
from .ioutil import sha256_file

log = logging.getLogger(__name__)

CONFIG_ENV_VAR = "POLARLEX_CONFIG"

SUBCOMMANDS = (
    "ingest",
    "build-graph",
    "propagate",
    "score",
    "timeseries",
    "commnet",
    "eval",
    "synth",
    "pipeline",
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2


@dataclass
class RunConfig:
    corpus: str | None = None
    seed_files: list[str] = field(default_factory=list)
    embeddings: str | None = None
    membership: str | None = None
    gold: str | None = None
    annotations: str | None = None
    out_dir: str = "out"
    mode: str = "hashtag"
    gamma: int = 100
    max_outer: int = 1_000_000
    vocab_cap: int = 50_000
    knn_k: int = 25
    restart_prob: float = 0.15
    tol: float = 1e-8
    max_iter: int = 1000
    kcore_k: int = 30
    kcore_weighted: bool = False
    weighting: str = "by_item"
    include_retweets: bool = True
    drop_mentions: bool = False
    eval_unit: str = "account"
    n_users: int = 200
    n_tweets: int = 5000
    hashtags_per_community: int = 100
    seed_fraction: float = 0.1
    within: float = 0.95
    cross: float = 0.05
    neutral_hashtags: int = 0
    days: int = 10
    rng_seed: int = 0

    def validate(self, subcommand: str) -> None:
        checks = [
            ("mode", self.mode in ("hashtag", "token", "embedding")),
            ("gamma", self.gamma >= 1),
            ("max_outer", self.max_outer >= 1),
            ("vocab_cap", self.vocab_cap >= 1),
            ("knn_k", self.knn_k >= 1),
            ("restart_prob", 0.0 < self.restart_prob < 1.0),
            ("tol", self.tol > 0.0),
            ("max_iter", self.max_iter >= 1),
            ("kcore_k", self.kcore_k >= 1),
            ("weighting", self.weighting in (polarity.BY_ITEM, polarity.BY_TWEET)),
            ("eval_unit", self.eval_unit in ("account", "user_day")),
        ]
        for name, ok in checks:
            if not ok:
                raise ConfigError(f"invalid value for {name}: {getattr(self, name)!r}")
        needs_corpus = subcommand in ("ingest", "score", "timeseries", "commnet", "pipeline")
        if needs_corpus or (subcommand == "eval" and self.eval_unit == "user_day"):
            if not self.corpus:
                raise ConfigError("corpus: no corpus file given")
            if not Path(self.corpus).is_file():
                raise ConfigError(f"corpus: file not found: {self.corpus}")
        if subcommand in ("propagate", "pipeline"):
            if not self.seed_files:
                raise ConfigError("seed_files: at least one seed file required")
            for path in self.seed_files:
                if not Path(path).is_file():
                    raise ConfigError(f"seed_files: file not found: {path}")
        if subcommand in ("build-graph", "pipeline") and self.mode == "embedding":
            if not self.embeddings:
                raise ConfigError("embeddings: required for embedding mode")
            if not Path(self.embeddings).is_file():
                raise ConfigError(f"embeddings: file not found: {self.embeddings}")
        if subcommand == "eval":
            if not self.gold:
                raise ConfigError("gold: gold label file required for eval")
            if not Path(self.gold).is_file():
                raise ConfigError(f"gold: file not found: {self.gold}")
            if self.annotations and not Path(self.annotations).is_file():
                raise ConfigError(f"annotations: file not found: {self.annotations}")
        if subcommand in ("timeseries", "pipeline") and self.membership:
            if not Path(self.membership).is_file():
                raise ConfigError(f"membership: file not found: {self.membership}")


class _Runner:
    """Tracks inputs and outputs of one run; removes partial outputs on failure."""

    def __init__(self, config: RunConfig, subcommand: str) -> None:
        self.config = config
        self.subcommand = subcommand
        self.out_dir = Path(config.out_dir)
        self.inputs: dict[str, str] = {}
        self.outputs: list[Path] = []

    def read(self, path: str | Path) -> Path:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"input not found: {path}")
        self.inputs[str(path)] = sha256_file(path)
        return path

    def write(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        self.outputs.append(path)
        return path

    def cleanup(self) -> None:
        for path in self.outputs:
            try:
                path.unlink(missing_ok=True)
            except OSError:
                pass

    def write_manifest(self) -> None:
        manifest = {
            "tool": "polarlex",
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "subcommand": self.subcommand,
            "config": asdict(self.config),
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": sorted(p.name for p in self.outputs),
        }
        path = self.out_dir / "manifest.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# stages

def _load_tokenized(path: Path) -> list[corpus.TokenizedTweet]:
    tweets: list[corpus.TokenizedTweet] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.rstrip("\n"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}: line {lineno}: expected 3 fields")
            tweet_id, tags, tokens = parts
            tweets.append(
                corpus.TokenizedTweet(
                    tweet_id=tweet_id,
                    hashtags=tags.split(" ") if tags else [],
                    tokens=tokens.split(" ") if tokens else [],
                )
            )
    return tweets


def _write_tokenized(tweets: list[corpus.TokenizedTweet], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tw in tweets:
            fh.write(f"{tw.tweet_id}\t{' '.join(tw.hashtags)}\t{' '.join(tw.tokens)}\n")


def stage_ingest(run: _Runner) -> None:
    records = corpus.load_corpus(
        run.read(run.config.corpus), include_retweets=run.config.include_retweets
    )
    tweets = [corpus.tokenize(r) for r in records]
    _write_tokenized(tweets, run.write("tokenized.tsv"))
    log.info("ingested %d tweets", len(records))


def stage_build_graph(run: _Runner) -> None:
    cfg = run.config
    if cfg.mode == "embedding":
        table = lexgraph.load_embeddings(run.read(cfg.embeddings), cfg.vocab_cap)
        graph = lexgraph.build_knn_graph(table, cfg.knn_k)
    else:
        tweets = _load_tokenized(run.read(run.out_dir / "tokenized.tsv"))
        cap = cfg.vocab_cap if cfg.mode == "token" else None
        graph = lexgraph.build_cooccurrence(tweets, mode=cfg.mode, vocab_cap=cap)
    lexgraph.write_graph(graph, run.write("graph.edges.tsv"), run.write("graph.nodes.tsv"))
    log.info("graph: %d nodes, %d edges", graph.num_nodes, graph.num_edges)


def stage_propagate(run: _Runner) -> None:
    cfg = run.config
    graph = lexgraph.read_graph(
        run.read(run.out_dir / "graph.edges.tsv"), run.read(run.out_dir / "graph.nodes.tsv")
    )
    for seed_path in cfg.seed_files:
        seeds = proplabel.read_seed_lexicon(run.read(seed_path))
        if cfg.mode == "embedding":
            lexicon = proplabel.propagate_random_walk(
                graph, seeds,
                restart_prob=cfg.restart_prob, tol=cfg.tol, max_iter=cfg.max_iter,
            )
        else:
            lexicon = proplabel.propagate_greedy(
                graph, seeds, gamma=cfg.gamma, max_outer=cfg.max_outer
            )
        proplabel.write_lexicon(lexicon, run.write(f"lexicon_{seeds.dimension_name}.tsv"))
        n_labeled = len(lexicon.scores)
        log.info(
            "%s: labeled %d of %d nodes", seeds.dimension_name, n_labeled, graph.num_nodes
        )


def _lexicon_paths(out_dir: Path) -> list[Path]:
    paths = sorted(out_dir.glob("lexicon_*.tsv"))
    if not paths:
        raise ConfigError(f"no lexicon_*.tsv files in {out_dir}; run propagate first")
    return paths


def stage_score(run: _Runner) -> None:
    cfg = run.config
    records = corpus.load_corpus(run.read(cfg.corpus), include_retweets=cfg.include_retweets)
    tweets = [corpus.tokenize(r) for r in records]
    item_mode = lexgraph.HASHTAG_MODE if cfg.mode == "hashtag" else lexgraph.TOKEN_MODE
    tweet_scores: dict[str, dict[str, polarity.PolarityScore]] = {}
    user_scores: dict[str, dict[str, polarity.PolarityScore]] = {}
    tallies: dict[str, list[polarity.TallyRow]] = {}
    for path in _lexicon_paths(run.out_dir):
        lexicon = proplabel.read_lexicon(run.read(path))
        dim = lexicon.dimension_name
        tweet_scores[dim] = polarity.score_tweets(tweets, lexicon, mode=item_mode)
        user_scores[dim] = polarity.score_users(records, tweet_scores[dim], cfg.weighting)
        tallies[dim] = polarity.overall_tally(user_scores[dim], tweet_scores[dim], lexicon.scale)
    order = [r.tweet_id for r in records]
    polarity.write_score_csv(tweet_scores, run.write("tweet_scores.csv"), "tweet_id", order)
    polarity.write_score_csv(user_scores, run.write("user_scores.csv"), "user_id")
    polarity.write_tally_csv(tallies, run.write("tally.csv"))


def stage_timeseries(run: _Runner) -> None:
    cfg = run.config
    records = corpus.load_corpus(run.read(cfg.corpus), include_retweets=cfg.include_retweets)
    if cfg.membership:
        membership = polarity.read_membership(run.read(cfg.membership))
    else:
        membership = {r.user_id: "all" for r in records}
    tweet_scores = polarity.read_score_csv(run.read(run.out_dir / "tweet_scores.csv"))
    for dim in sorted(tweet_scores):
        series = polarity.daily_series(records, tweet_scores[dim], membership)
        polarity.write_daily_series_csv(series, run.write(f"daily_series_{dim}.csv"))


def _load_scales(run: _Runner) -> dict[str, tuple[float, float]]:
    scales: dict[str, tuple[float, float]] = {}
    for path in _lexicon_paths(run.out_dir):
        lexicon = proplabel.read_lexicon(run.read(path))
        scales[lexicon.dimension_name] = lexicon.scale
    return scales


def stage_commnet(run: _Runner) -> None:
    cfg = run.config
    records = corpus.load_corpus(run.read(cfg.corpus), include_retweets=cfg.include_retweets)
    user_scores = polarity.read_score_csv(run.read(run.out_dir / "user_scores.csv"))
    scales = _load_scales(run)
    graph = commnet.build_comm_graph(
        records, user_scores, scales, include_mentions=not cfg.drop_mentions
    )
    core = commnet.k_core(graph, cfg.kcore_k, weighted=cfg.kcore_weighted)
    commnet.export_graph(core, run.write("commnet.graphml"), "graphml")
    commnet.export_graph(core, run.write("commnet_edges.csv"), "edge_csv")
    with open(run.write("homophily.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("dimension,homophily\n")
        for dim in core.dimensions():
            try:
                value = commnet.homophily_index(core, dim)
                fh.write(f"{dim},{value:.9f}\n")
            except DataError:
                fh.write(f"{dim},\n")
    log.info(
        "commnet: %d nodes, %d edges; %d-core: %d nodes",
        len(graph.nodes), len(graph.edges), cfg.kcore_k, len(core.nodes),
    )


def _user_day_predictions(
    records: list[corpus.TweetRecord],
    tweet_scores: dict[str, polarity.PolarityScore],
    scale: tuple[float, float],
    weighting: str,
) -> dict[str, str]:
    groups = corpus.group_by_user_day(records)
    out: dict[str, str] = {}
    for key, ids in groups.items():
        score = polarity.score_aggregate(ids, tweet_scores, weighting)
        out[f"{key.user_id}@{key.day.isoformat()}"] = polarity.ternarize(score, scale)
    return out


def stage_eval(run: _Runner) -> None:
    cfg = run.config
    gold = evalkit.read_gold(run.read(cfg.gold), unit=cfg.eval_unit)
    annotations = (
        evalkit.read_annotations(run.read(cfg.annotations)) if cfg.annotations else None
    )
    scales = _load_scales(run)
    reports = []
    if cfg.eval_unit == "account":
        user_scores = polarity.read_score_csv(run.read(run.out_dir / "user_scores.csv"))
        dims = sorted(user_scores)
    else:
        records = corpus.load_corpus(run.read(cfg.corpus), include_retweets=cfg.include_retweets)
        tweet_scores = polarity.read_score_csv(run.read(run.out_dir / "tweet_scores.csv"))
        dims = sorted(tweet_scores)
    for dim in dims:
        scale = scales[dim]
        if cfg.eval_unit == "account":
            predictions = {
                user: polarity.ternarize(score, scale)
                for user, score in user_scores[dim].items()
            }
        else:
            predictions = _user_day_predictions(records, tweet_scores[dim], scale, cfg.weighting)
        covered = {k: v for k, v in gold.labels.items() if k in predictions}
        dropped = len(gold.labels) - len(covered)
        if dropped:
            log.warning("%s: %d gold units absent from the corpus, skipped", dim, dropped)
        if not covered:
            raise DataError(f"{dim}: no gold units overlap the scored corpus")
        subset = evalkit.GoldLabelSet(unit=gold.unit, labels=covered, provenance=gold.provenance)
        reports.append(evalkit.evaluate_predictions(predictions, subset, dim, annotations))
    evalkit.write_eval_reports(
        reports, run.write("eval_poles.csv"), run.write("eval_overall.csv")
    )


def stage_synth(run: _Runner) -> None:
    cfg = run.config
    spec = synthgen.SynthSpec(
        n_users=cfg.n_users,
        n_tweets=cfg.n_tweets,
        hashtags_per_community=cfg.hashtags_per_community,
        seed_fraction=cfg.seed_fraction,
        p_within=cfg.within,
        p_cross=cfg.cross,
        n_neutral_hashtags=cfg.neutral_hashtags,
        n_days=cfg.days,
        rng_seed=cfg.rng_seed,
    )
    records, truth = synthgen.generate(spec)
    corpus.write_corpus(records, run.write("corpus.jsonl"))
    synthgen.write_truth_labels(truth.user_labels, run.write("gold_users.tsv"))
    synthgen.write_truth_labels(truth.hashtag_labels, run.write("gold_hashtags.tsv"))
    proplabel.write_seed_lexicon(truth.seeds, run.write(f"seeds_{spec.dimension}.tsv"))
    log.info("synthesized %d tweets from %d users", len(records), cfg.n_users)


PIPELINE_STAGES = (
    stage_ingest,
    stage_build_graph,
    stage_propagate,
    stage_score,
    stage_timeseries,
    stage_commnet,
)

STAGE_BY_NAME = {
    "ingest": stage_ingest,
    "build-graph": stage_build_graph,
    "propagate": stage_propagate,
    "score": stage_score,
    "timeseries": stage_timeseries,
    "commnet": stage_commnet,
    "eval": stage_eval,
    "synth": stage_synth,
}


# ---------------------------------------------------------------------------
# argument handling

class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise ConfigError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="polarlex",
        description="Polarity scoring for short-text corpora via graph label propagation.",
    )
    parser.add_argument("--version", action="version", version=f"polarlex {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="|".join(SUBCOMMANDS))
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, add_help=True)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--corpus", default=None)
        p.add_argument("--seed-file", action="append", dest="seed_files", default=None)
        p.add_argument("--embeddings", default=None)
        p.add_argument("--membership", default=None)
        p.add_argument("--gold", default=None)
        p.add_argument("--annotations", default=None)
        p.add_argument("--out-dir", dest="out_dir", default=None)
        p.add_argument("--mode", choices=("hashtag", "token", "embedding"), default=None)
        p.add_argument("--gamma", type=int, default=None)
        p.add_argument("--max-outer", dest="max_outer", type=int, default=None)
        p.add_argument("--vocab-cap", dest="vocab_cap", type=int, default=None)
        p.add_argument("--knn-k", dest="knn_k", type=int, default=None)
        p.add_argument("--restart-prob", dest="restart_prob", type=float, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
        p.add_argument("--kcore-k", dest="kcore_k", type=int, default=None)
        p.add_argument(
            "--kcore-weighted", dest="kcore_weighted",
            action=argparse.BooleanOptionalAction, default=None,
        )
        p.add_argument("--weighting", choices=("by_item", "by_tweet"), default=None)
        p.add_argument(
            "--include-retweets", dest="include_retweets",
            action=argparse.BooleanOptionalAction, default=None,
        )
        p.add_argument(
            "--drop-mentions", dest="drop_mentions",
            action=argparse.BooleanOptionalAction, default=None,
        )
        p.add_argument("--eval-unit", dest="eval_unit", choices=("account", "user_day"), default=None)
        p.add_argument("--n-users", dest="n_users", type=int, default=None)
        p.add_argument("--n-tweets", dest="n_tweets", type=int, default=None)
        p.add_argument(
            "--hashtags-per-community", dest="hashtags_per_community", type=int, default=None
        )
        p.add_argument("--seed-fraction", dest="seed_fraction", type=float, default=None)
        p.add_argument("--within", type=float, default=None)
        p.add_argument("--cross", type=float, default=None)
        p.add_argument("--neutral-hashtags", dest="neutral_hashtags", type=int, default=None)
        p.add_argument("--days", type=int, default=None)
        p.add_argument("--rng-seed", dest="rng_seed", type=int, default=None)
    return parser


def _load_config_file(path: str) -> dict:
    if not Path(path).is_file():
        raise ConfigError(f"config: file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config: {path}: expected a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"config: unknown keys: {sorted(unknown)}")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then config file values, then flags; flags win."""
    values: dict = {}
    config_path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if config_path:
        values.update(_load_config_file(config_path))
    for f in fields(RunConfig):
        flag_value = getattr(args, f.name, None)
        if flag_value is not None:
            values[f.name] = flag_value
    return RunConfig(**values)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.subcommand:
            raise ConfigError("a subcommand is required: " + ", ".join(SUBCOMMANDS))
        config = build_config(args)
        config.validate(args.subcommand)
        run = _Runner(config, args.subcommand)
        try:
            if args.subcommand == "pipeline":
                for stage in PIPELINE_STAGES:
                    stage(run)
            else:
                STAGE_BY_NAME[args.subcommand](run)
            run.write_manifest()
        except Exception:
            run.cleanup()
            raise
    except ConfigError as exc:
        print(f"polarlex: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"polarlex: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"polarlex: i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
