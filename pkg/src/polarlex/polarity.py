"""Aggregate lexicon scores to tweets, users, groups, and days; ternarize; tally."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import TokenizedTweet, TweetRecord
from .errors import ConfigError, DataError
from .ioutil import fmt9
from .lexgraph import HASHTAG_MODE, TOKEN_MODE
from .proplabel import PolarityLexicon

log = logging.getLogger(__name__)

POLE_A = "pole_a"
POLE_B = "pole_b"
NEUTRAL = "neutral"
UNCLASSIFIED = "unclassified"

TERNARY_LABELS = (POLE_A, POLE_B, NEUTRAL, UNCLASSIFIED)

BY_ITEM = "by_item"
BY_TWEET = "by_tweet"


@dataclass
class PolarityScore:
    """Mean lexicon score of some unit; value is None when nothing matched."""

    dimension_name: str
    value: float | None
    n_items: int

    @property
    def classified(self) -> bool:
        return self.value is not None


@dataclass
class DayStat:
    day: date
    mean: float | None
    std: float | None
    n: int
    n_unclassified: int


@dataclass
class DailySeries:
    group_name: str
    days: list[DayStat]


@dataclass
class TallyRow:
    label: str
    n_users: int
    pct_users: float
    n_tweets: int
    pct_tweets: float


def score_tweets(
    tweets: Sequence[TokenizedTweet],
    lexicon: PolarityLexicon,
    mode: str = HASHTAG_MODE,
) -> dict[str, PolarityScore]:
    """Per-tweet mean of lexicon scores over the tweet's items.

    Hashtag mode uses the tweet's deduplicated hashtags; token mode uses
    every token occurrence. Unlabeled items are ignored; a tweet with no
    labeled items is unclassified.
    """
    if mode not in (HASHTAG_MODE, TOKEN_MODE):
        raise ConfigError(f"unknown scoring mode {mode!r}")
    scores = lexicon.scores
    out: dict[str, PolarityScore] = {}
    for tw in tweets:
        items = tw.hashtags if mode == HASHTAG_MODE else tw.tokens
        hits = [scores[i] for i in items if i in scores]
        value = math.fsum(hits) / len(hits) if hits else None
        out[tw.tweet_id] = PolarityScore(lexicon.dimension_name, value, len(hits))
    return out


def score_aggregate(
    tweet_ids: Iterable[str],
    tweet_scores: Mapping[str, PolarityScore],
    weighting: str = BY_ITEM,
) -> PolarityScore:
    """Polarity of a set of tweets.

    by_item pools every labeled item occurrence across the tweets; by_tweet
    averages the classified per-tweet values without weighting.
    """
    if weighting not in (BY_ITEM, BY_TWEET):
        raise ConfigError(f"unknown weighting {weighting!r}")
    ids = sorted(tweet_ids)
    picked = [tweet_scores[t] for t in ids]
    classified = [s for s in picked if s.value is not None]
    n_items = sum(s.n_items for s in classified)
    if not classified:
        dimension = picked[0].dimension_name if picked else ""
        if not dimension:
            for s in tweet_scores.values():
                dimension = s.dimension_name
                break
        return PolarityScore(dimension, None, 0)
    if weighting == BY_ITEM:
        value = math.fsum(s.value * s.n_items for s in classified) / n_items
    else:
        value = math.fsum(s.value for s in classified) / len(classified)
    return PolarityScore(classified[0].dimension_name, value, n_items)


def score_users(
    corpus: Sequence[TweetRecord],
    tweet_scores: Mapping[str, PolarityScore],
    weighting: str = BY_ITEM,
) -> dict[str, PolarityScore]:
    """Aggregate scored tweets per author."""
    by_user: dict[str, list[str]] = {}
    for record in corpus:
        by_user.setdefault(record.user_id, []).append(record.tweet_id)
    return {
        user: score_aggregate(ids, tweet_scores, weighting)
        for user, ids in sorted(by_user.items())
    }


def ternarize_value(value: float | None, scale: tuple[float, float]) -> str:
    """Collapse a score to pole_b / neutral / pole_a around the scale midpoint."""
    if value is None:
        return UNCLASSIFIED
    lo, hi = scale
    mid = (lo + hi) / 2.0
    if value < mid:
        return POLE_B
    if value > mid:
        return POLE_A
    return NEUTRAL


def ternarize(score: PolarityScore, scale: tuple[float, float]) -> str:
    return ternarize_value(score.value, scale)


def overall_tally(
    user_scores: Mapping[str, PolarityScore],
    tweet_scores: Mapping[str, PolarityScore],
    scale: tuple[float, float],
) -> list[TallyRow]:
    """Count users and tweets per ternary class; exact percentages retained."""
    if not user_scores and not tweet_scores:
        return []
    user_counts = {label: 0 for label in TERNARY_LABELS}
    tweet_counts = {label: 0 for label in TERNARY_LABELS}
    for s in user_scores.values():
        user_counts[ternarize(s, scale)] += 1
    for s in tweet_scores.values():
        tweet_counts[ternarize(s, scale)] += 1
    n_users = len(user_scores)
    n_tweets = len(tweet_scores)
    return [
        TallyRow(
            label=label,
            n_users=user_counts[label],
            pct_users=100.0 * user_counts[label] / n_users if n_users else 0.0,
            n_tweets=tweet_counts[label],
            pct_tweets=100.0 * tweet_counts[label] / n_tweets if n_tweets else 0.0,
        )
        for label in TERNARY_LABELS
    ]


def format_tally(rows: Sequence[TallyRow]) -> str:
    """Display form with integer-rounded percentages."""
    lines = ["class\tusers\ttweets"]
    for r in rows:
        lines.append(
            f"{r.label}\t{r.n_users} ({round(r.pct_users)}%)"
            f"\t{r.n_tweets} ({round(r.pct_tweets)}%)"
        )
    return "\n".join(lines)


def daily_series(
    corpus: Sequence[TweetRecord],
    tweet_scores: Mapping[str, PolarityScore],
    membership: Mapping[str, str],
) -> list[DailySeries]:
    """Per-group daily mean / population sigma / counts over classified tweets.

    Every group in the membership map is emitted over the full corpus day
    range; days with no classified tweets get count 0 and no mean. Membership
    users absent from the corpus are counted and logged.
    """
    groups = sorted(set(membership.values()))
    if not corpus:
        return [DailySeries(g, []) for g in groups]
    days_seen = [r.day() for r in corpus]
    first, last = min(days_seen), max(days_seen)
    window = [first + timedelta(days=i) for i in range((last - first).days + 1)]

    values: dict[tuple[str, date], list[float]] = {}
    unclassified: dict[tuple[str, date], int] = {}
    active_users: set[str] = set()
    for record in corpus:
        active_users.add(record.user_id)
        group = membership.get(record.user_id)
        if group is None:
            continue
        key = (group, record.day())
        score = tweet_scores.get(record.tweet_id)
        if score is not None and score.value is not None:
            values.setdefault(key, []).append(score.value)
        else:
            unclassified[key] = unclassified.get(key, 0) + 1

    n_unknown = sum(1 for u in membership if u not in active_users)
    if n_unknown:
        log.warning("%d membership users have no tweets in the corpus", n_unknown)

    series: list[DailySeries] = []
    for group in groups:
        stats: list[DayStat] = []
        for day in window:
            vals = values.get((group, day), [])
            n = len(vals)
            if n:
                mean = math.fsum(vals) / n
                std = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / n)
            else:
                mean = std = None
            stats.append(DayStat(day, mean, std, n, unclassified.get((group, day), 0)))
        series.append(DailySeries(group, stats))
    return series


# ---------------------------------------------------------------------------
# file formats

def _open_csv(path: str | Path):
    return open(path, "w", encoding="utf-8", newline="")


def write_score_csv(
    scores_by_dim: Mapping[str, Mapping[str, PolarityScore]],
    path: str | Path,
    key_column: str,
    key_order: Sequence[str] | None = None,
) -> None:
    with _open_csv(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([key_column, "dimension", "value", "n_items"])
        for dim in sorted(scores_by_dim):
            scores = scores_by_dim[dim]
            keys = key_order if key_order is not None else sorted(scores)
            for key in keys:
                s = scores[key]
                writer.writerow(
                    [key, dim, fmt9(s.value) if s.value is not None else "", s.n_items]
                )


def read_score_csv(path: str | Path) -> dict[str, dict[str, PolarityScore]]:
    out: dict[str, dict[str, PolarityScore]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != 4:
            raise DataError(f"{path}: missing or malformed header")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataError(f"{path}: line {lineno}: expected 4 fields")
            key, dim, raw_value, raw_n = row
            try:
                value = float(raw_value) if raw_value else None
                n_items = int(raw_n)
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: bad numeric field") from exc
            if (value is None) != (n_items == 0):
                raise DataError(
                    f"{path}: line {lineno}: value and n_items disagree"
                )
            out.setdefault(dim, {})[key] = PolarityScore(dim, value, n_items)
    return out


def write_daily_series_csv(series: Sequence[DailySeries], path: str | Path) -> None:
    with _open_csv(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group", "date", "mean", "std", "n", "n_unclassified"])
        for s in series:
            for d in s.days:
                writer.writerow(
                    [
                        s.group_name,
                        d.day.isoformat(),
                        fmt9(d.mean) if d.mean is not None else "",
                        fmt9(d.std) if d.std is not None else "",
                        d.n,
                        d.n_unclassified,
                    ]
                )


def write_tally_csv(
    tallies_by_dim: Mapping[str, Sequence[TallyRow]], path: str | Path
) -> None:
    with _open_csv(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["dimension", "class", "n_users", "pct_users", "n_tweets", "pct_tweets"]
        )
        for dim in sorted(tallies_by_dim):
            for r in tallies_by_dim[dim]:
                writer.writerow(
                    [dim, r.label, r.n_users, fmt9(r.pct_users), r.n_tweets, fmt9(r.pct_tweets)]
                )


def read_membership(path: str | Path) -> dict[str, str]:
    """user_id <TAB> group_name rows."""
    membership: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}: line {lineno}: expected 'user<TAB>group'")
            user, group = parts
            if user in membership:
                raise DataError(f"{path}: line {lineno}: duplicate user {user!r}")
            membership[user] = group
    return membership
