"""Synthetic two-community corpora with planted polarity ground truth.

Randomness comes from numpy's PCG64 generator, so a corpus is fully
reproducible from the spec plus rng_seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .corpus import TweetRecord
from .errors import ConfigError
from .polarity import POLE_A, POLE_B
from .proplabel import SeedLexicon

BASE_TIME = datetime(2020, 1, 1, tzinfo=timezone.utc)

NEUTRAL_LABEL = "neutral"


@dataclass
class SynthSpec:
    """Knobs for the generator; probabilities are per tag slot or per tweet."""

    n_users: int = 200
    n_tweets: int = 5000
    hashtags_per_community: int = 100
    seed_fraction: float = 0.1
    p_within: float = 0.95
    p_cross: float = 0.05
    n_neutral_hashtags: int = 0
    n_days: int = 10
    rng_seed: int = 0
    p_interaction: float = 0.3
    interaction_homophily: float = 0.9
    dimension: str = "community"

    def validate(self) -> None:
        if self.n_users < 2:
            raise ConfigError("n_users must be >= 2 (one per community)")
        if self.n_tweets < 1:
            raise ConfigError("n_tweets must be >= 1")
        if self.hashtags_per_community < 1:
            raise ConfigError("hashtags_per_community must be >= 1")
        if not 0.0 < self.seed_fraction <= 1.0:
            raise ConfigError("seed_fraction must be in (0, 1]")
        for name in ("p_within", "p_cross", "p_interaction", "interaction_homophily"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.p_within + self.p_cross > 1.0 + 1e-12:
            raise ConfigError("p_within + p_cross must not exceed 1")
        if self.n_neutral_hashtags < 0:
            raise ConfigError("n_neutral_hashtags must be >= 0")
        if self.n_days < 1:
            raise ConfigError("n_days must be >= 1")
        if self.p_within + self.p_cross == 0.0 and self.n_neutral_hashtags == 0:
            raise ConfigError("no tag source: p_within + p_cross is 0 and no neutral pool")


@dataclass
class SynthTruth:
    """Generator bookkeeping: planted classes for users, hashtags, and tweets."""

    user_labels: dict[str, str]
    hashtag_labels: dict[str, str]
    seeds: SeedLexicon
    neutral_tweet_ids: set[str] = field(default_factory=set)
    community_user_counts: dict[str, int] = field(default_factory=dict)
    community_tweet_counts: dict[str, int] = field(default_factory=dict)


def generate(spec: SynthSpec) -> tuple[list[TweetRecord], SynthTruth]:
    """Build a corpus of hashtag-only tweets with planted communities.

    Each tweet is either neutral (all tags from the neutral pool, keeping
    neutral hashtags disconnected from the polar communities) or polar, in
    which case each of its 1-4 tag slots draws from the author's community
    or the other one in proportion p_within : p_cross. Interactions pick a
    same-community target with probability interaction_homophily.
    """
    spec.validate()
    rng = np.random.default_rng(np.random.PCG64(spec.rng_seed))

    users = [f"u{i:05d}" for i in range(spec.n_users)]
    community = {u: (POLE_A if i % 2 == 0 else POLE_B) for i, u in enumerate(users)}
    pools = {
        POLE_A: [f"ha{i:04d}" for i in range(spec.hashtags_per_community)],
        POLE_B: [f"hb{i:04d}" for i in range(spec.hashtags_per_community)],
    }
    neutral_pool = [f"nt{i:04d}" for i in range(spec.n_neutral_hashtags)]
    users_by_community = {
        POLE_A: [u for u in users if community[u] == POLE_A],
        POLE_B: [u for u in users if community[u] == POLE_B],
    }

    p_polar = spec.p_within + spec.p_cross
    p_own = spec.p_within / p_polar if p_polar > 0 else 0.0
    window_seconds = spec.n_days * 86400

    records: list[TweetRecord] = []
    used_tags: dict[str, set[str]] = {POLE_A: set(), POLE_B: set(), NEUTRAL_LABEL: set()}
    neutral_tweet_ids: set[str] = set()
    tweet_counts = {POLE_A: 0, POLE_B: 0}
    participants: set[str] = set()

    for k in range(spec.n_tweets):
        author = users[int(rng.integers(spec.n_users))]
        own = community[author]
        other = POLE_B if own == POLE_A else POLE_A
        tweet_id = f"t{k:07d}"
        is_neutral = bool(neutral_pool) and float(rng.random()) >= p_polar
        n_tags = int(rng.integers(1, 5))
        tags: list[str] = []
        if is_neutral:
            for _ in range(n_tags):
                tags.append(neutral_pool[int(rng.integers(len(neutral_pool)))])
            neutral_tweet_ids.add(tweet_id)
            used_tags[NEUTRAL_LABEL].update(tags)
        else:
            for _ in range(n_tags):
                pool_label = own if float(rng.random()) < p_own else other
                pool = pools[pool_label]
                tag = pool[int(rng.integers(len(pool)))]
                tags.append(tag)
                used_tags[pool_label].add(tag)
            tweet_counts[own] += 1

        is_retweet = False
        retweet_of = None
        mentions: list[str] = []
        reply_to = None
        if float(rng.random()) < spec.p_interaction:
            same = float(rng.random()) < spec.interaction_homophily
            target_pool = [
                u for u in users_by_community[own if same else other] if u != author
            ]
            if not target_pool:
                target_pool = [u for u in users if u != author]
            if target_pool:
                target = target_pool[int(rng.integers(len(target_pool)))]
                kind = int(rng.integers(3))
                if kind == 0:
                    is_retweet = True
                    retweet_of = target
                elif kind == 1:
                    mentions = [target]
                else:
                    reply_to = target
                participants.add(target)

        timestamp = BASE_TIME + timedelta(seconds=int(rng.integers(window_seconds)))
        participants.add(author)
        records.append(
            TweetRecord(
                tweet_id=tweet_id,
                user_id=author,
                timestamp=timestamp,
                text=" ".join(f"#{t}" for t in tags),
                is_retweet=is_retweet,
                retweet_of_user=retweet_of,
                mentions=mentions,
                reply_to_user=reply_to,
            )
        )

    seed_sets: dict[str, set[str]] = {}
    for pole in (POLE_A, POLE_B):
        used = sorted(used_tags[pole])
        if not used:
            raise ConfigError(
                f"community {pole} has no hashtags in the generated corpus; "
                "increase n_tweets or p_within"
            )
        k = max(1, round(spec.seed_fraction * len(used)))
        picked = rng.choice(len(used), size=min(k, len(used)), replace=False)
        seed_sets[pole] = {used[int(i)] for i in picked}

    seeds = SeedLexicon(
        dimension_name=spec.dimension,
        pole_a_items=seed_sets[POLE_A],
        pole_b_items=seed_sets[POLE_B],
        value_a=1.0,
        value_b=-1.0,
    )
    hashtag_labels: dict[str, str] = {}
    for pole in (POLE_A, POLE_B):
        for tag in sorted(used_tags[pole]):
            hashtag_labels[tag] = pole
    for tag in sorted(used_tags[NEUTRAL_LABEL]):
        hashtag_labels[tag] = NEUTRAL_LABEL

    user_labels = {u: community[u] for u in sorted(participants)}
    user_counts = {
        POLE_A: sum(1 for v in user_labels.values() if v == POLE_A),
        POLE_B: sum(1 for v in user_labels.values() if v == POLE_B),
    }
    truth = SynthTruth(
        user_labels=user_labels,
        hashtag_labels=hashtag_labels,
        seeds=seeds,
        neutral_tweet_ids=neutral_tweet_ids,
        community_user_counts=user_counts,
        community_tweet_counts=tweet_counts,
    )
    return records, truth


def write_truth_labels(labels: dict[str, str], path: str | Path) -> None:
    """key <TAB> label rows, sorted; shared by the user and hashtag truth files."""
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(labels):
            fh.write(f"{key}\t{labels[key]}\n")
