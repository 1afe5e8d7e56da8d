"""Tweet ingestion, Unicode-aware tokenization, and per-user-per-day grouping."""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable

from .errors import ConfigError, DataError

REQUIRED_KEYS = ("tweet_id", "user_id", "timestamp", "text")


@dataclass
class TweetRecord:
    """One message. Interaction fields feed the communication network only."""

    tweet_id: str
    user_id: str
    timestamp: datetime
    text: str
    is_retweet: bool = False
    retweet_of_user: str | None = None
    mentions: list[str] = field(default_factory=list)
    reply_to_user: str | None = None

    def day(self) -> date:
        return self.timestamp.astimezone(timezone.utc).date()


@dataclass
class TokenizedTweet:
    """Normalized hashtags (deduplicated) and tokens (occurrences kept) of one tweet."""

    tweet_id: str
    hashtags: list[str]
    tokens: list[str]


@dataclass(frozen=True, order=True)
class UserDayKey:
    user_id: str
    day: date


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 instant; naive values are taken as UTC."""
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def record_from_json(obj: dict) -> TweetRecord:
    for key in REQUIRED_KEYS:
        if key not in obj or obj[key] is None:
            raise DataError(f"missing required key {key!r}")
    if not str(obj["tweet_id"]):
        raise DataError("empty tweet_id")
    mentions = obj.get("mentions") or []
    if not isinstance(mentions, list):
        raise DataError("mentions must be an array")
    return TweetRecord(
        tweet_id=str(obj["tweet_id"]),
        user_id=str(obj["user_id"]),
        timestamp=parse_timestamp(str(obj["timestamp"])),
        text=str(obj["text"]),
        is_retweet=bool(obj.get("is_retweet", False)),
        retweet_of_user=obj.get("retweet_of_user"),
        mentions=[str(m) for m in mentions],
        reply_to_user=obj.get("reply_to_user"),
    )


def load_corpus(
    path: str | Path, format: str = "jsonl", include_retweets: bool = True
) -> list[TweetRecord]:
    """Read a tweet corpus file, preserving input order.

    Rejects duplicate tweet_ids and malformed lines, naming the offender.
    Only the jsonl format exists today.
    """
    if format != "jsonl":
        raise ConfigError(f"unsupported corpus format {format!r}")
    records: list[TweetRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                record = record_from_json(obj)
            except (ValueError, DataError) as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
            if record.tweet_id in seen:
                raise DataError(
                    f"{path}: line {lineno}: duplicate tweet_id {record.tweet_id!r}"
                )
            seen.add(record.tweet_id)
            if record.is_retweet and not include_retweets:
                continue
            records.append(record)
    return records


def write_corpus(records: Iterable[TweetRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            obj = {
                "tweet_id": r.tweet_id,
                "user_id": r.user_id,
                "timestamp": r.timestamp.astimezone(timezone.utc).isoformat(),
                "text": r.text,
                "is_retweet": r.is_retweet,
                "retweet_of_user": r.retweet_of_user,
                "mentions": r.mentions,
                "reply_to_user": r.reply_to_user,
            }
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_piece(piece: str) -> str:
    """Strip leading/trailing punctuation, keeping a leading '#' or '@' marker."""
    end = len(piece)
    while end > 0 and _is_punct(piece[end - 1]):
        end -= 1
    start = 0
    while start < end and _is_punct(piece[start]):
        if piece[start] in "#@":
            break
        start += 1
    return piece[start:end]


def tokenize_text(text: str) -> tuple[list[str], list[str]]:
    """Split on Unicode whitespace and normalize; returns (hashtags, tokens).

    Hashtags are case-folded with '#' removed and deduplicated in first-seen
    order; every hashtag occurrence also counts as a token. Mentions and URLs
    are dropped entirely.
    """
    hashtags: list[str] = []
    seen_tags: set[str] = set()
    tokens: list[str] = []
    for raw in text.split():
        piece = _strip_piece(raw)
        if not piece or piece.startswith("@"):
            continue
        if piece[:7].lower() == "http://" or piece[:8].lower() == "https://":
            continue
        if piece.startswith("#"):
            name = piece.lstrip("#").casefold()
            if not name:
                continue
            tokens.append(name)
            if name not in seen_tags:
                seen_tags.add(name)
                hashtags.append(name)
        else:
            tokens.append(piece.casefold())
    return hashtags, tokens


def tokenize(record: TweetRecord) -> TokenizedTweet:
    hashtags, tokens = tokenize_text(record.text)
    return TokenizedTweet(tweet_id=record.tweet_id, hashtags=hashtags, tokens=tokens)


def group_by_user_day(corpus: Iterable[TweetRecord]) -> dict[UserDayKey, list[str]]:
    """Bucket tweet ids by (user, UTC day), keys in (user_id, day) order."""
    groups: dict[UserDayKey, list[str]] = {}
    for record in corpus:
        key = UserDayKey(record.user_id, record.day())
        groups.setdefault(key, []).append(record.tweet_id)
    return {key: groups[key] for key in sorted(groups)}
