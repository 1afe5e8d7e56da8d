#!/usr/bin/env python3
"""Stage timings for the ingest -> graph -> propagate -> score path."""

import argparse
import time

from polarlex.corpus import tokenize
from polarlex.lexgraph import build_cooccurrence
from polarlex.polarity import score_tweets, score_users
from polarlex.proplabel import propagate_greedy
from polarlex.synthgen import SynthSpec, generate


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-tweets", type=int, default=100_000)
    ap.add_argument("--n-users", type=int, default=2000)
    ap.add_argument("--hashtags-per-community", type=int, default=5000)
    ap.add_argument("--gamma", type=int, default=100)
    ap.add_argument("--rng-seed", type=int, default=7)
    return ap.parse_args()


def timed(label, fn):
    start = time.perf_counter()
    result = fn()
    print(f"{label:<12} {time.perf_counter() - start:8.2f}s")
    return result


def main():
    args = parse_args()
    spec = SynthSpec(
        n_users=args.n_users,
        n_tweets=args.n_tweets,
        hashtags_per_community=args.hashtags_per_community,
        seed_fraction=0.10,
        p_within=0.95,
        p_cross=0.05,
        rng_seed=args.rng_seed,
    )
    records, truth = timed("generate", lambda: generate(spec))
    start = time.perf_counter()
    tweets = timed("tokenize", lambda: [tokenize(r) for r in records])
    graph = timed("graph", lambda: build_cooccurrence(tweets, "hashtag"))
    lexicon = timed("propagate", lambda: propagate_greedy(graph, truth.seeds, gamma=args.gamma))
    tweet_scores = timed("score", lambda: score_tweets(tweets, lexicon))
    timed("users", lambda: score_users(records, tweet_scores))
    total = time.perf_counter() - start
    print(f"{'pipeline':<12} {total:8.2f}s  "
          f"({graph.num_nodes} nodes, {graph.num_edges} edges, "
          f"{len(lexicon.scores)} labeled)")


if __name__ == "__main__":
    main()
