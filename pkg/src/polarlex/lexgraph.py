"""Graphs that labels propagate over: co-occurrence networks and embedding k-NN graphs."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import TokenizedTweet
from .errors import ConfigError, DataError
from .ioutil import fmt9

log = logging.getLogger(__name__)

HASHTAG_MODE = "hashtag"
TOKEN_MODE = "token"

# floor for k-NN edge weights so angular similarity never hits zero
MIN_KNN_WEIGHT = 1e-6


@dataclass
class CooccurrenceGraph:
    """Weighted undirected graph over vocabulary items.

    Edge keys are ordered pairs (a, b) with a < b; weights are positive.
    node_frequency maps every node (including isolated ones) to the number
    of tweets containing it.
    """

    mode: str
    node_frequency: dict[str, int]
    edges: dict[tuple[str, str], float] = field(default_factory=dict)

    def nodes(self) -> list[str]:
        return sorted(self.node_frequency)

    @property
    def num_nodes(self) -> int:
        return len(self.node_frequency)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def weight(self, a: str, b: str) -> float:
        return self.edges.get((a, b) if a < b else (b, a), 0.0)

    def adjacency(self) -> dict[str, list[tuple[str, float]]]:
        """Neighbor lists for every node, sorted by neighbor name."""
        adj: dict[str, list[tuple[str, float]]] = {n: [] for n in self.node_frequency}
        for (a, b), w in self.edges.items():
            adj[a].append((b, w))
            adj[b].append((a, w))
        for lst in adj.values():
            lst.sort()
        return adj


@dataclass
class EmbeddingTable:
    """Token vocabulary with one fixed-dimension vector per token."""

    vocabulary: list[str]
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1]) if self.vectors.size else 0


def _edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


def build_cooccurrence(
    tweets: Sequence[TokenizedTweet],
    mode: str = HASHTAG_MODE,
    vocab_cap: int | None = None,
) -> CooccurrenceGraph:
    """Count, per tweet, every unordered pair of distinct items.

    Hashtag mode pairs the tweet's hashtags; token mode pairs the tweet's
    deduplicated token set, restricted to the vocab_cap most frequent tokens
    (ties broken lexicographically). Tweet order does not affect the result.
    """
    if mode not in (HASHTAG_MODE, TOKEN_MODE):
        raise ConfigError(f"unknown graph mode {mode!r}")
    item_sets: list[list[str]] = []
    freq: Counter[str] = Counter()
    for tw in tweets:
        items = tw.hashtags if mode == HASHTAG_MODE else sorted(set(tw.tokens))
        item_sets.append(items)
        freq.update(items)

    if mode == TOKEN_MODE and vocab_cap is not None and len(freq) > vocab_cap:
        ranked = sorted(freq, key=lambda t: (-freq[t], t))
        kept = set(ranked[:vocab_cap])
        item_sets = [[t for t in items if t in kept] for items in item_sets]
        freq = Counter({t: freq[t] for t in kept})

    edges: Counter[tuple[str, str]] = Counter()
    for items in item_sets:
        for a, b in combinations(sorted(items), 2):
            edges[(a, b)] += 1
    return CooccurrenceGraph(
        mode=mode,
        node_frequency=dict(freq),
        edges={pair: float(w) for pair, w in edges.items()},
    )


def load_embeddings(path: str | Path, vocab_cap: int | None = None) -> EmbeddingTable:
    """Read a token-per-line embedding file, keeping the first vocab_cap entries.

    The dimension is fixed by the first line; zero vectors are dropped with a
    logged count.
    """
    vocab: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    dim: int | None = None
    n_zero = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if vocab_cap is not None and len(vocab) >= vocab_cap:
                break
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                raise DataError(f"{path}: line {lineno}: expected token and values")
            token = parts[0]
            try:
                values = [float(v) for v in parts[1:]]
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: non-numeric field") from exc
            if not all(math.isfinite(v) for v in values):
                raise DataError(f"{path}: line {lineno}: non-finite value")
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise DataError(
                    f"{path}: line {lineno}: expected {dim} values, got {len(values)}"
                )
            if token in seen:
                log.warning("duplicate embedding token %r ignored (line %d)", token, lineno)
                continue
            if not any(values):
                n_zero += 1
                continue
            seen.add(token)
            vocab.append(token)
            rows.append(values)
    if n_zero:
        log.warning("dropped %d zero vectors from %s", n_zero, path)
    vectors = np.asarray(rows, dtype=np.float64) if rows else np.zeros((0, dim or 0))
    return EmbeddingTable(vocabulary=vocab, vectors=vectors)


def build_knn_graph(table: EmbeddingTable, k: int, block: int = 1024) -> CooccurrenceGraph:
    """Connect each token to its k nearest neighbors by cosine similarity.

    Edge weight is the angular similarity 1 - arccos(cos)/pi in (0, 1],
    clamped below at MIN_KNN_WEIGHT. Directed k-NN relations are unioned,
    keeping the larger weight. Zero vectors are dropped with a logged count.
    """
    norms = np.linalg.norm(table.vectors, axis=1)
    keep = norms > 0.0
    n_zero = int((~keep).sum())
    if n_zero:
        log.warning("dropped %d zero vectors before k-NN construction", n_zero)
    vocab = [t for t, ok in zip(table.vocabulary, keep) if ok]
    vectors = table.vectors[keep]
    n = len(vocab)
    if k < 1:
        raise ConfigError("knn_k must be >= 1")
    if k >= n:
        raise ConfigError(f"knn_k={k} must be smaller than the vocabulary size {n}")

    unit = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    edges: dict[tuple[str, str], float] = {}
    pad = min(k + 8, n - 1)
    for start in range(0, n, block):
        stop = min(start + block, n)
        sims = unit[start:stop] @ unit.T
        for local, row in enumerate(sims):
            i = start + local
            row[i] = -np.inf
            if pad < n - 1:
                cand = np.argpartition(-row, pad)[: pad + 1]
            else:
                cand = np.arange(n)
            cand = sorted(cand, key=lambda j: (-row[j], j))
            for j in cand[:k]:
                cos = min(1.0, max(-1.0, float(row[j])))
                w = max(MIN_KNN_WEIGHT, 1.0 - math.acos(cos) / math.pi)
                key = _edge_key(vocab[i], vocab[j])
                if w > edges.get(key, 0.0):
                    edges[key] = w
    return CooccurrenceGraph(
        mode=TOKEN_MODE,
        node_frequency={t: 0 for t in vocab},
        edges=edges,
    )


def write_graph(
    graph: CooccurrenceGraph, edges_path: str | Path, nodes_path: str | Path
) -> None:
    """Write the tab-separated edge list and the node-frequency sidecar."""
    with open(edges_path, "w", encoding="utf-8") as fh:
        fh.write(f"#mode={graph.mode}\n")
        for (a, b), w in sorted(graph.edges.items()):
            fh.write(f"{a}\t{b}\t{fmt9(w)}\n")
    with open(nodes_path, "w", encoding="utf-8") as fh:
        for node in graph.nodes():
            fh.write(f"{node}\t{graph.node_frequency[node]}\n")


def read_graph(edges_path: str | Path, nodes_path: str | Path) -> CooccurrenceGraph:
    node_frequency: dict[str, int] = {}
    with open(nodes_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise DataError(f"{nodes_path}: line {lineno}: expected 2 fields")
            node_frequency[parts[0]] = int(parts[1])
    mode = HASHTAG_MODE
    edges: dict[tuple[str, str], float] = {}
    with open(edges_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.startswith("#"):
                if line.startswith("#mode="):
                    mode = line[len("#mode=") :].strip()
                continue
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise DataError(f"{edges_path}: line {lineno}: expected 3 fields")
            a, b, raw_w = parts
            try:
                w = float(raw_w)
            except ValueError as exc:
                raise DataError(f"{edges_path}: line {lineno}: bad weight") from exc
            if a == b:
                raise DataError(f"{edges_path}: line {lineno}: self-loop {a!r}")
            if not math.isfinite(w) or w <= 0:
                raise DataError(f"{edges_path}: line {lineno}: non-positive weight")
            for node in (a, b):
                node_frequency.setdefault(node, 0)
            edges[_edge_key(a, b)] = w
    return CooccurrenceGraph(mode=mode, node_frequency=node_frequency, edges=edges)
