"""Seed label propagation over weighted graphs.

Two variants: a greedy pass-based spreader whose slack schedule gradually
tolerates unlabeled neighbors, and a random-walk-with-restart scorer for
embedding similarity graphs.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DataError
from .ioutil import fmt9
from .lexgraph import CooccurrenceGraph

log = logging.getLogger(__name__)

STATUS_SEED = "seed"
STATUS_PROPAGATED = "propagated"
STATUS_UNLABELED = "unlabeled"

DEFAULT_GAMMA = 100
DEFAULT_MAX_OUTER = 1_000_000
DEFAULT_RESTART_PROB = 0.15
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 1000


@dataclass
class SeedLexicon:
    """Hand-curated anchors for one polarity dimension.

    Pole A items carry value_a, pole B items carry value_b. The sets must be
    disjoint and non-empty, and the two endpoint values must differ.
    """

    dimension_name: str
    pole_a_items: set[str]
    pole_b_items: set[str]
    value_a: float
    value_b: float

    def __post_init__(self) -> None:
        if not self.pole_a_items or not self.pole_b_items:
            raise DataError(f"{self.dimension_name}: both pole seed sets must be non-empty")
        overlap = self.pole_a_items & self.pole_b_items
        if overlap:
            raise DataError(
                f"{self.dimension_name}: seed items in both poles: {sorted(overlap)[:5]}"
            )
        if self.value_a == self.value_b:
            raise DataError(f"{self.dimension_name}: pole endpoint values must differ")

    @property
    def scale(self) -> tuple[float, float]:
        return (min(self.value_a, self.value_b), max(self.value_a, self.value_b))


@dataclass
class PolarityLexicon:
    """Scores for labeled items plus a status for every graph node.

    Unlabeled items carry no score; scores of labeled items lie within
    scale = (low endpoint, high endpoint).
    """

    dimension_name: str
    scores: dict[str, float]
    status: dict[str, str]
    scale: tuple[float, float]

    def labeled(self) -> dict[str, float]:
        return self.scores

    def items_with_status(self, wanted: str) -> list[str]:
        return sorted(i for i, s in self.status.items() if s == wanted)


def _seed_values_in_graph(
    seeds: SeedLexicon, present: set[str]
) -> dict[str, float]:
    values: dict[str, float] = {}
    for item in sorted(seeds.pole_a_items):
        if item in present:
            values[item] = seeds.value_a
    for item in sorted(seeds.pole_b_items):
        if item in present:
            values[item] = seeds.value_b
    return values


def propagate_greedy(
    graph: CooccurrenceGraph,
    seeds: SeedLexicon,
    gamma: int = DEFAULT_GAMMA,
    max_outer: int = DEFAULT_MAX_OUTER,
) -> PolarityLexicon:
    """Spread seed values by repeated sweeps of weighted neighbor averaging.

    A sweep visits unlabeled nodes in ascending lexicographic order. A node n
    with deg(n) neighbors, c of them labeled, is labeled when c >= 1 and
    c + slack >= deg(n); the slack grows as floor(pass_index / gamma). Its
    value is the edge-weighted average over labeled neighbors; labels set
    earlier in the same sweep are visible and labels are never revised.
    Stops after a sweep that labels nothing once the slack can no longer
    grow useful (slack >= max degree), or after max_outer sweeps.
    """
    if gamma < 1:
        raise ConfigError("gamma must be >= 1")
    if max_outer < 1:
        raise ConfigError("max_outer must be >= 1")
    adj = graph.adjacency()
    labels = _seed_values_in_graph(seeds, set(adj))
    if not labels:
        raise DataError(f"{seeds.dimension_name}: no seeds reachable in the graph")
    lo, hi = seeds.scale
    status = {n: STATUS_UNLABELED for n in adj}
    for item in labels:
        status[item] = STATUS_SEED

    deg = {n: len(nbrs) for n, nbrs in adj.items()}
    max_deg = max(deg.values(), default=0)
    labeled_count = {n: 0 for n in adj}
    for n in labels:
        for nbr, _ in adj[n]:
            labeled_count[nbr] += 1
    candidates = {n for n in adj if n not in labels and labeled_count[n] >= 1}

    i = 0
    while i < max_outer and candidates:
        slack = i // gamma
        heap = sorted(candidates)
        pending = set(heap)
        changed = False
        while heap:
            n = heapq.heappop(heap)
            pending.discard(n)
            c = labeled_count[n]
            if c < 1 or c + slack < deg[n]:
                continue
            num = math.fsum(labels[j] * w for j, w in adj[n] if j in labels)
            den = math.fsum(w for j, w in adj[n] if j in labels)
            labels[n] = min(hi, max(lo, num / den))
            status[n] = STATUS_PROPAGATED
            changed = True
            candidates.discard(n)
            for nbr, _ in adj[n]:
                labeled_count[nbr] += 1
                if nbr not in labels:
                    candidates.add(nbr)
                    if nbr > n and nbr not in pending:
                        heapq.heappush(heap, nbr)
                        pending.add(nbr)
        i += 1
        if not changed:
            if slack >= max_deg:
                break
            # every remaining pass at this slack is a no-op; jump to the
            # first pass index whose slack makes some candidate eligible
            target = min(deg[n] - labeled_count[n] for n in candidates)
            i = max(i, min(target * gamma, max_outer))

    return PolarityLexicon(
        dimension_name=seeds.dimension_name,
        scores=labels,
        status=status,
        scale=(lo, hi),
    )


def _restart_walk(
    matrix: sp.csr_matrix,
    inv_degree: np.ndarray,
    dangling: np.ndarray,
    seed_idx: list[int],
    restart_prob: float,
    tol: float,
    max_iter: int,
) -> np.ndarray:
    n = matrix.shape[0]
    s = np.zeros(n)
    s[seed_idx] = 1.0 / len(seed_idx)
    p = s.copy()
    for _ in range(max_iter):
        spread = matrix @ (p * inv_degree)
        if dangling.any():
            spread = spread + float(p[dangling].sum()) * s
        p_next = (1.0 - restart_prob) * spread + restart_prob * s
        delta = float(np.max(np.abs(p_next - p)))
        p = p_next
        if delta < tol:
            break
    return p


def propagate_random_walk(
    graph: CooccurrenceGraph,
    seeds: SeedLexicon,
    restart_prob: float = DEFAULT_RESTART_PROB,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> PolarityLexicon:
    """Score nodes by the ratio of two restart-walk visit distributions.

    One degree-normalized random walk restarts uniformly at pole A's in-graph
    seeds, another at pole B's; score = p_a / (p_a + p_b), so pole B anchors
    0 and pole A anchors 1. Walkers stranded on isolated nodes restart.
    Nodes never visited by either walk stay unlabeled. Requires value_a=1 and
    value_b=0, the endpoints the ratio construction yields.
    """
    if not 0.0 < restart_prob < 1.0:
        raise ConfigError("restart_prob must be in (0, 1)")
    if tol <= 0.0:
        raise ConfigError("tol must be positive")
    if max_iter < 1:
        raise ConfigError("max_iter must be >= 1")
    if (seeds.value_a, seeds.value_b) != (1.0, 0.0):
        raise ConfigError(
            f"{seeds.dimension_name}: random-walk propagation requires "
            "value_a=1 and value_b=0"
        )
    nodes = graph.nodes()
    index = {n: i for i, n in enumerate(nodes)}
    idx_a = [index[s] for s in sorted(seeds.pole_a_items) if s in index]
    idx_b = [index[s] for s in sorted(seeds.pole_b_items) if s in index]
    if not idx_a:
        raise DataError(f"{seeds.dimension_name}: pole_a has no seed items in the graph")
    if not idx_b:
        raise DataError(f"{seeds.dimension_name}: pole_b has no seed items in the graph")

    n = len(nodes)
    rows, cols, data = [], [], []
    for (a, b), w in graph.edges.items():
        ia, ib = index[a], index[b]
        rows.extend((ia, ib))
        cols.extend((ib, ia))
        data.extend((w, w))
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    degree = np.asarray(matrix.sum(axis=1)).ravel()
    dangling = degree == 0.0
    inv_degree = np.where(dangling, 0.0, 1.0 / np.where(dangling, 1.0, degree))

    p_a = _restart_walk(matrix, inv_degree, dangling, idx_a, restart_prob, tol, max_iter)
    p_b = _restart_walk(matrix, inv_degree, dangling, idx_b, restart_prob, tol, max_iter)

    total = p_a + p_b
    scores: dict[str, float] = {}
    status = {node: STATUS_UNLABELED for node in nodes}
    for node, i in index.items():
        if total[i] > 0.0:
            scores[node] = min(1.0, max(0.0, float(p_a[i] / total[i])))
            status[node] = STATUS_PROPAGATED
    for i in idx_a:
        scores[nodes[i]] = 1.0
        status[nodes[i]] = STATUS_SEED
    for i in idx_b:
        scores[nodes[i]] = 0.0
        status[nodes[i]] = STATUS_SEED
    return PolarityLexicon(
        dimension_name=seeds.dimension_name,
        scores=scores,
        status=status,
        scale=(0.0, 1.0),
    )


def write_lexicon(lexicon: PolarityLexicon, path: str | Path) -> None:
    """Serialize item/score/status rows under a dimension+scale header."""
    lo, hi = lexicon.scale
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#dimension={lexicon.dimension_name}\tscale={fmt9(lo)},{fmt9(hi)}\n")
        for item in sorted(lexicon.status):
            score = lexicon.scores.get(item)
            text = fmt9(score) if score is not None else ""
            fh.write(f"{item}\t{text}\t{lexicon.status[item]}\n")


def read_lexicon(path: str | Path) -> PolarityLexicon:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith("#dimension="):
            raise DataError(f"{path}: missing lexicon header")
        try:
            dim_part, scale_part = header[1:].split("\t")
            dimension = dim_part.split("=", 1)[1]
            lo, hi = (float(v) for v in scale_part.split("=", 1)[1].split(","))
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: malformed lexicon header") from exc
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise DataError(f"{path}: bad scale [{lo}, {hi}]")
        scores: dict[str, float] = {}
        status: dict[str, str] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}: line {lineno}: expected 3 fields")
            item, raw_score, st = parts
            if st not in (STATUS_SEED, STATUS_PROPAGATED, STATUS_UNLABELED):
                raise DataError(f"{path}: line {lineno}: unknown status {st!r}")
            if st == STATUS_UNLABELED:
                if raw_score:
                    raise DataError(f"{path}: line {lineno}: unlabeled item has a score")
                status[item] = st
                continue
            try:
                score = float(raw_score)
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: bad score") from exc
            if not lo <= score <= hi:
                raise DataError(
                    f"{path}: line {lineno}: score {score} outside scale [{lo}, {hi}]"
                )
            scores[item] = score
            status[item] = st
    return PolarityLexicon(
        dimension_name=dimension, scores=scores, status=status, scale=(lo, hi)
    )


def write_seed_lexicon(seeds: SeedLexicon, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"#dimension={seeds.dimension_name}"
            f"\tvalue_a={fmt9(seeds.value_a)}\tvalue_b={fmt9(seeds.value_b)}\n"
        )
        for item in sorted(seeds.pole_a_items):
            fh.write(f"{item}\tA\n")
        for item in sorted(seeds.pole_b_items):
            fh.write(f"{item}\tB\n")


def read_seed_lexicon(path: str | Path) -> SeedLexicon:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith("#dimension="):
            raise DataError(f"{path}: missing seed header")
        try:
            dim_part, a_part, b_part = header[1:].split("\t")
            dimension = dim_part.split("=", 1)[1]
            value_a = float(a_part.split("=", 1)[1])
            value_b = float(b_part.split("=", 1)[1])
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: malformed seed header") from exc
        if not (math.isfinite(value_a) and math.isfinite(value_b)):
            raise DataError(f"{path}: non-finite endpoint value")
        pole_a: set[str] = set()
        pole_b: set[str] = set()
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2 or parts[1] not in ("A", "B"):
                raise DataError(f"{path}: line {lineno}: expected 'item<TAB>A|B'")
            (pole_a if parts[1] == "A" else pole_b).add(parts[0])
    return SeedLexicon(
        dimension_name=dimension,
        pole_a_items=pole_a,
        pole_b_items=pole_b,
        value_a=value_a,
        value_b=value_b,
    )
