"""Bernoulli bond and site percolation on finite Cayley balls.

Every trial draws one uniform per entity (edge in bond mode, vertex in site
mode) from a Philox generator keyed by ``(seed, trial)``; entity ``i``
always receives the ``i``-th output, and an entity is open iff its uniform
is below ``p``.  Configurations at different ``p`` are therefore nested,
and results do not depend on how trials are spread over threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.stats import binomtest

from .errors import ValidationError

MODES = ("bond", "site")


@dataclass(frozen=True)
class PercolationGraph:
    """Finite graph with a marked origin and rim."""

    n: int
    edges: np.ndarray  # (E, 2) int
    origin: int
    rim: np.ndarray  # bool (n,)

    @classmethod
    def from_ball(cls, ball) -> "PercolationGraph":
        return cls(ball.n, np.ascontiguousarray(ball.undirected_edges(), dtype=np.int64),
                   0, ball.level == ball.R)

    @classmethod
    def from_adjacency(cls, adj, origin: int = 0, rim=None) -> "PercolationGraph":
        edges = sorted({(min(u, w), max(u, w)) for u, row in enumerate(adj) for w in row})
        rim_mask = np.zeros(len(adj), dtype=bool)
        if rim is not None:
            rim_mask[list(rim)] = True
        return cls(len(adj), np.array(edges, dtype=np.int64).reshape(-1, 2), origin, rim_mask)

    def entity_count(self, mode: str) -> int:
        return len(self.edges) if mode == "bond" else self.n


def _as_graph(obj) -> PercolationGraph:
    if isinstance(obj, PercolationGraph):
        return obj
    return PercolationGraph.from_ball(obj)


def _check_mode(mode: str):
    if mode not in MODES:
        raise ValidationError(f"mode must be bond or site, got {mode!r}")


def _check_p(p: float):
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must lie in [0, 1], got {p}")


def uniforms(seed: int, trial: int, count: int) -> np.ndarray:
    """The ``count`` uniforms of trial ``trial``; output ``i`` belongs to entity ``i``."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, trial & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key)).random(count)


@dataclass(frozen=True)
class PercolationConfig:
    mode: str
    p: float
    seed: int
    trial: int
    open: np.ndarray  # bool over edges (bond) or vertices (site)

    def packed(self) -> bytes:
        return np.packbits(self.open).tobytes()


def sample(ball, mode: str, p: float, seed: int, trial: int = 0) -> PercolationConfig:
    _check_mode(mode)
    _check_p(p)
    graph = _as_graph(ball)
    u = uniforms(seed, trial, graph.entity_count(mode))
    return PercolationConfig(mode, p, seed, trial, u < p)


def component_labels(graph: PercolationGraph, mode: str, open_mask: np.ndarray) -> np.ndarray:
    """Cluster label per vertex; ``-1`` for closed vertices in site mode."""
    e = graph.edges
    if mode == "bond":
        keep = e[open_mask]
        vert_open = None
    else:
        vert_open = open_mask
        keep = e[open_mask[e[:, 0]] & open_mask[e[:, 1]]] if len(e) else e
    adj = coo_matrix((np.ones(len(keep), dtype=np.int8), (keep[:, 0], keep[:, 1])),
                     shape=(graph.n, graph.n))
    _, labels = connected_components(adj, directed=False)
    labels = labels.astype(np.int64)
    if vert_open is not None:
        labels = np.where(vert_open, labels, -1)
    return labels


@dataclass(frozen=True)
class ClusterStats:
    cluster_count: int
    max_cluster_size: int
    origin_cluster_size: int
    crossing: bool
    boundary_clusters: int


def _stats_from_labels(graph: PercolationGraph, labels: np.ndarray, min_size: int = 1):
    valid = labels >= 0
    if not valid.any():
        return ClusterStats(0, 0, 0, False, 0), np.zeros(0, dtype=np.int64)
    sizes = np.bincount(labels[valid])
    present = sizes > 0
    o_lab = labels[graph.origin]
    o_size = int(sizes[o_lab]) if o_lab >= 0 else 0
    rim_labels = np.unique(labels[graph.rim & valid]) if graph.rim.any() else np.zeros(0, dtype=np.int64)
    crossing = bool(o_lab >= 0 and np.any(rim_labels == o_lab))
    stats = ClusterStats(int(present.sum()), int(sizes.max()), o_size, crossing, int(len(rim_labels)))
    return stats, sizes[rim_labels] if len(rim_labels) else np.zeros(0, dtype=np.int64)


def analyze(config: PercolationConfig, ball) -> ClusterStats:
    """Exact cluster decomposition of the open subgraph."""
    graph = _as_graph(ball)
    labels = component_labels(graph, config.mode, config.open)
    return _stats_from_labels(graph, labels)[0]


def _crosses(graph, mode, u, p) -> bool:
    labels = component_labels(graph, mode, u < p)
    o_lab = labels[graph.origin]
    return bool(o_lab >= 0 and np.any(labels[graph.rim] == o_lab))


def _chunks(trials: int, threads: int):
    threads = max(1, int(threads))
    size = -(-trials // threads)
    return [range(i, min(i + size, trials)) for i in range(0, trials, size)]


def _run_trials(fn, trials: int, threads: int) -> list:
    """``[fn(t) for t in range(trials)]``, with the same result for any thread count."""
    if threads <= 1 or trials <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda rng: [fn(t) for t in rng], _chunks(trials, threads)))
    return [x for part in parts for x in part]


def wilson_interval(hits: int, trials: int, level: float = 0.95):
    ci = binomtest(hits, trials).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class CurvePoint:
    p: float
    hits: int
    trials: int
    estimate: float
    ci_lo: float
    ci_hi: float


def crossing_matrix(ball, mode: str, p_grid: Sequence[float], trials: int, seed: int,
                    threads: int = 1) -> np.ndarray:
    """``out[t, j]``: whether the origin reaches the rim at ``p_grid[j]`` in trial ``t``.

    Crossing is increasing in ``p`` under the coupling, so each trial
    bisects over the sorted grid instead of testing every point.
    """
    _check_mode(mode)
    graph = _as_graph(ball)
    grid = [float(p) for p in p_grid]
    for p in grid:
        _check_p(p)
    order = np.argsort(grid, kind="stable")
    sorted_grid = [grid[i] for i in order]
    count = graph.entity_count(mode)

    def one(t):
        u = uniforms(seed, t, count)
        lo, hi = 0, len(sorted_grid)  # first crossing index lies in [lo, hi]
        while lo < hi:
            mid = (lo + hi) // 2
            if _crosses(graph, mode, u, sorted_grid[mid]):
                hi = mid
            else:
                lo = mid + 1
        row = np.zeros(len(grid), dtype=bool)
        row[order[lo:]] = True
        return row

    rows = _run_trials(one, trials, threads)
    return np.array(rows, dtype=bool).reshape(trials, len(grid))


def crossing_curve(ball, mode: str, p_grid: Sequence[float], trials: int, seed: int,
                   threads: int = 1) -> List[CurvePoint]:
    """Estimates of ``P_p(o <-> rim)`` with Wilson 95% intervals."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    hits = crossing_matrix(ball, mode, p_grid, trials, seed, threads).sum(axis=0)
    out = []
    for p, h in zip(p_grid, hits):
        lo, hi = wilson_interval(int(h), trials)
        out.append(CurvePoint(float(p), int(h), trials, int(h) / trials, lo, hi))
    return out


def pc_bracket(k: int, gr: float):
    """``[1/(k-1), 1/gr]``."""
    if k < 2 or gr <= 1:
        raise ValidationError("need k >= 2 and gr > 1")
    return 1.0 / (k - 1), 1.0 / gr


def multiplicity_probe(ball, mode: str, p: float, trials: int, seed: int,
                       min_size: int = 2, threads: int = 1) -> dict:
    """Histogram of the number of rim-touching clusters with at least ``min_size`` vertices.

    A finite-ball heuristic only; it carries ``"heuristic": true`` and never
    feeds a certificate.
    """
    _check_mode(mode)
    _check_p(p)
    if min_size < 1:
        raise ValidationError("min_size must be >= 1")
    graph = _as_graph(ball)
    count = graph.entity_count(mode)

    def one(t):
        labels = component_labels(graph, mode, uniforms(seed, t, count) < p)
        _, rim_sizes = _stats_from_labels(graph, labels)
        return int(np.sum(rim_sizes >= min_size))

    counts = _run_trials(one, trials, threads)
    hist: Dict[int, int] = {}
    for c in counts:
        hist[c] = hist.get(c, 0) + 1
    return {
        "heuristic": True,
        "mode": mode,
        "p": p,
        "trials": trials,
        "min_size": min_size,
        "histogram": {str(c): hist[c] for c in sorted(hist)},
        "mean": sum(counts) / trials if trials else 0.0,
    }
