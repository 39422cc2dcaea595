"""Right-angled polygon groups in the upper half-plane and slab connection estimates.

The regular right-angled ``p``-gon is centred at ``o = (0, 0, 1)`` in the
hyperboloid model with form ``J = diag(1, 1, -1)``.  Its side normals are
``n_i = (cosh a cos t_i, cosh a sin t_i, sinh a)`` with ``t_i = 2 pi i / p``,
and ``tanh(a)**2 = cos(2 pi / p)`` makes adjacent sides orthogonal.  The
vertex ``g`` of the Cayley ball sits at ``M_g o`` where ``M_gs = M_g R_s``.
Group elements come from the exact Cayley ball; coordinates are only read
off, never used to identify elements.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .cayley import DEFAULT_BUDGET, build_ball
from .coxeter import polygon
from .errors import BudgetExceeded, RadiusTooLarge, ValidationError
from .percolation import (PercolationGraph, _run_trials, component_labels, uniforms,
                          wilson_interval)

J = np.diag([1.0, 1.0, -1.0])
SLAB_NOTE = ("restriction keeps vertices with h <= H and edges with both endpoints kept; "
             "only the (h, R) = (1, identity) representative is estimated")


def minkowski(x, y) -> float:
    return float(x @ J @ y)


def apothem(p_sides: int) -> float:
    return math.atanh(math.sqrt(math.cos(2 * math.pi / p_sides)))


def side_normals(p_sides: int) -> np.ndarray:
    a = apothem(p_sides)
    t = 2 * math.pi * np.arange(p_sides) / p_sides
    return np.stack([math.cosh(a) * np.cos(t), math.cosh(a) * np.sin(t),
                     np.full(p_sides, math.sinh(a))], axis=1)


def reflection_matrix(n: np.ndarray) -> np.ndarray:
    """``R(x) = x - 2 <x, n> n`` as a matrix."""
    return np.eye(3) - 2.0 * np.outer(n, n @ J)


def to_half_plane(points: np.ndarray) -> np.ndarray:
    """Hyperboloid points to ``(x, h)`` via the disc ``w = (x1 + i x2)/(1 + x3)``."""
    w = (points[:, 0] + 1j * points[:, 1]) / (1.0 + points[:, 2])
    z = 1j * (1 + w) / (1 - w)
    return np.stack([z.real, z.imag], axis=1)


@dataclass(frozen=True)
class SlabEmbedding:
    p_sides: int
    R: int
    ball: object
    points: np.ndarray  # hyperboloid, (n, 3)
    coords: np.ndarray  # half-plane (x, h), (n, 2)

    @property
    def x(self) -> np.ndarray:
        return self.coords[:, 0]

    @property
    def h(self) -> np.ndarray:
        return self.coords[:, 1]

    def hyperbolic_distance(self, u: int, v: int) -> float:
        c = -minkowski(self.points[u], self.points[v])
        return math.acosh(max(1.0, c))

    def edge_lengths(self) -> np.ndarray:
        e = self.ball.undirected_edges()
        pu, pv = self.points[e[:, 0]], self.points[e[:, 1]]
        c = -(pu[:, 0] * pv[:, 0] + pu[:, 1] * pv[:, 1] - pu[:, 2] * pv[:, 2])
        return np.arccosh(np.maximum(c, 1.0))


def embed_polygon_group(p_sides: int, R: int, budget: int = DEFAULT_BUDGET) -> SlabEmbedding:
    if p_sides < 5:
        raise ValidationError("right-angled hyperbolic polygons need p >= 5")
    try:
        ball = build_ball(polygon(p_sides), R, budget=budget)
    except RadiusTooLarge as exc:
        raise BudgetExceeded(str(exc)) from exc
    refl = [reflection_matrix(n) for n in side_normals(p_sides)]
    mats = np.empty((ball.n, 3, 3))
    mats[0] = np.eye(3)
    # BFS ids: every parent precedes its children
    for v in range(1, ball.n):
        mats[v] = mats[ball.parent[v]] @ refl[ball.parent_gen[v]]
    points = mats[:, :, 2].copy()  # M_g applied to o = e_3
    coords = to_half_plane(points)
    coords[0] = (0.0, 1.0)
    if not np.all(np.isfinite(coords)) or np.any(coords[:, 1] <= 0):
        raise ValidationError("embedding produced a point off the half-plane")
    return SlabEmbedding(p_sides, R, ball, points, coords)


def d_boundary(emb: SlabEmbedding, u: int, v: int) -> float:
    """Distance of the projections to the boundary line: ``|x(u) - x(v)|``."""
    return abs(float(emb.x[u] - emb.x[v]))


def cluster_size(emb: SlabEmbedding, vertices: Sequence[int]) -> float:
    """``r(C) = max_{v in C} d_boundary(o, v)``."""
    vertices = np.asarray(vertices, dtype=np.int64)
    if len(vertices) == 0:
        return 0.0
    return float(np.max(np.abs(emb.x[vertices] - emb.x[0])))


@dataclass(frozen=True)
class Slab:
    """Subgraph inside ``{h <= H}``: local ids, map to ball ids and ball edge ids."""

    H: float
    vertices: np.ndarray
    edges: np.ndarray  # local (E, 2)
    edge_ids: np.ndarray  # index into ball.undirected_edges()
    origin: Optional[int]

    @property
    def n(self) -> int:
        return len(self.vertices)


def slab_restrict(emb: SlabEmbedding, H: float) -> Slab:
    if not H > 0:
        raise ValidationError("slab height must be positive")
    keep = emb.h <= H
    local = -np.ones(emb.ball.n, dtype=np.int64)
    verts = np.nonzero(keep)[0]
    local[verts] = np.arange(len(verts))
    e = emb.ball.undirected_edges()
    inside = keep[e[:, 0]] & keep[e[:, 1]]
    ids = np.nonzero(inside)[0]
    origin = int(local[0]) if keep[0] else None
    return Slab(H, verts, np.stack([local[e[ids, 0]], local[e[ids, 1]]], axis=1).reshape(-1, 2),
                ids, origin)


def default_r_grid(rmax: float, step: float = 0.25) -> np.ndarray:
    """``0, step, ..., rmax``; ``r = 0`` is kept (``g(0) = 1`` exactly in bond mode)."""
    n = int(round(rmax / step))
    return step * np.arange(0, n + 1)


@dataclass(frozen=True)
class GEstimate:
    p: float
    r_grid: np.ndarray
    g_hat: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    hits: np.ndarray
    trials: int
    psi_hat: Optional[float]
    r2: Optional[float]
    fit_points: int
    note: str = field(default=SLAB_NOTE)

    def rows(self):
        for r, g, lo, hi in zip(self.r_grid, self.g_hat, self.ci_lo, self.ci_hi):
            yield float(r), float(g), float(lo), float(hi)


def cluster_radii(emb: SlabEmbedding, slab: Slab, p: float, trials: int, seed: int,
                  mode: str = "bond", threads: int = 1) -> np.ndarray:
    """``r(C_o)`` per trial; ``nan`` when the origin is absent or closed.

    Uniforms are drawn over the whole ball (edges or vertices) so slabs of
    different height share one coupling.
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must lie in [0, 1], got {p}")
    if slab.origin is None:
        return np.full(trials, np.nan)
    graph = PercolationGraph(slab.n, slab.edges, slab.origin, np.zeros(slab.n, dtype=bool))
    n_edges = len(emb.ball.undirected_edges())
    absx = np.abs(emb.x[slab.vertices] - emb.x[0])

    def one(t):
        if mode == "bond":
            u = uniforms(seed, t, n_edges)[slab.edge_ids]
        else:
            u = uniforms(seed, t, emb.ball.n)[slab.vertices]
        labels = component_labels(graph, mode, u < p)
        lab = labels[slab.origin]
        if lab < 0:
            return float("nan")
        return float(absx[labels == lab].max())

    return np.array(_run_trials(one, trials, threads), dtype=float)


def fit_exponential(r: np.ndarray, g: np.ndarray, floor: float):
    """Least squares of ``log g`` on ``r`` over points with ``g >= floor``; returns ``(psi, r2, used)``."""
    sel = g >= max(floor, np.finfo(float).tiny)
    if sel.sum() < 2:
        return None, None, int(sel.sum())
    x, y = r[sel], np.log(g[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(-slope), r2, int(sel.sum())


def estimate_g(emb: SlabEmbedding, H: float, p: float, r_grid: Sequence[float], trials: int,
               seed: int, mode: str = "bond", threads: int = 1) -> GEstimate:
    """Monte Carlo ``P(o <-> {d_boundary >= r})`` inside the slab, with a log-linear fit."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    slab = slab_restrict(emb, H)
    radii = cluster_radii(emb, slab, p, trials, seed, mode, threads)
    r_grid = np.asarray(r_grid, dtype=float)
    finite = np.where(np.isnan(radii), -1.0, radii)
    hits = (finite[None, :] >= r_grid[:, None]).sum(axis=1)
    cis = [wilson_interval(int(h), trials) for h in hits]
    g_hat = hits / trials
    psi, r2, used = fit_exponential(r_grid, g_hat, 10.0 / trials)
    return GEstimate(p, r_grid, g_hat, np.array([c[0] for c in cis]),
                     np.array([c[1] for c in cis]), hits, trials, psi, r2, used)
