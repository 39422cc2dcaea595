"""Closed-walk counts, the regular-tree path table and its Green function.

Graphs are plain adjacency lists (``adj[v]`` lists the neighbours of ``v``);
:func:`as_adjacency` also accepts a :class:`~coxperc.cayley.CayleyBall`, a
networkx graph or a dict.  All counts are exact Python integers.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence

from .errors import BudgetExceeded, NotRegularWithinHorizon, OutsideDisc, ValidationError
from .polynomials import series_divide

MAX_WALK_N = 40
MAX_SIMPLE_N = 14
DFS_BUDGET = 50_000_000


def as_adjacency(graph) -> List[List[int]]:
    if hasattr(graph, "adjacency") and hasattr(graph, "nbr"):
        return graph.adjacency()
    if hasattr(graph, "nodes") and hasattr(graph, "neighbors"):
        nodes = sorted(graph.nodes())
        pos = {u: i for i, u in enumerate(nodes)}
        return [sorted(pos[w] for w in graph.neighbors(u)) for u in nodes]
    if isinstance(graph, dict):
        nodes = sorted(graph)
        pos = {u: i for i, u in enumerate(nodes)}
        return [sorted(pos[w] for w in graph[u]) for u in nodes]
    return [list(row) for row in graph]


def bfs_distances(adj, o: int, limit: int = None) -> Dict[int, int]:
    dist = {o: 0}
    todo = deque([o])
    while todo:
        u = todo.popleft()
        if limit is not None and dist[u] >= limit:
            continue
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                todo.append(w)
    return dist


def _restrict(adj, o: int, radius: int):
    """Relabelled subgraph on vertices within ``radius`` of ``o`` (``o`` becomes 0)."""
    dist = bfs_distances(adj, o, radius)
    order = sorted(dist, key=lambda v: (dist[v], v))
    pos = {v: i for i, v in enumerate(order)}
    sub = [[pos[w] for w in adj[v] if w in pos] for v in order]
    return sub, [dist[v] for v in order], order


@dataclass(frozen=True)
class WalkCounts:
    C: List[int]
    a_star: List[int]
    a_simple: List[int]

    def rows(self):
        n = len(self.C)
        for i in range(n):
            yield (i, self.C[i], self.a_star[i],
                   self.a_simple[i] if i < len(self.a_simple) else None)


def closed_walks(adj, o: int, N: int) -> List[int]:
    """``C_n`` for ``n = 0..N`` by repeated adjacency application."""
    sub, _, _ = _restrict(adj, o, N // 2)
    vec = [0] * len(sub)
    vec[0] = 1
    out = [1]
    for _ in range(N):
        vec = [sum(vec[w] for w in row) for row in sub]
        out.append(vec[0])
    return out


def nonbacktracking_walks(adj, o: int, N: int) -> List[int]:
    """``a*_n`` for ``n = 0..N`` via the directed-edge transfer operator.

    State ``(u, v)`` counts walks whose last step was ``u -> v``; a step to
    ``w`` is allowed for ``w != u``.  The closing step into ``o`` is not
    compared with the first step, so ``a*_n`` is not cyclically reduced.
    """
    sub, _, _ = _restrict(adj, o, N // 2)
    state = {(0, v): 1 for v in sub[0]}
    out = [1, 0] if N >= 1 else [1]
    for _ in range(2, N + 1):
        total_in = {}
        for (u, v), c in state.items():
            total_in[v] = total_in.get(v, 0) + c
        nxt = {}
        for v, tot in total_in.items():
            for w in sub[v]:
                c = tot - state.get((w, v), 0)
                if c:
                    nxt[(v, w)] = c
        state = nxt
        out.append(sum(c for (u, v), c in state.items() if v == 0))
    return out[:N + 1]


def simple_cycles(adj, o: int, N: int, budget: int = DFS_BUDGET) -> List[int]:
    """Oriented cycles through ``o`` that repeat no vertex, ``n = 0..N``.

    Conventions: ``a_0 = 1``, ``a_1 = 0`` and ``a_2 = deg(o)`` (out and back
    uses no vertex twice).  Each undirected cycle of length >= 3 counts twice.
    """
    if N > MAX_SIMPLE_N:
        raise BudgetExceeded(f"simple-cycle DFS limited to N <= {MAX_SIMPLE_N}")
    sub, dist, _ = _restrict(adj, o, N // 2)
    counts = [0] * (N + 1)
    counts[0] = 1
    if N >= 2:
        counts[2] = len(sub[0])
    on_path = [False] * len(sub)
    on_path[0] = True
    steps = 0
    # iterative DFS: stack of (vertex, depth, neighbour iterator)
    stack = [(0, 0, iter(sub[0]))]
    while stack:
        v, depth, it = stack[-1]
        advanced = False
        for w in it:
            steps += 1
            if steps > budget:
                raise BudgetExceeded(f"simple-cycle DFS exceeded {budget} steps")
            if w == 0:
                if depth + 1 >= 3:
                    counts[depth + 1] += 1
                continue
            if on_path[w] or depth + 1 + dist[w] > N:
                continue
            on_path[w] = True
            stack.append((w, depth + 1, iter(sub[w])))
            advanced = True
            break
        if not advanced:
            stack.pop()
            on_path[v] = False
    return counts


def count_walks(graph, o: int, N: int, simple_N: int = None) -> WalkCounts:
    """``C``, ``a*`` up to ``N`` and ``a_simple`` up to ``min(N, simple_N)``."""
    if N > MAX_WALK_N:
        raise BudgetExceeded(f"walk counts limited to N <= {MAX_WALK_N}")
    adj = as_adjacency(graph)
    simple_N = min(N, MAX_SIMPLE_N) if simple_N is None else min(simple_N, N)
    return WalkCounts(closed_walks(adj, o, N), nonbacktracking_walks(adj, o, N),
                      simple_cycles(adj, o, simple_N))


# --- regular tree -------------------------------------------------------------

@dataclass(frozen=True)
class TreePathTable:
    """``c[n][d]``: length-``n`` walks in ``T_k`` between two vertices at distance ``d``."""

    k: int
    c: List[List[int]]

    def __getitem__(self, nd):
        n, d = nd
        row = self.c[n]
        return row[d] if d < len(row) else 0


def tree_path_table(k: int, N: int) -> TreePathTable:
    """DP on the distance to the target: from ``j > 0`` one move down and ``k-1`` up; from 0, ``k`` up."""
    if k < 2:
        raise ValidationError("tree degree must be >= 2")
    rows = [[1] + [0] * N]
    for _ in range(N):
        prev = rows[-1]
        row = [0] * (N + 1)
        row[0] = k * prev[1] if N >= 1 else 0
        for d in range(1, N + 1):
            up = prev[d + 1] if d + 1 <= N else 0
            row[d] = prev[d - 1] + (k - 1) * up
        rows.append(row)
    # a walk from distance d back to 0 in n steps never climbs above (n+d)/2,
    # so truncating at distance N is exact for n, d <= N
    return TreePathTable(k, rows)


def tree_return_counts(k: int, n_max: int) -> List[int]:
    """``c[2n][0]`` for ``n = 0..n_max`` with only the reachable band kept."""
    N = 2 * n_max
    row = [1]
    out = [1]
    for step in range(1, N + 1):
        width = min(step, N - step) + 1
        new = [0] * width
        for d in range(width):
            down = row[d - 1] if 1 <= d <= len(row) else 0
            up = row[d + 1] if d + 1 < len(row) else 0
            new[d] = k * up if d == 0 else down + (k - 1) * up
        row = new
        if step % 2 == 0:
            out.append(row[0])
    return out


def rho_tilde_tree(k: int) -> float:
    """Growth rate of closed walks in ``T_k``: ``2*sqrt(k-1)``."""
    if k < 2:
        raise ValidationError("tree degree must be >= 2")
    return 2 * math.sqrt(k - 1)


def rho_tilde_tree_estimate(k: int, n: int = 500) -> float:
    """``c[2n][0] ** (1/(2n))`` from the DP."""
    c = tree_return_counts(k, n)[n]
    return math.exp(math.log(c) / (2 * n))


# --- universal cover identity -------------------------------------------------

def check_regular(adj, o: int, radius: int) -> int:
    dist = bfs_distances(adj, o, radius)
    k = len(adj[o])
    bad = [v for v, d in dist.items() if d <= radius and len(adj[v]) != k]
    if bad:
        raise NotRegularWithinHorizon(
            f"{len(bad)} vertices within distance {radius} have degree != {k}")
    return k


def verify_universal_cover_identity(graph, o: int, N: int) -> dict:
    """Check ``C_n = sum_d a*_d c[n][d]`` for ``n <= N``."""
    adj = as_adjacency(graph)
    k = check_regular(adj, o, N // 2)
    C = closed_walks(adj, o, N)
    a_star = nonbacktracking_walks(adj, o, N)
    table = tree_path_table(k, N)
    rows, failures = [], []
    for n in range(N + 1):
        rhs = sum(a_star[d] * table[n, d] for d in range(n + 1))
        rows.append((n, C[n], rhs))
        if rhs != C[n]:
            failures.append({"n": n, "C": C[n], "sum": rhs})
    return {"k": k, "N": N, "rows": rows, "failures": failures, "ok": not failures}


# --- Green function -----------------------------------------------------------

def _disc_radius(k: int) -> float:
    return 1 / (2 * math.sqrt(k - 1))


def _check_disc(k: int, z: float):
    if abs(z) > _disc_radius(k) * (1 + 1e-15):
        raise OutsideDisc(f"|z| = {abs(z)} outside 1/(2 sqrt(k-1)) for k={k}")


def _root(k: int, z: float) -> float:
    """``sqrt(1 - 4(k-1) z**2)``; a radicand within rounding of 0 is the boundary value 0."""
    _check_disc(k, z)
    rad = 1 - 4 * (k - 1) * z * z
    return 0.0 if rad < 1e-14 else math.sqrt(rad)


def f_map(k: int, z: float) -> float:
    """``2z / (1 + sqrt(1 - 4(k-1) z**2))``."""
    return 2 * z / (1 + _root(k, z))


def a_map(k: int, z: float) -> float:
    """``2(k-1) / (k - 2 + k sqrt(1 - 4(k-1) z**2))``."""
    return 2 * (k - 1) / (k - 2 + k * _root(k, z))


def green_function_eval(k: int, d: int, z: float) -> float:
    """``G(d, k z) = A(z) f(z)**d``: generating function of ``c[n][d]`` in ``z``."""
    if d == 0 and z == 0:
        return 1.0
    return a_map(k, z) * f_map(k, z) ** d


def _sqrt_series(k: int, order: int) -> List[Fraction]:
    """Taylor coefficients of ``sqrt(1 - 4(k-1) z**2)``."""
    out = [Fraction(0)] * order
    coef = Fraction(1)  # binom(1/2, j)
    for j in range(0, (order + 1) // 2):
        if 2 * j < order:
            out[2 * j] = coef * Fraction(-4 * (k - 1)) ** j
        coef = coef * (Fraction(1, 2) - j) / (j + 1)
    return out


def _mul(a, b, order):
    out = [Fraction(0)] * order
    for i, x in enumerate(a[:order]):
        if x:
            for j in range(order - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def green_series(k: int, d: int, order: int) -> List[Fraction]:
    """Exact Taylor coefficients of ``A(z) f(z)**d`` up to ``z**(order-1)``."""
    sq = _sqrt_series(k, order)
    one_plus = [Fraction(2)] + sq[1:]  # 1 + S
    f = series_divide([0, 2], one_plus, order)
    den_a = [k * c for c in sq]
    den_a[0] += k - 2
    a = series_divide([2 * (k - 1)], den_a, order)
    out = a
    for _ in range(d):
        out = _mul(out, f, order)
    return out


# --- return probabilities -----------------------------------------------------

def return_probabilities(graph, o: int, N: int) -> List[float]:
    """``p^(n)(o, o)`` from the powers of the simple random walk matrix."""
    import numpy as np
    adj = as_adjacency(graph)
    sub, _, order = _restrict(adj, o, N // 2)
    full = [len(adj[v]) for v in order]
    n = len(sub)
    P = np.zeros((n, n))
    for v, row in enumerate(sub):
        for w in row:
            P[v, w] = 1.0 / full[v]
    vec = np.zeros(n)
    vec[0] = 1.0
    out = [1.0]
    for _ in range(N):
        vec = vec @ P
        out.append(float(vec[0]))
    return out


# --- small test graphs --------------------------------------------------------

def complete_graph(n: int) -> List[List[int]]:
    return [[w for w in range(n) if w != v] for v in range(n)]


def petersen_graph() -> List[List[int]]:
    adj = [[] for _ in range(10)]
    for i in range(5):
        for a, b in ((i, (i + 1) % 5), (i, i + 5), (5 + i, 5 + (i + 2) % 5)):
            adj[a].append(b)
            adj[b].append(a)
    return [sorted(row) for row in adj]


def tree_ball(k: int, R: int) -> List[List[int]]:
    """Ball of radius ``R`` in ``T_k`` around vertex 0."""
    adj = [[]]
    frontier = [0]
    for _ in range(R):
        nxt = []
        for v in frontier:
            need = k - len(adj[v])
            for _ in range(need):
                w = len(adj)
                adj.append([v])
                adj[v].append(w)
                nxt.append(w)
        frontier = nxt
    return adj
