"""Finite balls in Cayley graphs of Coxeter systems.

Elements are identified exactly, in one of two ways:

* ``matrix``: for right-angled systems (labels 2 or infinity) an element
  ``g`` is keyed by the integer vector ``x_t = f(g e_t)`` where ``f`` is the
  all-ones functional on the geometric representation.  Right
  multiplication by ``s`` updates ``x_t -= 2 B(s,t) x_s``.
* ``word``: any system.  An element is keyed by the lexicographically least
  of its reduced words; every reduced word of a discovered element is
  registered (they form one braid-move class), so ``w + s`` is looked up
  directly.

The BFS visits levels in order and generators in index order, so vertex
ids are deterministic.
"""
from __future__ import annotations

import io
import json
import struct
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .coxeter import INF, CoxeterSystem, build_nerve, is_flag_sphere_triangulation
from .errors import (LevelTie, ModeUnsupported, RadiusTooLarge, ValidationError)
from .spectral import VertexProfile

DEFAULT_BUDGET = 500_000
MODES = ("auto", "matrix", "word")


@dataclass(frozen=True)
class CayleyBall:
    """Radius-``R`` ball around the identity (vertex 0).

    ``nbr[v, s]`` is the id of ``v*s`` or ``-1`` when it lies outside the
    ball.  ``parent``/``parent_gen`` record the BFS tree.  After
    :func:`orient_and_profile`, ``r[v]`` counts neighbours one level down and
    ``q[v, i]`` counts neighbours one level up whose ``r`` equals ``i``;
    ``q`` is only meaningful where ``complete`` holds (level <= R-1).
    """

    system: CoxeterSystem
    R: int
    mode: str
    level: np.ndarray
    nbr: np.ndarray
    parent: np.ndarray
    parent_gen: np.ndarray
    keys: Optional[list] = field(default=None, repr=False, compare=False)
    r: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    q: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def k(self) -> int:
        return self.system.k

    @property
    def n(self) -> int:
        return len(self.level)

    @property
    def spheres(self) -> List[int]:
        return np.bincount(self.level, minlength=self.R + 1).tolist()

    @property
    def complete(self) -> np.ndarray:
        return self.level <= self.R - 1

    def edges(self) -> np.ndarray:
        """Oriented edges as rows ``(tail, head, gen)`` with ``level[head] = level[tail] + 1``."""
        v, s = np.nonzero(self.nbr >= 0)
        w = self.nbr[v, s]
        up = self.level[w] > self.level[v]
        out = np.stack([v[up], w[up], s[up]], axis=1)
        return out[np.lexsort((out[:, 2], out[:, 0]))]

    def undirected_edges(self) -> np.ndarray:
        """Rows ``(u, w)``, one per edge, in the order of :meth:`edges`."""
        return self.edges()[:, :2]

    def adjacency(self) -> List[List[int]]:
        return [[int(w) for w in row if w >= 0] for row in self.nbr]

    def word(self, v: int) -> Tuple[int, ...]:
        """A reduced word for vertex ``v`` (the canonical one in word mode)."""
        if self.keys is not None and self.mode == "word":
            return self.keys[v]
        out = []
        while v != 0:
            out.append(int(self.parent_gen[v]))
            v = int(self.parent[v])
        return tuple(reversed(out))

    def profile(self, v: int) -> VertexProfile:
        if self.r is None:
            raise ValidationError("ball has no profiles; call orient_and_profile")
        if not self.complete[v]:
            raise ValidationError(f"vertex {v} is on the rim; its profile is incomplete")
        q = tuple(int(x) for x in self.q[v, 1:4])
        return VertexProfile(int(self.r[v]), q, self.k)

    def to_json_dict(self) -> dict:
        return {"R": self.R, "spheres": self.spheres,
                "edges": self.edges().tolist()}


# --- construction -------------------------------------------------------------

def resolve_mode(system: CoxeterSystem, mode: str) -> str:
    if mode not in MODES:
        raise ValidationError(f"unknown ball mode {mode!r}")
    if mode == "auto":
        return "matrix" if system.is_right_angled() else "word"
    if mode == "matrix" and not system.is_right_angled():
        raise ModeUnsupported("integer-matrix mode needs every label in {2, inf}")
    return mode


class _MatrixKeys:
    def __init__(self, system: CoxeterSystem):
        k = system.k
        self.far = [[t for t in range(k) if t != s and system.label(s, t) == INF]
                    for s in range(k)]

    def identity(self, k):
        return (1,) * k

    def step(self, x, s):
        y = list(x)
        xs = x[s]
        y[s] = -xs
        for t in self.far[s]:
            y[t] = x[t] + 2 * xs
        return tuple(y)


class _WordKeys:
    """Registry of every reduced word of every discovered element."""

    def __init__(self, system: CoxeterSystem, word_budget: int):
        self.system = system
        self.k = system.k
        self.index: Dict[tuple, int] = {}
        self.word_budget = word_budget
        self.moves = {}
        for s in range(self.k):
            for t in range(self.k):
                m = system.label(s, t)
                if s != t and m != INF:
                    self.moves[(s, t)] = (tuple((s, t)[i % 2] for i in range(m)),
                                          tuple((t, s)[i % 2] for i in range(m)))

    def braid_class(self, word: tuple) -> List[tuple]:
        seen = {word}
        todo = [word]
        while todo:
            w = todo.pop()
            n = len(w)
            for i in range(n - 1):
                pair = (w[i], w[i + 1])
                move = self.moves.get(pair)
                if move is None:
                    continue
                src, dst = move
                m = len(src)
                if i + m <= n and w[i:i + m] == src:
                    nw = w[:i] + dst + w[i + m:]
                    if nw not in seen:
                        seen.add(nw)
                        todo.append(nw)
        return sorted(seen)

    def register(self, word: tuple, vid: int) -> tuple:
        words = self.braid_class(word)
        for w in words:
            self.index[w] = vid
        if len(self.index) > self.word_budget:
            raise RadiusTooLarge(f"word registry exceeded {self.word_budget} entries")
        return words[0]


def build_ball(system: CoxeterSystem, R: int, mode: str = "auto",
               budget: int = DEFAULT_BUDGET, profile: bool = True) -> CayleyBall:
    """BFS ball of radius ``R``; raises :class:`RadiusTooLarge` past ``budget`` vertices."""
    if R < 0:
        raise ValidationError("radius must be non-negative")
    mode = resolve_mode(system, mode)
    k = system.k
    level = [0]
    parent = [-1]
    pgen = [-1]
    nbr_rows = [[-1] * k]
    if mode == "matrix":
        mk = _MatrixKeys(system)
        ident = mk.identity(k)
        index = {ident: 0}
        keys = [ident]
    else:
        wk = _WordKeys(system, 40 * budget)
        wk.register((), 0)
        keys = [()]
    frontier = [0]
    for lvl in range(R):
        nxt = []
        for v in frontier:
            row = nbr_rows[v]
            for s in range(k):
                if row[s] >= 0:
                    continue
                if mode == "matrix":
                    key = mk.step(keys[v], s)
                    w = index.get(key)
                else:
                    key = keys[v] + (s,)
                    w = wk.index.get(key)
                if w is None:
                    w = len(level)
                    if w >= budget:
                        raise RadiusTooLarge(f"ball of radius {R} exceeds {budget} vertices")
                    level.append(lvl + 1)
                    parent.append(v)
                    pgen.append(s)
                    nbr_rows.append([-1] * k)
                    if mode == "matrix":
                        index[key] = w
                        keys.append(key)
                    else:
                        keys.append(wk.register(key, w))
                    nxt.append(w)
                row[s] = w
                nbr_rows[w][s] = v
        frontier = nxt
    ball = CayleyBall(
        system=system, R=R, mode=mode,
        level=np.array(level, dtype=np.int32),
        nbr=np.array(nbr_rows, dtype=np.int32).reshape(len(level), k),
        parent=np.array(parent, dtype=np.int32),
        parent_gen=np.array(pgen, dtype=np.int32),
        keys=keys,
    )
    return orient_and_profile(ball) if profile else ball


def orient_and_profile(ball: CayleyBall) -> CayleyBall:
    """Compute ``r`` and ``q``; raises :class:`LevelTie` on any same-level edge."""
    nbr, level = ball.nbr, ball.level
    inside = nbr >= 0
    nlev = np.where(inside, level[np.maximum(nbr, 0)], -10)
    if np.any(inside & (nlev == level[:, None])):
        v, s = np.argwhere(inside & (nlev == level[:, None]))[0]
        raise LevelTie(f"edge ({v}, {nbr[v, s]}) joins two vertices at level {level[v]}")
    if np.any(inside & (np.abs(nlev - level[:, None]) != 1)):
        raise LevelTie("edge skipping a level")
    down = inside & (nlev == level[:, None] - 1)
    up = inside & (nlev == level[:, None] + 1)
    r = down.sum(axis=1).astype(np.int32)
    q = np.zeros((ball.n, ball.k + 1), dtype=np.int32)
    rows, cols = np.nonzero(up)
    np.add.at(q, (rows, r[nbr[rows, cols]]), 1)
    return replace(ball, r=r, q=q)


# --- checks -------------------------------------------------------------------

def involution_ok(ball: CayleyBall) -> bool:
    nbr = ball.nbr
    v, s = np.nonzero(nbr >= 0)
    return bool(np.all(nbr[nbr[v, s], s] == v))


def interior_regular(ball: CayleyBall) -> bool:
    return bool(np.all((ball.nbr[ball.complete] >= 0)))


def is_rac_system(system: CoxeterSystem) -> bool:
    """Right-angled with a flag-triangulated 2-sphere as nerve."""
    if not system.is_right_angled():
        return False
    nerve = build_nerve(system, cap=min(system.k, 4))
    if nerve.maxdim > 2:
        return False
    return is_flag_sphere_triangulation(system.k, nerve.edges, nerve.triangles)


Q3_CAP = {1: 0, 2: 2, 3: 3}


def verify_geometry_lemmas(ball: CayleyBall, rac: Optional[bool] = None) -> dict:
    """Scan complete non-origin vertices for ``r <= 3`` and the ``q3`` caps.

    With ``rac`` (default: detected from the system) the ``q2 + q3`` caps
    ``floor((k-1)/2)``, ``k-5``, ``k-3`` for ``r = 1, 2, 3`` are checked too.
    """
    if ball.r is None:
        ball = orient_and_profile(ball)
    if rac is None:
        rac = is_rac_system(ball.system)
    k = ball.k
    q23_cap = {1: (k - 1) // 2, 2: k - 5, 3: k - 3}
    idx = np.nonzero(ball.complete & (ball.level > 0))[0]
    r = ball.r[idx]
    q = ball.q[idx]
    violations = []
    bad_r = idx[r > 3]
    for v in bad_r:
        violations.append({"vertex": int(v), "kind": "r>3", "r": int(ball.r[v])})
    for rv in (1, 2, 3):
        sel = r == rv
        q3 = q[sel, 3] if k >= 3 else np.zeros(int(sel.sum()), dtype=np.int32)
        q2 = q[sel, 2] if k >= 2 else np.zeros_like(q3)
        for v in idx[sel][q3 > Q3_CAP[rv]]:
            violations.append({"vertex": int(v), "kind": "q3", "r": rv,
                               "q3": int(ball.q[v, 3])})
        if rac:
            for v in idx[sel][(q2 + q3) > q23_cap[rv]]:
                violations.append({"vertex": int(v), "kind": "q2+q3", "r": rv,
                                   "q2+q3": int(ball.q[v, 2] + ball.q[v, 3])})
    hist = {int(x): int(c) for x, c in zip(*np.unique(r, return_counts=True))}
    beyond = int(ball.q[idx, 4:].sum()) if ball.q.shape[1] > 4 else 0
    return {
        "checked": int(len(idx)),
        "r_max": int(r.max()) if len(r) else 0,
        "r_histogram": hist,
        "q_beyond_3": beyond,
        "rac": bool(rac),
        "violations": violations,
        "ok": not violations,
    }


# --- persistence --------------------------------------------------------------

MAGIC = b"CXPBALL\x00"
VERSION = 1


def cache_key(system: CoxeterSystem, R: int, mode: str) -> str:
    return f"{system.content_hash()[:16]}-R{R}-{mode}"


def dumps_ball(ball: CayleyBall) -> bytes:
    header = json.dumps({
        "nerve": ball.system.to_json_dict(),
        "hash": ball.system.content_hash(),
        "R": ball.R,
        "mode": ball.mode,
        "n": ball.n,
    }, sort_keys=True).encode()
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<II", VERSION, len(header)))
    buf.write(header)
    for arr in (ball.level, ball.nbr, ball.parent, ball.parent_gen):
        buf.write(np.ascontiguousarray(arr, dtype="<i4").tobytes())
    return buf.getvalue()


def loads_ball(data: bytes) -> CayleyBall:
    from .coxeter import load_nerve_json
    if data[:len(MAGIC)] != MAGIC:
        raise ValidationError("not a ball cache file")
    off = len(MAGIC)
    version, hlen = struct.unpack_from("<II", data, off)
    if version != VERSION:
        raise ValidationError(f"ball cache version {version} unsupported")
    off += 8
    header = json.loads(data[off:off + hlen])
    off += hlen
    system = load_nerve_json(header["nerve"])
    if system.content_hash() != header["hash"]:
        raise ValidationError("ball cache hash mismatch")
    n, k = header["n"], system.k
    arrays = []
    for shape in ((n,), (n, k), (n,), (n,)):
        size = int(np.prod(shape)) * 4
        arrays.append(np.frombuffer(data, dtype="<i4", count=size // 4, offset=off)
                      .reshape(shape).astype(np.int32))
        off += size
    ball = CayleyBall(system, header["R"], header["mode"], *arrays)
    return orient_and_profile(ball)


def save_ball(ball: CayleyBall, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps_ball(ball))


def load_ball(path) -> CayleyBall:
    with open(path, "rb") as fh:
        return loads_ball(fh.read())
