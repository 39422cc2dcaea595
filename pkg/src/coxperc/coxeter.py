"""Coxeter matrices, spherical subsets and nerves.

A Coxeter matrix is stored as a tuple of tuples of ints, with the sentinel
:data:`INF` standing for an infinite label.  In JSON it is written as the
string ``"inf"``.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import (AsymmetricMatrix, DiagonalNotOne, InvalidCoxeterMatrix,
                     OffDiagonalBelowTwo, SphericalFourSubset, ValidationError)

INF = 0
"""Sentinel for ``m(s, t) = infinity``.  Zero never occurs as a genuine label."""


def label_str(m: int):
    return "inf" if m == INF else m


def _parse_label(m) -> int:
    if m in ("inf", "∞", None) or m == float("inf"):
        return INF
    if isinstance(m, bool) or int(m) != m:
        raise ValidationError(f"bad Coxeter label {m!r}")
    return int(m)


@dataclass(frozen=True)
class CoxeterSystem:
    """A validated Coxeter matrix on generators ``0..k-1``."""

    m: Tuple[Tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return len(self.m)

    def label(self, s: int, t: int) -> int:
        return self.m[s][t]

    def is_right_angled(self) -> bool:
        """All off-diagonal labels are 2 or infinity."""
        return all(self.m[s][t] in (2, INF)
                   for s in range(self.k) for t in range(self.k) if s != t)

    def to_json_dict(self) -> dict:
        edges = [[s, t, self.m[s][t]]
                 for s in range(self.k) for t in range(s + 1, self.k)
                 if self.m[s][t] != INF]
        return {"k": self.k, "edges": edges}

    def content_hash(self) -> str:
        blob = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def validate(matrix: Sequence[Sequence]) -> CoxeterSystem:
    """Check the Coxeter matrix axioms and return a :class:`CoxeterSystem`.

    Raises the exception class of the first kind of violation found; its
    message lists every violated entry.
    """
    m = [[_parse_label(x) for x in row] for row in matrix]
    k = len(m)
    if k < 1 or any(len(row) != k for row in m):
        raise ValidationError("Coxeter matrix must be square with k >= 1")
    found: Dict[type, List[str]] = {}
    for s in range(k):
        if m[s][s] != 1:
            found.setdefault(DiagonalNotOne, []).append(f"m({s},{s})={m[s][s]} != 1")
        for t in range(k):
            if s == t:
                continue
            if m[s][t] != m[t][s] and s < t:
                found.setdefault(AsymmetricMatrix, []).append(
                    f"m({s},{t})={label_str(m[s][t])} != m({t},{s})={label_str(m[t][s])}")
            if m[s][t] != INF and m[s][t] < 2:
                found.setdefault(OffDiagonalBelowTwo, []).append(
                    f"m({s},{t})={m[s][t]} < 2")
    if found:
        order = (AsymmetricMatrix, DiagonalNotOne, OffDiagonalBelowTwo)
        first = next(cls for cls in order if cls in found)
        raise first([msg for cls in order for msg in found.get(cls, [])])
    return CoxeterSystem(tuple(tuple(row) for row in m))


def from_edges(k: int, edges: Iterable[Sequence]) -> CoxeterSystem:
    """Build a system from ``[[s, t, m], ...]``; absent pairs get an infinite label."""
    m = [[1 if s == t else INF for t in range(k)] for s in range(k)]
    for s, t, lab in edges:
        if not (0 <= s < k and 0 <= t < k) or s == t:
            raise ValidationError(f"bad edge ({s}, {t})")
        lab = _parse_label(lab)
        m[s][t] = m[t][s] = lab
    return validate(m)


def load_nerve_json(path_or_dict) -> CoxeterSystem:
    if isinstance(path_or_dict, dict):
        data = path_or_dict
    else:
        with open(path_or_dict, encoding="utf-8") as fh:
            data = json.load(fh)
    try:
        return from_edges(int(data["k"]), data.get("edges", []))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed nerve JSON: {exc}") from exc


def dump_nerve_json(system: CoxeterSystem) -> str:
    return json.dumps(system.to_json_dict(), sort_keys=True, indent=1) + "\n"


# --- finite type classification -------------------------------------------

def _components(system: CoxeterSystem, subset: Sequence[int]) -> List[List[int]]:
    """Connected components of the Coxeter diagram (edges where m != 2)."""
    subset = list(subset)
    seen = set()
    comps = []
    for s in subset:
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in subset:
                if v not in seen and system.m[u][v] != 2 and v != u:
                    seen.add(v)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def classify_component(system: CoxeterSystem, comp: Sequence[int]) -> Optional[Tuple[str, int]]:
    """Finite type ``(family, rank)`` of a connected diagram, or None if infinite.

    Families: ``A, B, D, E, F, H`` and ``I`` (dihedral, any m >= 3 on two nodes).
    """
    n = len(comp)
    if n == 1:
        return ("A", 1)
    labels = {}
    adj = {u: [] for u in comp}
    for u, v in itertools.combinations(comp, 2):
        lab = system.m[u][v]
        if lab == 2:
            continue
        if lab == INF:
            return None
        labels[frozenset((u, v))] = lab
        adj[u].append(v)
        adj[v].append(u)
    if len(labels) != n - 1:
        return None  # contains a cycle
    if n == 2:
        (lab,) = labels.values()
        return ("I", lab)
    big = sorted((lab for lab in labels.values() if lab > 3), reverse=True)
    degrees = sorted(len(a) for a in adj.values())
    if degrees[-1] > 3:
        return None
    if degrees[-1] == 3:
        if big or degrees.count(3) > 1:
            return None
        center = next(u for u in comp if len(adj[u]) == 3)
        arms = sorted(_arm_length(adj, center, v) for v in adj[center])
        if arms[0] == 1 and arms[1] == 1:
            return ("D", n)
        if arms[:2] == [1, 2] and arms[2] in (2, 3, 4):
            return ("E", n)
        return None
    # path
    if not big:
        return ("A", n)
    if len(big) > 1:
        return None
    lab = big[0]
    ends = [u for u in comp if len(adj[u]) == 1]
    path = _walk_path(adj, ends[0])
    pos = next(i for i in range(n - 1)
               if labels[frozenset((path[i], path[i + 1]))] == lab)
    at_end = pos in (0, n - 2)
    if lab == 4:
        if at_end:
            return ("B", n)
        if n == 4:
            return ("F", 4)
        return None
    if lab == 5 and at_end and n in (3, 4):
        return ("H", n)
    return None


def _arm_length(adj, center, start) -> int:
    length, prev, cur = 1, center, start
    while len(adj[cur]) == 2:
        nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        prev, cur = cur, nxt
        length += 1
    return length


def _walk_path(adj, start) -> List[int]:
    path, prev = [start], None
    while True:
        nxt = [v for v in adj[path[-1]] if v != prev]
        if not nxt:
            return path
        prev = path[-1]
        path.append(nxt[0])


def finite_type(system: CoxeterSystem, subset: Sequence[int]) -> Optional[List[Tuple[str, int]]]:
    """Types of the components of ``subset``, or None if the parabolic subgroup is infinite."""
    out = []
    for comp in _components(system, subset):
        t = classify_component(system, comp)
        if t is None:
            return None
        out.append(t)
    return out


def is_spherical(system: CoxeterSystem, subset: Iterable[int]) -> bool:
    subset = sorted(set(subset))
    if any(not 0 <= s < system.k for s in subset):
        raise ValidationError("subset is not inside the generator set")
    return finite_type(system, subset) is not None


def rank3_tag(system: CoxeterSystem, triple: Sequence[int]) -> Tuple[str, int]:
    """Tag for a spherical 3-subset: ``("I2m_x_Z2", m)``, ``("A3", 0)``, ``("B3", 0)`` or ``("H3", 0)``.

    ``I2m_x_Z2`` with ``m = 2`` is Z2^3.  Only meaningful for spherical triples.
    """
    a, b, c = triple
    labs = sorted((system.m[a][b], system.m[b][c], system.m[a][c]))
    if INF in labs:
        raise ValidationError("triple is not spherical")
    if labs[0] == 2 and labs[1] == 2:
        return ("I2m_x_Z2", labs[2])
    if labs == [2, 3, 3]:
        return ("A3", 0)
    if labs == [2, 3, 4]:
        return ("B3", 0)
    if labs == [2, 3, 5]:
        return ("H3", 0)
    raise ValidationError(f"labels {labs} do not give a finite rank-3 group")


# --- nerve -------------------------------------------------------------------

@dataclass(frozen=True)
class Nerve:
    """Simplicial complex of non-empty spherical subsets.

    ``simplices[j]`` holds the spherical subsets of cardinality ``j + 1``
    (sorted tuples), up to the enumeration cap.
    """

    system: CoxeterSystem
    simplices: Tuple[Tuple[Tuple[int, ...], ...], ...]
    h3_admissible: bool
    cap: int

    @property
    def k(self) -> int:
        return self.system.k

    @property
    def vertices(self):
        return tuple(s for (s,) in self.simplices[0])

    @property
    def edges(self):
        return self.simplices[1] if len(self.simplices) > 1 else ()

    @property
    def triangles(self):
        return self.simplices[2] if len(self.simplices) > 2 else ()

    @property
    def f0(self) -> int:
        return len(self.simplices[0])

    @property
    def f1(self) -> int:
        return len(self.edges)

    @property
    def f2(self) -> int:
        return len(self.triangles)

    @property
    def maxdim(self) -> int:
        return len(self.simplices) - 1

    def triangle_tags(self) -> Dict[Tuple[int, ...], Tuple[str, int]]:
        return {tri: rank3_tag(self.system, tri) for tri in self.triangles}

    def degree(self, s: int) -> int:
        return sum(1 for e in self.edges if s in e)

    def euler_characteristic(self) -> int:
        return sum((-1) ** j * len(level) for j, level in enumerate(self.simplices))


def build_nerve(system: CoxeterSystem, assert_h3: bool = False,
                cap: Optional[int] = None) -> Nerve:
    """Enumerate spherical subsets by increasing cardinality.

    A subset is tested only when all its codimension-one faces are spherical
    (spherical sets are closed downward).  With ``assert_h3`` the search stops
    at cardinality 4 and any spherical 4-subset raises
    :class:`SphericalFourSubset`.  Without a cap the search runs to ``k``.
    """
    k = system.k
    if cap is None:
        cap = min(4, k) if assert_h3 else k
    levels: List[Tuple[Tuple[int, ...], ...]] = [tuple((s,) for s in range(k))]
    h3_ok = True
    for size in range(2, cap + 1):
        prev = set(levels[-1])
        found = []
        for cand in _extensions(levels[-1], k):
            if all(face in prev for face in _faces(cand)) and is_spherical(system, cand):
                found.append(cand)
        if size == 4 and found:
            h3_ok = False
            if assert_h3:
                raise SphericalFourSubset(f"spherical 4-subsets present, e.g. {found[0]}")
        if not found:
            break
        levels.append(tuple(found))
    if cap < 4 <= k and len(levels) >= cap:
        h3_ok = not _has_spherical_four(system, levels)
    return Nerve(system, tuple(levels), h3_ok, cap)


def _has_spherical_four(system, levels) -> bool:
    if len(levels) < 3:
        return False
    tris = set(levels[2])
    for tri in levels[2]:
        for s in range(tri[-1] + 1, system.k):
            cand = tri + (s,)
            if all(f in tris for f in _faces(cand)) and is_spherical(system, cand):
                return True
    return False


def _extensions(level, k):
    for simplex in level:
        for s in range(simplex[-1] + 1, k):
            yield simplex + (s,)


def _faces(simplex):
    return [simplex[:i] + simplex[i + 1:] for i in range(len(simplex))]


# --- presets -----------------------------------------------------------------

def icosahedron_edges() -> List[Tuple[int, int]]:
    """Edges of the icosahedron: apex 0, upper ring 1..5, lower ring 6..10, apex 11."""
    edges = []
    for i in range(5):
        up, up_next = 1 + i, 1 + (i + 1) % 5
        lo, lo_next = 6 + i, 6 + (i + 1) % 5
        edges += [(0, up), (up, up_next), (lo, lo_next), (lo, 11),
                  (up, lo), (up, lo_next)]
    return sorted(tuple(sorted(e)) for e in edges)


def right_angled(k: int, edges: Iterable[Tuple[int, int]]) -> CoxeterSystem:
    return from_edges(k, [(s, t, 2) for s, t in edges])


def dodecahedron() -> CoxeterSystem:
    """Reflection group of the right-angled regular dodecahedron (nerve = icosahedron)."""
    return right_angled(12, icosahedron_edges())


def pentagon() -> CoxeterSystem:
    """Right-angled pentagon group: 5-cycle of commuting pairs."""
    return polygon(5)


def polygon(p: int) -> CoxeterSystem:
    return right_angled(p, [(i, (i + 1) % p) for i in range(p)])


def free_product(k: int) -> CoxeterSystem:
    """Free product of ``k`` copies of Z2 (all labels infinite)."""
    return from_edges(k, [])


def infinite_dihedral() -> CoxeterSystem:
    return free_product(2)


PRESETS = {
    "dodecahedron": dodecahedron,
    "pentagon": pentagon,
}


def preset(name: str) -> CoxeterSystem:
    """Look up a preset; ``free-product-<k>`` and ``polygon-<p>`` are parametrised."""
    if name in PRESETS:
        return PRESETS[name]()
    for prefix, maker in (("free-product-", free_product), ("polygon-", polygon)):
        if name.startswith(prefix):
            try:
                n = int(name[len(prefix):])
            except ValueError:
                break
            return maker(n)
    raise ValidationError(f"unknown preset {name!r}")


# --- flag triangulations of the 2-sphere --------------------------------------

def is_flag_sphere_triangulation(k: int, edges: Iterable[Tuple[int, int]],
                                 triangles: Iterable[Tuple[int, int, int]]) -> bool:
    """Combinatorial check: closed surface with Euler characteristic 2, every 3-clique a face, no 4-clique."""
    edges = {tuple(sorted(e)) for e in edges}
    tris = {tuple(sorted(t)) for t in triangles}
    if k - len(edges) + len(tris) != 2:
        return False
    per_edge = {e: 0 for e in edges}
    for a, b, c in tris:
        for e in ((a, b), (b, c), (a, c)):
            if e not in per_edge:
                return False
            per_edge[e] += 1
    if any(v != 2 for v in per_edge.values()):
        return False
    adj = {s: set() for s in range(k)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    for a, b in edges:
        for c in adj[a] & adj[b]:
            if tuple(sorted((a, b, c))) not in tris:
                return False
    return all(len(adj[s]) >= 4 for s in range(k))


def flag_sphere_triangulation(k: int) -> Tuple[List[Tuple[int, int]], List[Tuple[int, int, int]]]:
    """A flag triangulation of S^2 on ``k >= 12`` vertices.

    Starts from the icosahedron and repeatedly subdivides an edge whose
    two opposite vertices are non-adjacent; such a subdivision keeps the
    triangulation flag.  Deterministic: always the lexicographically first
    admissible edge.
    """
    if k < 12:
        raise ValidationError("construction starts from the icosahedron (k >= 12)")
    edges = set(icosahedron_edges())
    adj = {s: set() for s in range(12)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    tris = {tuple(sorted((a, b, c))) for a, b in edges for c in adj[a] & adj[b]}
    n = 12
    while n < k:
        for u, v in sorted(edges):
            apex = sorted(adj[u] & adj[v])
            if len(apex) == 2 and apex[1] not in adj[apex[0]]:
                break
        else:  # pragma: no cover - the icosahedron family always has one
            raise ValidationError("no admissible edge to subdivide")
        a, b = apex
        w = n
        n += 1
        edges.discard((u, v))
        adj[u].discard(v)
        adj[v].discard(u)
        tris.discard(tuple(sorted((u, v, a))))
        tris.discard(tuple(sorted((u, v, b))))
        adj[w] = {u, v, a, b}
        for x in (u, v, a, b):
            adj[x].add(w)
            edges.add(tuple(sorted((x, w))))
        for x, y in ((u, a), (u, b), (v, a), (v, b)):
            tris.add(tuple(sorted((x, y, w))))
    return sorted(edges), sorted(tris)


def flag_sphere_system(k: int) -> CoxeterSystem:
    """Right-angled system whose nerve is :func:`flag_sphere_triangulation`."""
    edges, _ = flag_sphere_triangulation(k)
    return right_angled(k, edges)


def labeled_icosahedral_system() -> CoxeterSystem:
    """Icosahedral nerve with one triangle carrying labels (2, 3, 5).

    Edges (0,1)=3, (1,2)=5 and (0,2)=2; every other nerve edge is
    labelled 2.  All nerve triangles stay spherical, so the nerve is still
    the icosahedron.
    """
    labels = {e: 2 for e in icosahedron_edges()}
    labels[(0, 1)] = 3
    labels[(1, 2)] = 5
    return from_edges(12, [(s, t, m) for (s, t), m in labels.items()])
