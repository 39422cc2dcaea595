"""Gabber-lemma bounds on the cycle growth rate and phase certificates.

For a weighting that depends only on the profile ``(r, q1, q2, q3)`` of a
vertex, the Gabber value ``r*c_r + sum(q_i / c_i)`` bounds the spectral
quantity rho-tilde when it holds for every vertex.  The certificate compares
the resulting bound on gamma-star (or rho-tilde directly) with the lower bound
on the growth rate, using outward-rounded interval arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .errors import KTooSmall, RadicandNegative, ValidationError

STRICT_MARGIN = 1e-12
SCAN_MAX_K = 100
FAMILIES = ("basic", "general", "rac")
MODES = ("gamma", "rho")
_FAMILY_ALIASES = {"right-angled-compact": "rac", "gen": "general"}


@dataclass(frozen=True)
class VertexProfile:
    """``r`` in-edges and ``q[i-1]`` out-edges towards vertices with ``r = i``."""

    r: int
    q: Tuple[int, int, int]
    k: int

    def __post_init__(self):
        if not 0 <= self.r <= 3:
            raise ValidationError(f"r must be in 0..3, got {self.r}")
        if any(x < 0 for x in self.q) or self.r + sum(self.q) != self.k:
            raise ValidationError(f"profile {self.r}, {self.q} does not sum to k={self.k}")
        if self.r == 0 and self.q != (self.k, 0, 0):
            raise ValidationError("the origin has q1 = k")

    @classmethod
    def origin(cls, k: int) -> "VertexProfile":
        return cls(0, (k, 0, 0), k)


@dataclass(frozen=True)
class WeightVector:
    c1: object
    c2: object
    c3: object

    def __post_init__(self):
        if not all(c > 0 for c in self.as_tuple()):
            raise ValidationError("weights must be positive")

    def as_tuple(self):
        return (self.c1, self.c2, self.c3)


def gabber_value(profile: VertexProfile, c: WeightVector):
    """``r*c_r + q1/c1 + q2/c2 + q3/c3``; exact when the weights are rationals."""
    cs = c.as_tuple()
    if all(isinstance(x, (int, Fraction)) for x in cs):
        cs = tuple(Fraction(x) for x in cs)
    total = profile.r * cs[profile.r - 1] if profile.r else 0
    for qi, ci in zip(profile.q, cs):
        if qi:
            total = total + qi / ci
    return total


# --- closed-form rho-tilde bounds ---------------------------------------------

def _min_k(family: str) -> int:
    return {"basic": 6, "general": 4, "rac": 12}[family]


def rho_bound_basic(k: int) -> float:
    if k < 6:
        raise KTooSmall(f"basic bound needs k >= 6, got {k}")
    return 2 * math.sqrt(3 * (k - 3))


def rho_bound_general(k: int) -> Fraction:
    return Fraction(k + 17, 3)


def rho_bound_rac(k: int) -> Fraction:
    if k < 12:
        raise KTooSmall(f"right-angled compact bound needs k >= 12, got {k}")
    return Fraction(k, 2) + Fraction(31, 10)


def gamma_star_from_rho(rho, k: int):
    """``(rho + sqrt(rho**2 - 4(k-1))) / 2``; accepts floats or mpmath intervals."""
    if isinstance(rho, mpmath.ctx_iv.ivmpf):
        rad = rho * rho - 4 * (k - 1)
        if rad.b < 0:
            raise RadicandNegative(f"rho below 2*sqrt(k-1) for k={k}")
        rad = mpmath.iv.mpf([max(rad.a, 0), rad.b])
        return (rho + mpmath.iv.sqrt(rad)) / 2
    rho = float(rho)
    rad = rho * rho - 4 * (k - 1)
    if rad < 0:
        if rad > -1e-12 * max(1.0, rho * rho):
            rad = 0.0  # zero radicand up to rounding
        else:
            raise RadicandNegative(f"rho={rho} below 2*sqrt(k-1) for k={k}")
    return (rho + math.sqrt(rad)) / 2


def _iv_rho(k: int, family: str):
    iv = mpmath.iv
    if family == "basic":
        if k < 6:
            raise KTooSmall(f"basic bound needs k >= 6, got {k}")
        return 2 * iv.sqrt(iv.mpf(3 * (k - 3)))
    if family == "general":
        return iv.mpf(k + 17) / 3
    if k < 12:
        raise KTooSmall(f"right-angled compact bound needs k >= 12, got {k}")
    return iv.mpf(k) / 2 + iv.mpf(31) / 10


def _iv_growth_lower(k: int):
    if k < 6:
        raise KTooSmall(f"growth lower bound needs k >= 6, got {k}")
    iv = mpmath.iv
    return (iv.mpf(k - 4) + iv.sqrt(iv.mpf((k - 4) ** 2 - 4))) / 2


def rho_bound(k: int, family: str):
    family = normalize_family(family)
    return {"basic": rho_bound_basic, "general": rho_bound_general,
            "rac": rho_bound_rac}[family](k)


def normalize_family(family: str) -> str:
    family = _FAMILY_ALIASES.get(family, family)
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}")
    return family


# --- weight optimisation ------------------------------------------------------

def profile_constraints(k: int, family: str) -> List[VertexProfile]:
    """Every integer profile allowed by the family's lemmas, origin included.

    basic: only ``r <= 3``.  general: additionally ``q3 <= 0, 2, 3`` for
    ``r = 1, 2, 3``.  rac: additionally ``q2 + q3`` at most
    ``floor((k-1)/2)``, ``k-5``, ``k-3``.
    """
    family = normalize_family(family)
    q3_cap = {1: 0, 2: 2, 3: 3}
    q23_cap = {1: (k - 1) // 2, 2: k - 5, 3: k - 3}
    out = [VertexProfile.origin(k)]
    for r in (1, 2, 3):
        rest = k - r
        if rest < 0:
            continue
        for q3 in range(rest + 1):
            if family != "basic" and q3 > q3_cap[r]:
                break
            for q2 in range(rest - q3 + 1):
                if family == "rac" and q2 + q3 > q23_cap[r]:
                    break
                out.append(VertexProfile(r, (rest - q2 - q3, q2, q3), k))
    return out


def paper_weights(k: int, family: str) -> WeightVector:
    """The hand-picked weights behind each closed-form bound."""
    family = normalize_family(family)
    if family == "basic":
        c = math.sqrt((k - 3) / 3)
        return WeightVector(c, c, c)
    if family == "general":
        return WeightVector(Fraction(3), Fraction(3), Fraction(2))
    return WeightVector(Fraction(5), Fraction(2), Fraction(1))


def _profile_matrix(profiles: Sequence[VertexProfile]) -> np.ndarray:
    """Rows ``[r*[r==1], r*[r==2], r*[r==3], q1, q2, q3]`` so ``f = M @ [c, 1/c]``."""
    rows = []
    for p in profiles:
        lin = [0, 0, 0]
        if p.r:
            lin[p.r - 1] = p.r
        rows.append(lin + list(p.q))
    return np.array(rows, dtype=float)


def _sup_value(mat: np.ndarray, c: np.ndarray) -> float:
    return float(np.max(mat @ np.concatenate([c, 1.0 / c])))


def _golden_min(fn, lo: float, hi: float, tol: float = 1e-10, max_steps: int = 120):
    inv_phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(max_steps):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = fn(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def optimize_weights(profiles: Iterable[VertexProfile], start: Optional[WeightVector] = None,
                     iterations: int = 200) -> Tuple[WeightVector, float]:
    """Minimise ``max_v f_v(c)`` over positive ``c`` by coordinate descent.

    Each coordinate move is a golden-section search in ``log c``.  Only
    coordinates that appear in some profile are moved.  The start point is
    kept if nothing beats it, so the result is never worse than ``start``.
    """
    profiles = list(profiles)
    if not profiles:
        raise ValidationError("empty constraint set")
    mat = _profile_matrix(profiles)
    used = [bool(mat[:, i].any() or mat[:, 3 + i].any()) for i in range(3)]
    c = np.array([float(x) for x in start.as_tuple()] if start else [1.0, 1.0, 1.0])
    best = _sup_value(mat, c)
    for _ in range(iterations):
        prev = best
        for i in range(3):
            if not used[i]:
                continue

            def fn(logc, i=i):
                trial = c.copy()
                trial[i] = math.exp(logc)
                return _sup_value(mat, trial)

            centre = math.log(c[i])
            x, val = _golden_min(fn, centre - 4.0, centre + 4.0)
            if val < best:
                c[i] = math.exp(x)
                best = val
        if prev - best <= 1e-15 * max(1.0, best):
            break
    return WeightVector(*[float(x) for x in c]), best


# --- certificates -------------------------------------------------------------

@dataclass(frozen=True)
class PhaseCertificate:
    k: int
    family: str
    mode: str
    b1: float
    b2: float
    verdict: bool
    certified_interval: Optional[Tuple[float, float]]
    b1_interval: Tuple[float, float] = field(repr=False, default=(0.0, 0.0))
    b2_interval: Tuple[float, float] = field(repr=False, default=(0.0, 0.0))

    @property
    def margin(self) -> float:
        return self.b2 - self.b1

    def to_json_dict(self, places: int = 15) -> dict:
        fmt = lambda x: f"{x:.{places}f}"  # noqa: E731
        return {
            "k": self.k,
            "family": self.family,
            "mode": self.mode,
            "b1": fmt(self.b1),
            "b2": fmt(self.b2),
            "margin": fmt(self.margin),
            "verdict": self.verdict,
            "certified_interval": (None if self.certified_interval is None
                                   else [fmt(x) for x in self.certified_interval]),
        }


def certify_phase(k: int, family: str, mode: str = "gamma", dps: int = 50) -> PhaseCertificate:
    """Compare ``b1`` (bound on gamma-star, or on rho-tilde with ``mode='rho'``) with ``b2 = gr`` lower bound.

    The verdict requires ``upper(b1) < lower(b2) - 1e-12`` with both sides
    enclosed by interval arithmetic.
    """
    family = normalize_family(family)
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}")
    with mpmath.workdps(dps):
        rho = _iv_rho(k, family)
        b1 = gamma_star_from_rho(rho, k) if mode == "gamma" else rho
        b2 = _iv_growth_lower(k)
        verdict = bool(b1.b < b2.a - STRICT_MARGIN)
        b1_mid, b2_mid = float(b1.mid), float(b2.mid)
        interval = None
        if verdict:
            interval = (float((1 / b2).mid), float((1 / b1).mid))
        b1_box = (float(b1.a), float(b1.b))
        b2_box = (float(b2.a), float(b2.b))
    return PhaseCertificate(k, family, mode, b1_mid, b2_mid, verdict, interval, b1_box, b2_box)


def threshold(family: str, mode: str, k_max: int = SCAN_MAX_K) -> Optional[int]:
    """Least ``k`` from which the verdict holds for every larger ``k`` up to ``k_max``."""
    family = normalize_family(family)
    lo = max(_min_k(family), 6)
    best = None
    for k in range(k_max, lo - 1, -1):
        if certify_phase(k, family, mode, dps=30).verdict:
            best = k
        else:
            break
    return best


def threshold_table(k_max: int = SCAN_MAX_K) -> List[Tuple[str, str, Optional[int]]]:
    """Rows ``(lemma, mode, threshold)``: all ``rho`` rows first, then ``gamma``."""
    return [(fam, mode, threshold(fam, mode, k_max))
            for mode in ("rho", "gamma") for fam in FAMILIES]


def verdict_monotone(family: str, mode: str = "gamma", k_max: int = SCAN_MAX_K) -> bool:
    """Once the verdict holds it keeps holding up to ``k_max``."""
    family = normalize_family(family)
    seen = False
    for k in range(max(_min_k(family), 6), k_max + 1):
        v = certify_phase(k, family, mode, dps=30).verdict
        if seen and not v:
            return False
        seen = seen or v
    return True
