"""Acceptance gate: one PASS/FAIL line per criterion, at the stated tolerances.

Lines are printed as each test runs (visible with ``-s``) and repeated in
the terminal summary.
"""
import math
import resource
import time

import numpy as np
import pytest
from scipy.sparse import csr_matrix

from coxperc import cayley, cli, coxeter, cycles, growth, percolation, slab, spectral
from conftest import ACCEPTANCE_LINES


def record(n, title, ok, detail):
    line = f"acceptance {n:>2} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE_LINES[n] = line
    assert ok, line


def test_01_threshold_table():
    t0 = time.perf_counter()
    table = spectral.threshold_table()
    elapsed = time.perf_counter() - t0
    got = {(f, m): t for f, m, t in table}
    want = {("basic", "rho"): 18, ("general", "rho"): 15, ("rac", "rho"): 15,
            ("basic", "gamma"): 15, ("general", "gamma"): 13, ("rac", "gamma"): 12}
    record(1, "threshold table", got == want and elapsed < 1.0,
           f"values {[t for _, _, t in table]}, {elapsed:.3f}s")


def test_02_certificates():
    g13 = spectral.certify_phase(13, "general")
    r12 = spectral.certify_phase(12, "rac")
    b18 = spectral.certify_phase(18, "basic", mode="rho")
    checks = [
        g13.verdict,
        abs(g13.b1 - (5 + math.sqrt(13))) < 1e-12,
        abs(g13.b2 - (9 + math.sqrt(77)) / 2) < 1e-12,
        g13.b1_interval[1] < g13.b2_interval[0] - spectral.STRICT_MARGIN,
        r12.verdict,
        abs(r12.b1 - (91 + math.sqrt(3881)) / 20) < 1e-12,
        abs(r12.b2 - (4 + math.sqrt(15))) < 1e-12,
        abs(r12.margin - ((4 + math.sqrt(15)) - (91 + math.sqrt(3881)) / 20)) < 1e-9,
        abs(r12.margin - 0.2085) < 5e-4,
        b18.verdict and abs(b18.b1 - 2 * math.sqrt(45)) < 1e-12,
        abs(b18.b2 - (7 + math.sqrt(48))) < 1e-12,
    ]
    record(2, "certificate arithmetic", all(checks),
           f"{sum(checks)}/{len(checks)} checks, rac k=12 margin {r12.margin:.12f}")


def test_03_steinberg_vs_closed_form():
    worst, counts_ok = 0.0, True
    for k in (12, 14, 16, 20):
        nerve = coxeter.build_nerve(coxeter.flag_sphere_system(k), assert_h3=True)
        counts_ok &= (nerve.f1, nerve.f2) == (3 * (k - 2), 2 * (k - 2))
        counts_ok &= coxeter.is_flag_sphere_triangulation(k, nerve.edges, nerve.triangles)
        root = growth.growth_rate(growth.steinberg_inverse_growth(nerve)).least_positive_root
        expected = 2 / (k - 4 + math.sqrt((k - 4) ** 2 - 4))
        worst = max(worst, abs(root - expected))
    record(3, "Steinberg vs closed form", counts_ok and worst < 1e-10,
           f"face counts {'exact' if counts_ok else 'WRONG'}, max root error {worst:.2e}")


def test_04_sphere_sizes():
    t0 = time.perf_counter()
    dodeca = coxeter.dodecahedron()
    ball = cayley.build_ball(dodeca, 5)
    want = growth.growth_series(coxeter.build_nerve(dodeca), 6)
    pent = cayley.build_ball(coxeter.pentagon(), 6)
    want_p = growth.growth_series(coxeter.build_nerve(coxeter.pentagon()), 7)
    elapsed = time.perf_counter() - t0
    peak_gb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 2 ** 20
    ok = ball.spheres == want and pent.spheres == want_p and elapsed < 120 and peak_gb < 2
    record(4, "sphere-size oracle", ok,
           f"dodecahedral {ball.spheres}, pentagon {pent.spheres}, "
           f"{elapsed:.1f}s, peak RSS {peak_gb:.2f} GB")


def _sparse_closed_walks(adj, o, N):
    """Second oracle for C_n: sparse int64 matrix-vector products."""
    rows = [v for v, row in enumerate(adj) for _ in row]
    cols = [w for row in adj for w in row]
    A = csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(len(adj),) * 2)
    vec = np.zeros(len(adj), dtype=np.int64)
    vec[o] = 1
    out = [1]
    for _ in range(N):
        vec = A @ vec
        out.append(int(vec[o]))
    return out


def test_05_universal_cover_identity(dodeca_ball_5):
    cases = [("K4", cycles.complete_graph(4), 14), ("Petersen", cycles.petersen_graph(), 14),
             ("dodecahedral ball R=5", dodeca_ball_5.adjacency(), 8)]
    parts, ok = [], True
    for name, adj, N in cases:
        rep = cycles.verify_universal_cover_identity(adj, 0, N)
        second = _sparse_closed_walks(adj, 0, N)
        same = [c for _, c, _ in rep["rows"]] == second
        ok &= rep["ok"] and same
        parts.append(f"{name} n<={N} {'exact' if rep['ok'] and same else 'MISMATCH'}")
    record(5, "universal-cover identity", ok, ", ".join(parts))


def test_06_green_series():
    exact = True
    for k in (3, 12):
        table = cycles.tree_path_table(k, 36)
        for d in range(7):
            exact &= cycles.green_series(k, d, 31) == [table[n, d] for n in range(31)]
    f_err = max(abs(cycles.f_map(k, 1 / (2 * math.sqrt(k - 1))) - 1 / math.sqrt(k - 1))
                for k in (3, 12))
    rel = max(abs(cycles.rho_tilde_tree_estimate(k, 500) / (2 * math.sqrt(k - 1)) - 1)
              for k in (3, 12))
    record(6, "Green-function series", exact and f_err < 1e-12 and rel < 0.02,
           f"series {'exact' if exact else 'MISMATCH'}, boundary error {f_err:.1e}, "
           f"n=500 relative gap {rel:.4f}")


def test_07_geometry_lemmas(dodeca, dodeca_ball_5):
    checked, bad = 0, 0
    for R in range(1, 6):
        ball = dodeca_ball_5 if R == 5 else cayley.build_ball(dodeca, R)
        rep = cayley.verify_geometry_lemmas(ball, rac=True)
        checked += rep["checked"]
        bad += len(rep["violations"]) + rep["q_beyond_3"]
    record(7, "geometry lemmas", bad == 0 and checked > 0,
           f"{checked} interior vertices over R=1..5, {bad} violations")


def test_08_percolation(dodeca_ball_5):
    t0 = time.perf_counter()
    p_lo, p_hi = 1 / 11, 4 - math.sqrt(15)
    grid = [0.0, 0.06, p_lo, p_hi, 0.20, 1.0]
    curve = percolation.crossing_curve(dodeca_ball_5, "bond", grid, 2000, seed=2024)
    exact_ends = curve[0].estimate == 0.0 and curve[-1].estimate == 1.0
    est = [c.estimate for c in curve]
    monotone = all(a <= b for a, b in zip(est, est[1:]))
    disjoint = curve[1].ci_hi < curve[4].ci_lo
    between = 0.06 < p_lo <= p_hi < 0.20
    # coupling: open sets and origin clusters nest for every sampled pair
    graph = percolation.PercolationGraph.from_ball(dodeca_ball_5)
    rng = np.random.default_rng(0)
    coupling_ok = True
    for trial in range(200):
        mode = "bond" if trial % 2 == 0 else "site"
        lo, hi = np.sort(rng.random(2))
        a = percolation.sample(dodeca_ball_5, mode, lo, 2024, trial)
        b = percolation.sample(dodeca_ball_5, mode, hi, 2024, trial)
        coupling_ok &= not np.any(a.open & ~b.open)
        la = percolation.component_labels(graph, mode, a.open)
        lb = percolation.component_labels(graph, mode, b.open)
        if la[0] >= 0:
            coupling_ok &= bool(np.all(lb[la == la[0]] == lb[0]))
    elapsed = time.perf_counter() - t0
    ok = exact_ends and monotone and disjoint and between and coupling_ok and elapsed < 600
    record(8, "percolation properties", ok,
           f"p=0.06 {est[1]:.4f} [{curve[1].ci_lo:.4f}, {curve[1].ci_hi:.4f}], "
           f"p=0.20 {est[4]:.4f} [{curve[4].ci_lo:.4f}, {curve[4].ci_hi:.4f}], "
           f"coupling {'ok' if coupling_ok else 'BROKEN'}, {elapsed:.0f}s")


@pytest.fixture(scope="module")
def pentagon_embedding():
    return slab.embed_polygon_group(5, 7)


@pytest.mark.parametrize("p", [0.10, 0.15])
def test_09_slab_decay(pentagon_embedding, p):
    t0 = time.perf_counter()
    est = slab.estimate_g(pentagon_embedding, 1.0, p, slab.default_r_grid(20.0), 5000, seed=9)
    elapsed = time.perf_counter() - t0
    non_increasing = bool(np.all(np.diff(est.g_hat) <= 0))
    ok = (non_increasing and est.psi_hat is not None and est.psi_hat > 0
          and est.r2 is not None and est.r2 >= 0.9 and elapsed < 600)
    line = (f"p={p:.2f} psi_hat {est.psi_hat:.4f}, R^2 {est.r2:.4f} over {est.fit_points} "
            f"points, {elapsed:.0f}s")
    prev = ACCEPTANCE_LINES.get(9)
    if prev is not None and "FAIL" in prev:
        ok = False
    detail = line if prev is None else prev.split("(", 1)[1].rstrip(")") + "; " + line
    record(9, "slab decay", ok, detail)


def _cli_bytes(tmp_path, name, argv):
    out = str(tmp_path / name)
    assert cli.main(argv + ["--out", out]) == 0
    files = [out] + [out + s for s in (".histogram.json", ".fit.json")]
    blobs = []
    for f in files:
        try:
            with open(f, "rb") as fh:
                blobs.append(fh.read())
        except FileNotFoundError:
            pass
    return blobs


def test_10_determinism(tmp_path):
    perc = ["percolate", "--preset", "dodecahedron", "--radius", "4", "--p", "0:0.3:0.05",
            "--trials", "400", "--seed", "17", "--probe-p", "0.25"]
    slab_argv = ["slab", "--pgon", "5", "--radius", "7", "--H", "1", "--p", "0.15",
                 "--trials", "600", "--seed", "9"]
    same = True
    for label, argv in (("percolate", perc), ("slab", slab_argv)):
        runs = [_cli_bytes(tmp_path, f"{label}-{i}-{t}", argv + ["--threads", str(t)])
                for i, t in enumerate((1, 1, 4, 4))]
        same &= all(r == runs[0] for r in runs) and len(runs[0]) == 2
    cfg = [percolation.sample(cayley.build_ball(coxeter.pentagon(), 5), "site", 0.4, 3, t).packed()
           for t in (0, 0)]
    same &= cfg[0] == cfg[1]
    record(10, "determinism", same,
           "percolate, probe and slab outputs over two runs each at threads 1 and 4")
