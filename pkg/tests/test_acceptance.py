"""End-to-end acceptance checks, one test per criterion.

Each test records ``(criterion, ok, detail)`` through the ``record`` fixture
before asserting; the terminal summary prints one PASS/FAIL line per criterion.
"""

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from _corpus import farkas_violation, random_problem

from symcop.combinatorics import (
    dp_count,
    enumerate_eq,
    yildirim_count_bound,
    zvp_block_schedule,
    zvp_count,
)
from symcop.copp import assemble_copp, random_pd_matrix, solve_copp
from symcop.frame_hierarchies import dp_indices, yildirim_indices, yildirim_points
from symcop.jordan import ConeShape
from symcop.lasserre import MomentTable, moment
from symcop.oracle import mc_moments, refute_with_yildirim, sample_cone_min
from symcop.polynomial_hierarchies import nn_membership_constraints, zvp_blocks
from symcop.sdpa import solve_external
from symcop.solver import check_kkt, solve

HORN = np.array(
    [
        [1, -1, 1, 1, -1],
        [-1, 1, -1, 1, 1],
        [1, -1, 1, -1, 1],
        [1, 1, -1, 1, -1],
        [-1, 1, 1, -1, 1],
    ],
    dtype=float,
)


def finite_max(vals):
    return max((v for v in vals if math.isfinite(v)), default=-math.inf)


def finite_min(vals):
    return min((v for v in vals if math.isfinite(v)), default=math.inf)


# -- 1: sandwich at (2, 4) -------------------------------------------------------


@pytest.mark.slow
def test_criterion_1_sandwich(record):
    s = ConeShape(2, 4)
    bad = []
    for seed in range(10):
        C = random_pd_matrix(s.n, 1000 + seed)
        dp = [solve_copp(C, "dp", r, s).value for r in range(5)]
        yd = [solve_copp(C, "yildirim", r, s).value for r in range(5)]
        inner = dp + [solve_copp(C, "zvp", 0, s).value]
        if not all(a <= b + 1e-6 for a, b in zip(dp, dp[1:])):
            bad.append((seed, "dp not nondecreasing", dp))
        if not all(b <= a + 1e-6 for a, b in zip(yd, yd[1:])):
            bad.append((seed, "yildirim not nonincreasing", yd))
        if finite_max(inner) > finite_min(yd) + 1e-6:
            bad.append((seed, "inner above outer", inner, yd))
    ok = record(1, not bad, f"10 instances at (2,4), r<=4; violations: {len(bad)}")
    assert ok, bad


# -- 2: Yildirim plateau vs ZVP(0) -------------------------------------------------


@pytest.mark.slow
def test_criterion_2_plateau(record):
    s = ConeShape(1, 3)
    rel = []
    for seed in range(10):
        C = random_pd_matrix(s.n, 2000 + seed)
        yd = solve_copp(C, "yildirim", 8, s, concise=True).value
        zv = solve_copp(C, "zvp", 0, s).value
        rel.append(abs(yd - zv) / abs(yd))
    hits = sum(d <= 0.05 for d in rel)
    ok = record(2, hits >= 8, f"{hits}/10 within 5%, worst relative gap {max(rel):.2e}")
    assert ok, rel


# -- 3: concise vs full ------------------------------------------------------------


def test_criterion_3_concise_equivalence(record):
    shapes = [ConeShape(0, 3), ConeShape(1, 3), ConeShape(2, 3), ConeShape(1, 2), ConeShape(1, 4)]
    worst, bad = 0.0, []
    for k in range(10):
        s = shapes[k % len(shapes)]
        C = random_pd_matrix(s.n, 3000 + k)
        for h in ("dp", "yildirim"):
            for r in range(4):
                full = solve_copp(C, h, r, s, concise=False)
                conc = solve_copp(C, h, r, s, concise=True)
                if full.status != conc.status:
                    bad.append((k, h, r, full.status, conc.status))
                elif full.status == "Optimal":
                    d = abs(full.value - conc.value)
                    worst = max(worst, d)
                    if d > 1e-6:
                        bad.append((k, h, r, full.value, conc.value))
    counts = []
    for s in [ConeShape(n1, n2) for n1 in range(4) for n2 in range(2, 5)]:
        for r in range(4):
            counts.append(len(dp_indices(r, s, True)) < len(dp_indices(r, s, False)))
            counts.append(len(yildirim_indices(r, s, True)) < len(yildirim_indices(r, s, False)))
    ok = record(
        3,
        not bad and all(counts),
        f"worst |full - concise| = {worst:.1e}; concise strictly smaller in {sum(counts)}/{len(counts)} censuses",
    )
    assert ok, bad


# -- 4: moments vs Monte Carlo -------------------------------------------------------


@pytest.mark.slow
def test_criterion_4_moments_vs_monte_carlo(record):
    worst, count = 0.0, 0
    for n1, n2 in [(0, 2), (1, 3), (2, 3)]:
        s = ConeShape(n1, n2)
        alphas = [
            a
            for m in range(5)
            for a in enumerate_eq(s.n, m)
            if all(t % 2 == 0 for t in a[n1 + 1 :])
        ]
        mc = mc_moments(alphas, s, samples=1_000_000, seed=n1 * 10 + n2)
        for a in alphas:
            exact = moment(a, s)
            worst = max(worst, abs(mc.values[a] - exact) / exact)
            count += 1
    ok = record(4, worst <= 0.02, f"{count} moments, worst relative error {worst:.2e}")
    assert ok


# -- 5: spot values ----------------------------------------------------------------


def test_criterion_5_spot_values(record):
    s = ConeShape(0, 2)
    y0, y10 = moment((0, 0), s), moment((1, 0), s)
    ok = record(5, abs(y0 - 1) <= 1e-12 and abs(y10 - 2 / 3) <= 1e-12, f"y0 = {y0!r}, y(1,0) = {y10!r}")
    assert ok


# -- 6: counts -----------------------------------------------------------------------


def brute_simplex_grid(rk, r):
    pts = set()
    for k in range(r + 1):
        den = k + 2
        for beta in itertools.product(range(den + 1), repeat=rk):
            if sum(beta) == den:
                pts.add(tuple(Fraction(b, den) for b in beta))
    return pts


def test_criterion_6_counts(record):
    fails = []
    for rk in range(2, 7):
        s = ConeShape(rk - 2, 3)
        for r in range(6):
            got = len(dp_indices(r, s))
            brute = sum(1 for b in itertools.product(range(r + 3), repeat=rk) if sum(b) == r + 2)
            if not got == brute == dp_count(rk, r) == math.comb(rk + r + 1, rk - 1):
                fails.append(("dp", rk, r, got, brute))
    for rk in range(2, 6):
        for r in range(5):
            pts = yildirim_points(r, rk)
            brute = brute_simplex_grid(rk, r)
            if not (len(pts) == len(set(pts)) == len(brute) and set(pts) == brute
                    and len(pts) <= rk * rk * (rk ** (r + 1) - 1) // (rk - 1) == yildirim_count_bound(rk, r)):
                fails.append(("delta", rk, r, len(pts), len(brute)))
    for rk in range(2, 7):
        seq = [1, rk]
        while len(seq) <= 6:
            seq.append(rk * seq[-1] + seq[-2])
        if [zvp_count(rk, m) for m in range(7)] != seq:
            fails.append(("a_m", rk))
    for s in [ConeShape(0, 2), ConeShape(0, 3), ConeShape(1, 2), ConeShape(1, 3)]:
        for m in range(2, 7):
            if Counter(b.size for b in zvp_blocks(m, s)) != zvp_block_schedule(s.n, s.rank, m):
                fails.append(("zvp", s, m))
    ok = record(6, not fails, "dp counts rk<=6 r<=5, delta_r rk<=5 r<=4, ZVP schedule m<=6; mismatches: " + str(len(fails)))
    assert ok, fails


# -- 7: soundness and refutation --------------------------------------------------------


def planted_violator(shape, rng, depth=0.5):
    n = shape.n
    B = rng.standard_normal((n, n))
    A = B @ B.T / n + np.eye(n)
    g = rng.standard_normal(shape.n2 - 1)
    u = np.concatenate([rng.random(shape.n1) + 0.1, [1.0], 0.5 * g / np.linalg.norm(g)])
    gamma = (u @ A @ u) * (1 + depth) / (u @ u) ** 2
    return A - gamma * np.outer(u, u)


@pytest.mark.slow
def test_criterion_7_soundness_and_refutation(record):
    plan = [
        ("dp", 0, ConeShape(0, 3)), ("dp", 1, ConeShape(1, 3)), ("dp", 2, ConeShape(1, 2)),
        ("dp", 1, ConeShape(2, 3)), ("zvp", 0, ConeShape(1, 3)), ("zvp", 1, ConeShape(0, 3)),
        ("nn", 0, ConeShape(1, 3)), ("nn", 1, ConeShape(0, 3)), ("dp", 3, ConeShape(0, 4)),
        ("zvp", 0, ConeShape(2, 3)),
    ]
    members, worst, seed = [], -math.inf, 7000
    while len(members) < 100:
        h, r, s = plan[len(members) % len(plan)]
        C = random_pd_matrix(s.n, seed)
        seed += 1
        sol = solve(assemble_copp(C, h, r, s, concise=(h == "dp")))
        if sol.status == "Optimal":
            members.append((s, C - sol.values["y"] * np.ones((s.n, s.n))))
    sound = 0
    for s, S in members:
        smin = sample_cone_min(S, s, 100_000, seed=1)[0]
        worst = max(worst, -smin / np.linalg.norm(S))
        sound += smin >= -1e-6 * np.linalg.norm(S)
    rng = np.random.default_rng(77)
    refuted = 0
    for _ in range(20):
        s = ConeShape(int(rng.integers(0, 3)), int(rng.integers(2, 5)))
        A = planted_violator(s, rng)
        for r in range(7):
            w = refute_with_yildirim(A, r, s)
            if w is not None and w.check(A):
                refuted += 1
                break
    ok = record(
        7,
        sound == 100 and refuted == 20,
        f"{sound}/100 inner members sound (worst -min/||A|| = {worst:.1e}), {refuted}/20 violators refuted exactly",
    )
    assert ok


# -- 8: Horn matrix over the orthant ------------------------------------------------------


def test_criterion_8_horn(record):
    s = ConeShape(5, 0)
    p0 = nn_membership_constraints(HORN, 0, s)
    sol0 = solve(p0)
    stat, dobj = farkas_violation(p0, sol0) if sol0.status == "Infeasible" else (math.inf, math.inf)
    Ys = sol0.certificate["matrix_duals"] if sol0.certificate else {}
    ypsd = all(np.linalg.eigvalsh(np.asarray(Y)).min() >= -1e-8 for Y in Ys.values())
    sol1 = solve(nn_membership_constraints(HORN, 1, s))
    smin = sample_cone_min(HORN, s, 1_000_000, seed=0)[0]
    ok = record(
        8,
        sol0.status == "Infeasible" and stat <= 1e-8 and dobj < 0 and ypsd
        and sol1.status == "Optimal" and smin >= -1e-6,
        f"NN0 {sol0.status} (certificate residual {stat:.1e}, objective {dobj:.2e}), "
        f"NN1 {sol1.status}, sampled min {smin:.2e}",
    )
    assert ok


# -- 9: solver quality ----------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_9_solver_quality(record):
    pytest.importorskip("sdpap")
    worst_res, bad = 0.0, []
    for seed in range(100):
        p = random_problem(seed)
        sol = solve(p)
        rep = check_kkt(p, sol)
        res = max(sol.primal_residual, sol.dual_residual, rep.primal, rep.dual)
        worst_res = max(worst_res, res)
        if sol.status != "Optimal" or not res <= 1e-7:
            bad.append((seed, sol.status, res))
    worst_gap = 0.0
    for seed in range(20):
        p = random_problem(seed)
        internal = solve(p).objective
        external = solve_external(p)
        d = abs(internal - external.objective)
        worst_gap = max(worst_gap, d)
        if not d <= 1e-6:
            bad.append((seed, "external", internal, external.status, external.objective))
    ok = record(
        9,
        not bad,
        f"100 corpus residuals <= {worst_res:.1e}; 20 exported, worst |internal - external| = {worst_gap:.1e}",
    )
    assert ok, bad


# -- 10: underflow detection ------------------------------------------------------------------


def test_criterion_10_underflow(record):
    s = ConeShape(5, 25)
    raw = MomentTable(s, 4)
    norm = MomentTable(s, 4, normalize=True)
    low = [a for a in raw.tiny if sum(a) <= 4]
    ok = record(
        10,
        raw.underflow and bool(low) and not norm.underflow,
        f"raw flag {raw.underflow} ({len(low)} tiny entries, smallest {raw.smallest()[1]:.2e}), "
        f"normalized flag {norm.underflow} (smallest {norm.smallest()[1]:.2e})",
    )
    assert ok
