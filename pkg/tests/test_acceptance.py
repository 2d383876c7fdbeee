"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the verdicts are
repeated in the terminal summary. Monte Carlo criteria use fixed seeds.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from ltchain import adversary as adv
from ltchain import cost, experiments, gf2
from ltchain.decoders import bp_decode, brh_decode, crh_decode, ofg_decode
from ltchain.lt import Droplet, Epoch, build_rsd, generate_full_node, random_coeff_rows, sample_degrees
from ltchain.sim import ExperimentConfig, run_experiment, run_trial, to_csv
from oracles import bits, min_rank_exhaustive, rank_mod2

pytestmark = pytest.mark.slow

GRID_K = (1, 4, 10, 20, 50, 100, 500)
GRID_C = (0.1, 0.5, 1.0)
GRID_DELTA = (0.05, 0.1, 0.5)


def _sep(a, b):
    """Combined standard error of two independent estimates."""
    return math.sqrt(a * a + b * b)


def _paired(base: dict, a: str, b: str) -> tuple[float, float]:
    """Mean and stderr of failure(a) - failure(b) over trials sharing seeds."""
    ca = ExperimentConfig(**base, strategy=a)
    cb = ExperimentConfig(**base, strategy=b)
    d = np.array([
        (not run_trial(ca, i).success) - (not run_trial(cb, i).success) for i in range(base["trials"])
    ], dtype=float)
    return d.mean(), d.std(ddof=1) / math.sqrt(len(d))


def test_ac1_rsd_validity(verdict):
    worst = max(
        abs(build_rsd(k, c, d).omega.sum() - 1.0) for k in GRID_K for c in GRID_C for d in GRID_DELTA
    )
    N = 10**6
    off = 0.0
    for k, c, d in ((20, 0.1, 0.1), (100, 0.5, 0.05), (500, 1.0, 0.5)):
        dist = build_rsd(k, c, d)
        counts = np.bincount(sample_degrees(dist, np.random.default_rng(k), N), minlength=k + 1)[1:]
        p = dist.omega
        z = np.abs(counts - N * p) / np.sqrt(np.maximum(N * p * (1 - p), 1e-300))
        off = max(off, float(z[p > 0].max()))
    ok = worst < 1e-12 and off <= 4
    verdict("AC1", ok, f"max |sum-1|={worst:.2e}, max |z|={off:.2f}")
    assert ok


def test_ac2_decoders_match_rank_oracle(verdict):
    k, S = 20, 60
    dist = build_rsd(k, 0.1, 0.1)
    rng = np.random.default_rng(2)
    violations = 0
    for t in range(10_000):
        K = 25 + t % 26
        rows = random_coeff_rows(dist, S, rng)
        picked = [rows[i] for i in rng.choice(S, size=K, replace=False)]
        drops = [Droplet(r, k) for r in picked]
        full = gf2.rank(gf2.BitMatrix(picked, k)) == k
        violations += ofg_decode(drops, k).success != full
        violations += brh_decode(drops, K, k).success != full
        violations += bp_decode(drops, k).success and not full
    ok = violations == 0
    verdict("AC2", ok, f"{violations} violations over 10^4 instances")
    assert ok


def test_ac3_payload_round_trips(verdict):
    k, S = 20, 60
    dist = build_rsd(k, 0.1, 0.1)
    rng = np.random.default_rng(3)
    mismatches = 0
    solved = dict.fromkeys(("bp", "ofg", "brh", "crh"), 0)
    for _ in range(1000):
        epoch = Epoch.random(k, 16, rng)
        node = generate_full_node(epoch, S, dist, rng)
        drops = list(node.droplets)
        outs = {
            "bp": bp_decode(drops, k),
            "ofg": ofg_decode(drops, k),
            "brh": brh_decode(drops[:40], 40, k),
            "crh": crh_decode(node, 5, None, k, rng),
        }
        for name, out in outs.items():
            if out.success:
                solved[name] += 1
                mismatches += not np.array_equal(out.blocks(), epoch.blocks)
    ok = mismatches == 0 and min(solved.values()) > 0
    verdict("AC3", ok, f"{mismatches} mismatches; decoded {solved}")
    assert ok


def test_ac4_bp_failure_at_k_bp(verdict):
    lines = []
    ok = True
    for k in (20, 50):
        K = math.ceil(cost.k_bp(k, 0.1, 0.1))
        res = run_experiment(ExperimentConfig(k=k, S=K + 1, K=K, decoder="bp", trials=10_000, master_seed=4))
        good = res.failure_rate <= 0.1 + 3 * res.stderr
        ok &= good
        lines.append(f"k={k} K={K} rate={res.failure_rate:.4f}")
    verdict("AC4", ok, "; ".join(lines))
    assert ok


def test_ac5_ofg_xor_bound(verdict):
    k, S = 20, 60
    dist = build_rsd(k, 0.1, 0.1)
    rng = np.random.default_rng(5)
    worst = 0
    for t in range(10_000):
        K = k + t % (S - k + 1)
        out = ofg_decode([Droplet(r, k) for r in random_coeff_rows(dist, K, rng)], k)
        worst = max(worst, out.xor_count)
    ok = worst <= k * k
    verdict("AC5", ok, f"max xor_count={worst}, bound={k * k}")
    assert ok


def test_ac6_table1(verdict):
    rows = experiments.table1(10, trials=10_000, seed=6)
    ok = all(abs(r["K_min"] - 15) <= 1 and abs(r["eta_min"] - 5) <= 1 for r in rows)
    a1 = next(r for r in rows if r["alpha"] == 1)
    ok &= abs(a1["M_BR_min"] - 81) <= 0.15 * 81 and abs(a1["M_CR_min"] - 70) <= 0.15 * 70
    spot = experiments.optimize_table(50, [45], trials=10_000, seed=6)[0]
    ok &= abs(spot["K_min"] - 59) <= 2
    detail = ", ".join(f"a={r['alpha']}:K={r['K_min']},eta={r['eta_min']}" for r in rows)
    detail += f"; M_BR={a1['M_BR_min']:.1f} M_CR={a1['M_CR_min']:.1f}; k=50 a=45 K={spot['K_min']}"
    verdict("AC6", ok, detail)
    assert ok


def test_ac7_hybrid_beats_endpoints(verdict):
    rows = experiments.hybrid_vs_endpoints(10, alphas=(1, 3, 5), trials=10_000, seed=7)
    ok = all(r["pass"] for r in rows)
    detail = ", ".join(f"a={r['alpha']}: {r['hybrid_min']:.1f} vs {r['endpoint_min']:.1f}" for r in rows)
    verdict("AC7", ok, detail)
    assert ok


def test_ac8_example_scores(verdict):
    table = ["001000", "000010", "101000", "000101", "000011", "010010", "011001", "101101", "111010", "111111"]
    want = [2.03125, 2.15625, 0.78125, 0.65625, 0.53125, 0.65625, 0.28125, 0.15625, 0.15625, 0.03125]
    read = adv.ReadSet(tuple(range(1, 11)), tuple(bits(s) for s in table))
    got = adv.compute_scores(read).tolist()
    erased = adv.attack_score(read, 5).erased
    ok = got == want and erased == {2, 1, 3, 4, 6}
    verdict("AC8", ok, f"erased {sorted(erased)}")
    assert ok


def test_ac9_attack_trends(verdict):
    notes = []
    # (a) degree attack vs xi, and against blind
    fig9 = experiments.attack_grid("bp", ("blind", "degree"), (0.1, 0.2, 0.3, 0.4), xis=experiments.XI5, trials=10_000, seed=9)
    ok_a = True
    for sigma in (0.1, 0.2, 0.3, 0.4):
        col = [r for r in fig9 if r["sigma"] == sigma]
        for lo, hi in zip(col, col[1:]):
            ok_a &= hi["degree"] >= lo["degree"] - 3 * _sep(hi["degree_stderr"], lo["degree_stderr"])
    top = next(r for r in fig9 if r["sigma"] == 0.4 and r["xi"] == 2.5)
    ok_a &= top["degree"] - top["blind"] > 3 * _sep(top["degree_stderr"], top["blind_stderr"])
    notes.append(f"a: degree {top['degree']:.3f} vs blind {top['blind']:.3f}")

    # (b) score vs degree; gap pooled over the sigma0 grid
    ok_b = True
    gaps = {}
    for sigma in (0.05, 0.2):
        cells = [_paired(dict(k=20, S=60, decoder="bp", sigma=sigma, sigma0=s0, trials=10_000, master_seed=91), "score", "degree")
                 for s0 in (0.6, 0.7, 0.8, 0.9)]
        ok_b &= all(m >= -3 * se for m, se in cells)
        gaps[sigma] = (np.mean([m for m, _ in cells]), math.sqrt(sum(se * se for _, se in cells)) / len(cells))
    (g1, s1), (g2, s2) = gaps[0.05], gaps[0.2]
    ok_b &= g1 - g2 > 3 * _sep(s1, s2)
    notes.append(f"b: gap {g1:.4f} vs {g2:.4f}")

    # (c) CRH: score wins with many BP-recovered blocks, min-rank wins without
    ok_c = True
    for eta_c, sign in ((16, 1), (0, -1)):
        cells = [_paired(dict(k=20, S=60, decoder="crh", eta_c=eta_c, sigma=0.3, sigma0=round(0.3 * xi, 12), trials=10_000, master_seed=92), "score", "minrank")
                 for xi in (1.5, 2.0, 2.5, 3.0)]
        ok_c &= all(sign * m >= -3 * se for m, se in cells)
        m, se = cells[-1]
        ok_c &= sign * m > 3 * se
        notes.append(f"c: eta_c={eta_c} score-minrank at xi=3 {m:+.4f}")

    # (d) blind rate flat in xi, one seed per cell
    ok_d = True
    for sigma in (0.1, 0.2, 0.3, 0.4):
        col = [r for r in fig9 if r["sigma"] == sigma]
        mean = np.mean([r["blind"] for r in col])
        ok_d &= all(abs(r["blind"] - mean) <= 3 * max(r["blind_stderr"], 1e-12) for r in col)

    ok = ok_a and ok_b and ok_c and ok_d
    verdict("AC9", ok, f"a={ok_a} b={ok_b} c={ok_c} d={ok_d}; " + "; ".join(notes))
    assert ok


def test_ac10_min_rank_quality(verdict):
    k = 20
    dist = build_rsd(k, 0.1, 0.1)
    rng = np.random.default_rng(10)
    wins = 0
    for _ in range(200):
        rows = random_coeff_rows(dist, 30, rng)
        keep = adv.min_rank_survivors(rows, 20, k)
        heur = rank_mod2([rows[i] for i in keep], k)
        best_random = min(
            rank_mod2([rows[i] for i in rng.choice(30, size=20, replace=False)], k) for _ in range(100)
        )
        wins += heur <= best_random
    worst_gap = 0
    for _ in range(50):
        rows = random_coeff_rows(dist, 12, rng)
        keep = adv.min_rank_survivors(rows, 8, k)
        worst_gap = max(worst_gap, rank_mod2([rows[i] for i in keep], k) - min_rank_exhaustive(rows, 4, k))
    ok = wins >= 190 and worst_gap <= 2
    verdict("AC10", ok, f"beats random in {wins}/200, worst gap to exhaustive {worst_gap}")
    assert ok


SWEEPS = (
    ("bp", None, 1.0, None, "strict"),
    ("ofg", None, 1.5, None, "strict"),
    ("brh", None, 1.4, 44, "cap"),
    ("crh", 6, 1.0, None, "strict"),
)


def test_ac11_budget_sweeps(verdict):
    k, S = 20, 60
    dist = build_rsd(k, 0.1, 0.1)
    ok = True
    n_points = 0
    for j, (kind, eta_c, nu_factor, K, policy) in enumerate(SWEEPS):
        nu = nu_factor * S
        for zeta in (1.25, 1.5, 1.75, 2.0):
            sweep = adv.sweep_attack(kind, eta_c, k, S, nu, zeta, dist, 300, np.random.default_rng([11, j]), 0.01, K, 1, policy)
            sigma_max = nu / (S * (1 + zeta))
            sigmas = [p.sigma for p in sweep]
            n_points += len(sweep)
            ok &= all(p.sigma * S * (p.sigma0 / p.sigma + zeta) <= nu + 1e-9 for p in sweep)
            ok &= all(abs(s / 0.01 - round(s / 0.01)) < 1e-9 for s in sigmas)
            grid = [round(i * 0.01, 10) for i in range(1, int(sigma_max / 0.01 + 1e-9) + 1)]
            ok &= set(sigmas) <= set(grid)
            # a grid point may be skipped only if erasing its whole-node count cannot fit the budget
            for s in set(grid) - set(sigmas):
                n_e = adv.node_count(s, S)
                ok &= n_e + zeta * max(n_e, s * S) > nu + 1e-9
            best = adv.best_point(sweep)
            ok &= best.failure_rate == max(p.failure_rate for p in sweep)
            sig, sig0, rate = adv.optimize_attack(kind, eta_c, k, S, nu, zeta, dist, 300, np.random.default_rng([11, j]), K=K, K_policy=policy)
            ok &= (sig, sig0, rate) == (best.sigma, best.sigma0, best.failure_rate)
    verdict("AC11", ok, f"{n_points} sweep points checked")
    assert ok


def test_ac12_worker_independence(verdict):
    grid = lambda w: to_csv(experiments.attack_grid(
        "bp", ("blind", "score"), (0.1, 0.3), xis=(1.5, 2.5), trials=400, seed=12, workers=w))
    sweep = lambda w: to_csv(experiments.budget_sweeps("ofg", 1.0, zetas=(1.5,), trials=200, seed=12, step=0.05, workers=w))
    base_g, base_s = grid(1), sweep(1)
    ok = all(grid(w) == base_g and sweep(w) == base_s for w in (2, 3))
    verdict("AC12", ok, "CSV identical for workers 1, 2, 3" if ok else "CSV differs across worker counts")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
