from __future__ import annotations

import math

import numpy as np
import pytest

from ltchain import cost
from ltchain.decoders import bp_decode, brh_decode, ofg_decode
from ltchain.lt import Droplet, build_rsd, random_coeff_rows
from oracles import pf_direct

DIST20 = build_rsd(20, 0.1, 0.1)


def test_k_bp_examples():
    assert cost.k_bp(1, 1, 1 / math.e) == pytest.approx(2.0)
    assert cost.k_bp(500, 1, 0.1) == pytest.approx(500 + math.sqrt(500) * math.log(5000) ** 2)
    with pytest.raises(ValueError):
        cost.k_bp(10, 0, 0.1)


def test_avg_degree_near_exact_mean():
    assert cost.avg_degree(20, 0.1, 0.1) == pytest.approx(DIST20.mean(), rel=0.10)
    assert build_rsd(1, 0.1, 0.1).mean() == 1.0


@pytest.mark.parametrize("k, c", [(20, 0.1), (500, 1.0), (50, 0.5)])
def test_c_bp_identity(k, c):
    d = build_rsd(k, c, 0.1)
    assert cost.c_bp(k, c, 0.1) == pytest.approx(k * d.beta * cost.avg_degree(k, c, 0.1), rel=1e-9)


def test_c_bp_vs_measured_bp_xors():
    rng = np.random.default_rng(0)
    K = math.ceil(cost.k_bp(20, 0.1, 0.1)) + 10
    xs = []
    for _ in range(2000):
        out = bp_decode([Droplet(r, 20) for r in random_coeff_rows(DIST20, K, rng)], 20)
        if out.success:
            xs.append(out.xor_count)
    assert np.mean(xs) == pytest.approx(cost.c_bp(20, 0.1, 0.1), rel=0.25)


def test_pf_k1_is_zero():
    assert cost.pf_upper_bound(1, 1.0, build_rsd(1, 0.1, 0.1)) == 0.0
    assert cost.k_ofg(1, 0.1, build_rsd(1, 0.1, 0.1)) == 2


@pytest.mark.parametrize("k, c, delta", [(4, 0.5, 0.5), (10, 0.1, 0.1), (20, 0.1, 0.1), (30, 1.0, 0.05)])
@pytest.mark.parametrize("eps", [0.1, 0.3, 0.8])
def test_pf_matches_direct_binomials(k, c, delta, eps):
    d = build_rsd(k, c, delta)
    assert cost.pf_upper_bound(k, eps, d) == pytest.approx(pf_direct(k, eps, d.omega), rel=1e-9, abs=1e-300)


def test_pf_nonincreasing_and_large_k_finite():
    eps = np.linspace(0.01, 1.5, 50)
    vals = [cost.pf_upper_bound(20, e, DIST20) for e in eps]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    d = build_rsd(500, 0.1, 0.1)
    v = cost.pf_upper_bound(500, 0.1, d)
    assert 0 <= v <= 1 and math.isfinite(v)


def test_k_ofg_minimality_and_ordering():
    for k in (20, 50, 100):
        d = build_rsd(k, 0.1, 0.1)
        m = cost.k_ofg(k, 0.1, d)
        assert cost.pf_upper_bound(k, (m - k) / k, d) <= 0.1 < cost.pf_upper_bound(k, (m - 1 - k) / k, d)
        assert m <= math.ceil(cost.k_bp(k, 0.1, 0.1))


def test_k_ofg_unbounded():
    with pytest.raises(cost.UnboundedError):
        cost.k_ofg(20, 1e-300, DIST20, m_cap=21)


@pytest.mark.parametrize("eps", [0.1, 0.2, 0.3])
def test_ofg_failure_below_bound(eps):
    k, N = 20, 10_000
    K = round(k * (1 + eps))
    rng = np.random.default_rng(int(eps * 100))
    fails = sum(not ofg_decode([Droplet(r, k) for r in random_coeff_rows(DIST20, K, rng)], k).success for _ in range(N))
    p = fails / N
    assert p <= cost.pf_upper_bound(k, (K - k) / k, DIST20) + 3 * math.sqrt(p * (1 - p) / N)


def test_brh_stats_basics():
    rng = np.random.default_rng(1)
    one = cost.estimate_brh_stats(1, 2, build_rsd(1, 0.1, 0.1), 50, rng)
    assert one.mean_eta_b == 1.0 and one.mean_sq_residual == 0.0
    big = cost.estimate_brh_stats(20, 400, DIST20, 200, rng)
    assert big.mean_eta_b > 19.9
    curve = cost.brh_stats_curve(20, range(20, 61, 5), DIST20, 500, rng)
    etas = [s.mean_eta_b for s in curve]
    assert all(a <= b for a, b in zip(etas, etas[1:]))  # nested prefixes: exact monotonicity
    for s in curve:
        assert s.mean_sq_residual >= (20 - s.mean_eta_b) ** 2 - 1e-9


def test_brh_stats_match_decoder():
    # the prefix estimator agrees with running brh_decode on the same rows
    rng = np.random.default_rng(2)
    k, K = 20, 30
    rows = [random_coeff_rows(DIST20, K, rng) for _ in range(200)]
    eta = np.mean([brh_decode([Droplet(r, k) for r in rs], K, k).eta_b for rs in rows])
    assert eta == pytest.approx(np.mean([cost.bp_progress(rs, k)[-1] for rs in rows]))


def test_brh_stats_seed_stability():
    d = build_rsd(50, 0.1, 0.1)
    a = cost.estimate_brh_stats(50, 91, d, 2000, np.random.default_rng(3))
    b = cost.estimate_brh_stats(50, 91, d, 2000, np.random.default_rng(4))
    # Var(eta) = E[(k - eta)^2] - (k - E[eta])^2
    var = [s.mean_sq_residual - (50 - s.mean_eta_b) ** 2 for s in (a, b)]
    assert abs(a.mean_eta_b - b.mean_eta_b) <= 3 * math.sqrt(sum(var) / 2000)


def test_crh_stats_extremes():
    rng = np.random.default_rng(5)
    curve = cost.crh_stats_curve(10, 30, build_rsd(10, 0.1, 0.1), 500, rng)
    assert len(curve) == 11
    assert curve[0].K_CR_av >= 11
    assert curve[10].K_CR_av == max(s.K_CR_av for s in curve)
    avg = [s.K_CR_av for s in curve]
    assert all(a <= b for a, b in zip(avg, avg[1:]))


def test_mirroring_cost_forms():
    assert cost.mirroring_cost("ofg", 1e-12, (20, 26)) == pytest.approx(400)
    s = cost.BrhStats(20, 30, 20.0, 0.0, 1)
    D = cost.avg_degree(20, 0.1, 0.1)
    assert cost.mirroring_cost("brh", 2.0, (s, D)) == pytest.approx(cost.mirroring_cost("bp", 2.0, (30, D)))
    c = cost.CrhStats(20, 6, 40.0, 1)
    assert cost.mirroring_cost("crh", 1.0, (c, D)) == pytest.approx(40 * D * 6 / 20 + 14**2 + 40)
    with pytest.raises(ValueError):
        cost.mirroring_cost("brh", 1.0, (c, D))
    with pytest.raises(ValueError):
        cost.mirroring_cost("xyz", 1.0, (1, 2))
    with pytest.raises(ValueError):
        cost.mirroring_cost("bp", 0.0, (1, 2))


def test_solve_brh_ties_and_empty_range():
    D = 1.0
    stats = [cost.BrhStats(10, K, 10.0, 0.0, 1) for K in (15, 16)]
    K, m = cost.solve_problem_brh(1.0, 10, build_rsd(10, 0.1, 0.1), stats=stats, D=0.0)
    assert K == 15 and m == 15.0
    with pytest.raises(ValueError):
        cost.solve_problem_brh(1.0, 10, build_rsd(10, 0.1, 0.1), K_range=range(5, 5), trials=10)


def test_optimizers_shift_left_with_alpha():
    d = build_rsd(50, 0.1, 0.1)
    rng = np.random.default_rng(6)
    stats = cost.brh_stats_curve(50, cost.brh_range(50, 0.1, 0.1, d), d, 1000, rng)
    K1, _ = cost.solve_problem_brh(1, 50, d, stats=stats)
    K60, _ = cost.solve_problem_brh(60, 50, d, stats=stats)
    assert K60 <= K1
    cstats = cost.crh_stats_curve(50, 150, d, 300, rng)
    e1, _ = cost.solve_problem_crh(1, 50, 150, d, stats=cstats)
    e60, _ = cost.solve_problem_crh(60, 50, 150, d, stats=cstats)
    assert e60 <= e1
