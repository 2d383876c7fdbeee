"""Named experiment grids: the decoder trade-off, mirroring-cost tables and attack studies.

Every function returns a list of flat dict rows ready for ``sim.to_csv``.
"""

from __future__ import annotations

import math

import numpy as np

from . import cost
from .adversary import best_point, sweep_attack
from .lt import build_rsd, random_coeff_rows
from .sim import ExperimentConfig, run_experiment

# Reference optima at c = 0.1, delta = 0.1, costs in units of one XOR:
# alpha -> (K_min, eta_min, M_BR_min, M_CR_min)
TABLE1_REFERENCE = {
    10: {1: (15, 5, 81, 70), 2: (15, 5, 96, 85), 3: (15, 5, 111, 101), 4: (15, 5, 126, 116), 5: (15, 5, 141, 131)},
    50: {1: (91, 45, 637, 510), 15: (91, 45, 1910, 1570), 30: (74, 43, 3096, 2710), 45: (59, 43, 4134, 3840), 60: (59, 43, 5019, 4970)},
    100: {1: (163, 95, 1313, 1134), 35: (163, 95, 6854, 6030), 70: (163, 95, 12560, 11070), 105: (136, 90, 17780, 16100), 140: (109, 90, 21910, 21140)},
}
COST_TOL = 0.15


def _index_tol(k: int) -> int:
    return 1 if k <= 10 else 2


def tradeoff(k: int, c: float = 1.0, delta: float = 0.1, trials: int = 100, seed: int = 0, S: int | None = None) -> list[dict]:
    """Bootstrap overhead against average XOR complexity for every decoder.

    BP and OFG use their closed forms. BRH rows cover ``K_BR`` in
    ``[K_OFG, ceil(K_BP)]`` and CRH rows cover ``eta_c`` in ``0..k``; their
    ``E[eta_B]`` and ``K_CR^av`` come from one shared ensemble of droplet
    sequences of length ``S`` (default ``2 ceil(K_BP)``). CRH trials that
    exhaust ``S`` count ``S`` droplets.
    """
    dist = build_rsd(k, c, delta)
    K_ofg = cost.k_ofg(k, delta, dist)
    K_bp = cost.k_bp(k, c, delta)
    K_top = math.ceil(K_bp)
    S = S or max(2 * K_top, 3 * k)
    D = cost.avg_degree(k, c, delta)
    K_range = np.arange(K_ofg, K_top + 1)
    rng = np.random.default_rng(seed)
    eta_sum = np.zeros(len(K_range))
    sq_sum = np.zeros(len(K_range))
    used = np.zeros(k + 1)
    for _ in range(trials):
        rows = random_coeff_rows(dist, S, rng)
        progress = cost.bp_progress(rows, k)
        eta = np.asarray(progress)[K_range - 1]
        eta_sum += eta
        sq_sum += (k - eta) ** 2
        for e, t in enumerate(cost.crh_stopping_times(rows, k, k + 1, progress)):
            used[e] += S if t is None else t
    rows = [
        {"decoder": "bp", "param": K_top, "overhead": K_bp, "complexity": cost.m_bp(0.0, K_bp, D)},
        {"decoder": "ofg", "param": K_ofg, "overhead": float(K_ofg), "complexity": float(k * k)},
    ]
    for i, K in enumerate(K_range):
        st = cost.BrhStats(k, int(K), eta_sum[i] / trials, sq_sum[i] / trials, trials)
        rows.append({"decoder": "brh", "param": int(K), "overhead": float(K), "complexity": cost.m_br(0.0, st, D)})
    for e in range(k + 1):
        st = cost.CrhStats(k, e, used[e] / trials, trials)
        rows.append({"decoder": "crh", "param": e, "overhead": st.K_CR_av, "complexity": cost.m_cr(0.0, st, D)})
    return rows


def optimize_table(
    k: int, alphas, c: float = 0.1, delta: float = 0.1, trials: int = 10_000, seed: int = 0, S: int | None = None
) -> list[dict]:
    """Minimizers of the BRH and CRH mirroring costs for each ``alpha``.

    One ensemble per decoder is shared across all alphas.
    """
    dist = build_rsd(k, c, delta)
    S = S or 3 * k
    rng = np.random.default_rng(seed)
    brh_stats = cost.brh_stats_curve(k, cost.brh_range(k, c, delta, dist), dist, trials, rng)
    crh_stats = cost.crh_stats_curve(k, S, dist, trials, rng)
    D = cost.avg_degree(k, c, delta)
    K_bp = cost.k_bp(k, c, delta)
    K_ofg = cost.k_ofg(k, delta, dist)
    rows = []
    for alpha in alphas:
        K_min, m_br = cost.solve_problem_brh(alpha, k, dist, stats=brh_stats, D=D)
        eta_min, m_cr = cost.solve_problem_crh(alpha, k, S, dist, stats=crh_stats, D=D)
        rows.append({
            "alpha": alpha, "K_min": K_min, "eta_min": eta_min, "M_BR_min": m_br, "M_CR_min": m_cr,
            "M_BP": cost.m_bp(alpha, K_bp, D), "M_OFG": cost.m_ofg(alpha, k, K_ofg),
        })
    return rows


def table1(k: int = 10, trials: int = 10_000, seed: int = 0, alphas=None) -> list[dict]:
    """``optimize_table`` with reference optima and per-column pass flags."""
    ref = TABLE1_REFERENCE.get(k, {})
    alphas = list(alphas or ref or range(1, 6))
    rows = optimize_table(k, alphas, trials=trials, seed=seed)
    tol = _index_tol(k)
    for r in rows:
        r.pop("M_BP")
        r.pop("M_OFG")
        want = ref.get(r["alpha"])
        if want is None:
            continue
        rK, re, rbr, rcr = want
        r.update({
            "ref_K_min": rK, "ref_eta_min": re, "ref_M_BR": rbr, "ref_M_CR": rcr,
            "pass_K": abs(r["K_min"] - rK) <= tol,
            "pass_eta": abs(r["eta_min"] - re) <= tol,
            "pass_M_BR": abs(r["M_BR_min"] - rbr) <= COST_TOL * rbr,
            "pass_M_CR": abs(r["M_CR_min"] - rcr) <= COST_TOL * rcr,
        })
    return rows


def hybrid_vs_endpoints(k: int = 10, alphas=(1, 2, 3, 4, 5), trials: int = 10_000, seed: int = 0, rel_tol: float = 0.02) -> list[dict]:
    """Best hybrid cost against the cheaper of BP and OFG for each ``alpha``."""
    rows = optimize_table(k, alphas, trials=trials, seed=seed)
    for r in rows:
        hybrid = min(r["M_BR_min"], r["M_CR_min"])
        endpoint = min(r["M_BP"], r["M_OFG"])
        r["hybrid_min"] = hybrid
        r["endpoint_min"] = endpoint
        r["pass"] = hybrid <= endpoint * (1 + rel_tol)
    return rows


def attack_grid(
    decoder: str,
    strategies,
    sigmas,
    xis=None,
    sigma0s=None,
    k: int = 20,
    S: int = 60,
    trials: int = 10_000,
    seed: int = 0,
    workers: int | None = None,
    **extra,
) -> list[dict]:
    """Failure rate per strategy over a ``sigma`` by (``xi`` or ``sigma0``) grid.

    One row per cell with a ``<strategy>`` and ``<strategy>_stderr`` column
    for each strategy. All strategies in a cell share the cell's seed, so
    they face the same full nodes and read sets.
    """
    if (xis is None) == (sigma0s is None):
        raise ValueError("give exactly one of xis, sigma0s")
    cells = [(sigma, v) for sigma in sigmas for v in (xis if xis is not None else sigma0s)]
    seeds = np.random.SeedSequence(seed).generate_state(len(cells), dtype=np.uint64)
    rows = []
    for (sigma, v), cell_seed in zip(cells, seeds):
        sigma0 = min(1.0, round(v * sigma, 12)) if xis is not None else v
        xi = v if xis is not None else round(sigma0 / sigma, 12)
        row = {"decoder": decoder, "sigma": sigma, "xi": xi, "sigma0": sigma0}
        row.update(extra)
        for strategy in strategies:
            cfg = ExperimentConfig(
                k=k, S=S, decoder=decoder, strategy=strategy, sigma=sigma, sigma0=sigma0,
                trials=trials, master_seed=int(cell_seed), **extra,
            )
            res = run_experiment(cfg, workers=workers)
            row[strategy] = res.failure_rate
            row[f"{strategy}_stderr"] = res.stderr
        rows.append(row)
    return rows


def budget_sweeps(
    decoder: str, nu_factor: float, zetas=(1.25, 1.5, 1.75, 2.0), k: int = 20, S: int = 60,
    trials: int = 10_000, seed: int = 0, eta_c: int | None = None, K: int | None = None,
    step: float = 0.01, workers: int | None = None, K_policy: str = "strict",
) -> list[dict]:
    """Cost-constrained attack sweeps for several ``zeta``; the argmax row is flagged."""
    dist = build_rsd(k, 0.1, 0.1)
    nu = nu_factor * S
    rows = []
    for j, zeta in enumerate(zetas):
        sweep = sweep_attack(decoder, eta_c, k, S, nu, zeta, dist, trials, np.random.default_rng([seed, j]), step, K, workers or 1, K_policy)
        best = best_point(sweep)
        for p in sweep:
            rows.append({
                "decoder": decoder, "zeta": zeta, "nu": nu, "sigma": p.sigma, "sigma0": p.sigma0,
                "xi": p.sigma0 / p.sigma, "cost": p.cost, "failure_rate": p.failure_rate,
                "stderr": p.stderr, "argmax": p is best,
            })
    return rows


XI5 = (1.3, 1.6, 1.9, 2.2, 2.5)


def reproduce(target: str, trials: int, seed: int, k: int | None = None, workers: int | None = None) -> list[dict]:
    """Run a named grid; see ``TARGETS``."""
    if target == "table1":
        return table1(k or 10, trials, seed)
    if target == "fig8":
        return hybrid_vs_endpoints(k or 10, trials=trials, seed=seed)
    if target == "tradeoff":
        return tradeoff(k or 20, trials=trials, seed=seed)
    if target == "fig9":
        return attack_grid("bp", ("blind", "degree"), (0.1, 0.2, 0.3, 0.4), xis=XI5, trials=trials, seed=seed, workers=workers)
    if target == "fig10":
        return attack_grid("bp", ("degree", "score"), (0.05, 0.1, 0.15, 0.2), sigma0s=(0.6, 0.7, 0.8, 0.9), trials=trials, seed=seed, workers=workers)
    if target == "ofg-grid":
        return attack_grid("ofg", ("blind", "minrank"), (0.4, 0.45, 0.5, 0.55), xis=(1.2, 1.4, 1.6, 1.8), trials=trials, seed=seed, workers=workers)
    if target == "brh-grid":
        return attack_grid("brh", ("blind", "minrank"), (0.4, 0.45, 0.5, 0.55), xis=XI5, trials=trials, seed=seed, workers=workers, K=44, K_policy="cap")
    if target == "fig11":
        rows = []
        for i, eta_c in enumerate((0, 1, 16)):
            rows += attack_grid("crh", ("blind", "minrank", "score"), (0.3,), xis=(1.5, 2.0, 2.5, 3.0), trials=trials, seed=seed + i, workers=workers, eta_c=eta_c)
        return rows
    if target == "fig12":
        return budget_sweeps("bp", 1.0, trials=trials, seed=seed, workers=workers)
    if target == "fig13":
        return budget_sweeps("ofg", 1.5, trials=trials, seed=seed, workers=workers)
    if target == "fig14":
        return budget_sweeps("brh", 1.4, trials=trials, seed=seed, K=44, workers=workers, K_policy="cap")
    if target == "fig15":
        return budget_sweeps("crh", 1.0, trials=trials, seed=seed, eta_c=6, workers=workers)
    raise ValueError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")


TARGETS = ("table1", "fig8", "tradeoff", "fig9", "fig10", "ofg-grid", "brh-grid", "fig11", "fig12", "fig13", "fig14", "fig15")
