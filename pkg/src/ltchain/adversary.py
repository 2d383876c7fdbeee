"""Oblivious and non-oblivious erasure adversaries against a full node.

A non-oblivious adversary reads the coefficient vectors of a random
``sigma0`` fraction of the droplet nodes and erases a ``sigma`` fraction
chosen among them. Node counts are ``round_half_up(fraction * S)``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gf2 import PivotBasis, popcount
from .lt import DegreeDistribution, round_half_up

STRATEGIES = ("blind", "degree", "score", "min_rank", "crh_dispatch")


@dataclass(frozen=True)
class AttackModel:
    sigma0: float
    sigma: float
    zeta: float = 1.0
    nu: float = math.inf
    c_r: float = 1.0

    def __post_init__(self):
        if not 0 < self.sigma <= self.sigma0 <= 1:
            raise ValueError("need 0 < sigma <= sigma0 <= 1")
        if self.zeta < 1:
            raise ValueError("zeta must be >= 1")

    @property
    def xi(self) -> float:
        return self.sigma0 / self.sigma

    @property
    def c_e(self) -> float:
        return self.zeta * self.c_r


@dataclass(frozen=True)
class ReadSet:
    """Node indices read by the adversary (ascending) and their coefficient rows."""

    indices: tuple[int, ...]
    rows: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def degrees(self) -> list[int]:
        return [popcount(r) for r in self.rows]


@dataclass(frozen=True)
class AttackPlan:
    erased: frozenset[int]
    strategy: str

    def __len__(self) -> int:
        return len(self.erased)


def node_count(fraction: float, S: int) -> int:
    return round_half_up(fraction * S)


def make_read_set(indices: Sequence[int], coeffs: Sequence[int]) -> ReadSet:
    idx = tuple(sorted(int(i) for i in indices))
    return ReadSet(idx, tuple(coeffs[i] for i in idx))


def sample_read_set(S: int, sigma0: float, rng: np.random.Generator, coeffs: Sequence[int] | None = None) -> ReadSet:
    """Uniform ``round(sigma0 S)``-subset of the ``S`` droplet nodes."""
    if not 0 < sigma0 <= 1:
        raise ValueError("sigma0 must lie in (0, 1]")
    n = node_count(sigma0, S)
    if n == 0:
        raise ValueError(f"sigma0={sigma0} reads no node out of {S}")
    idx = np.sort(rng.choice(S, size=n, replace=False))
    if coeffs is None:
        return ReadSet(tuple(int(i) for i in idx), ())
    return make_read_set(idx, coeffs)


def attack_blind(S: int, sigma: float, rng: np.random.Generator) -> AttackPlan:
    """Oblivious adversary: erase a uniform ``round(sigma S)``-subset."""
    if not 0 < sigma <= 1:
        raise ValueError("sigma must lie in (0, 1]")
    n = node_count(sigma, S)
    if n == 0:
        raise ValueError(f"sigma={sigma} erases no node out of {S}")
    return AttackPlan(frozenset(int(i) for i in rng.choice(S, size=n, replace=False)), "blind")


def _check_count(read: ReadSet, erase_count: int) -> None:
    if not 0 <= erase_count <= len(read):
        raise ValueError(f"cannot erase {erase_count} of {len(read)} read nodes")


def attack_degree(read: ReadSet, erase_count: int) -> AttackPlan:
    """Erase the lowest-degree read nodes; ties go to the lower node index."""
    _check_count(read, erase_count)
    order = sorted(range(len(read)), key=lambda i: (popcount(read.rows[i]), read.indices[i]))
    return AttackPlan(frozenset(read.indices[i] for i in order[:erase_count]), "degree")


def compute_scores(read: ReadSet) -> np.ndarray:
    """Score of each read node, aligned with ``read.indices``.

    A node of degree ``d`` starts at ``2**-(d-1)`` and gains ``2**-(d'-1)``
    for every read node of strictly larger degree ``d'`` whose neighbours
    contain its own.
    """
    rows = read.rows
    deg = [popcount(r) for r in rows]
    weight = [0.5 ** (d - 1) for d in deg]
    by_degree = sorted(range(len(rows)), key=deg.__getitem__)
    scores = np.array(weight, dtype=float)
    for pos, i in enumerate(by_degree):
        r, d = rows[i], deg[i]
        total = 0.0
        for j in by_degree[pos + 1:]:
            if deg[j] > d and rows[j] & r == r:
                total += weight[j]
        scores[i] += total
    return scores


def attack_score(read: ReadSet, erase_count: int) -> AttackPlan:
    """Erase the highest-scoring read nodes; ties go to the lower node index."""
    _check_count(read, erase_count)
    scores = compute_scores(read)
    order = sorted(range(len(read)), key=lambda i: (-scores[i], read.indices[i]))
    return AttackPlan(frozenset(read.indices[i] for i in order[:erase_count]), "score")


def min_rank_survivors(rows: Sequence[int], keep: int, k: int | None = None, fallback: str = "lookahead") -> list[int]:
    """Greedy low-rank row selection; returns positions into ``rows``.

    Seeds with the first row, then repeatedly takes the first unused row
    already in the span of the selection. When there is none, ``fallback``
    picks the row that grows the rank: ``"first"`` takes the first unused
    row, ``"lookahead"`` the row whose addition pulls the most other unused
    rows into the span, preferring sparser canonical forms, then lower
    positions. Each unused row is tracked by its canonical
    form modulo the span, so rows sharing a form join the span together.
    """
    n = len(rows)
    if not 1 <= keep <= n:
        raise ValueError(f"cannot keep {keep} of {n} rows")
    if fallback not in ("first", "lookahead"):
        raise ValueError(f"unknown fallback {fallback!r}")
    k = k or max((r.bit_length() for r in rows), default=1)
    basis = PivotBasis(k)
    basis.add(rows[0])
    selected = [0]
    unused = list(range(1, n))
    red = {j: basis.canonical(rows[j]) for j in unused}
    for _ in range(1, keep):
        pos = next((p for p, j in enumerate(unused) if red[j] == 0), None)
        if pos is None:
            pos = 0
            if fallback == "lookahead":
                counts = Counter(red[j] for j in unused)
                pos = max(range(len(unused)), key=lambda p: (counts[red[unused[p]]], -popcount(red[unused[p]]), -p))
        j = unused.pop(pos)
        selected.append(j)
        new = red.pop(j)
        if new:
            basis.add(new)
            lead = new & -new
            for u in unused:
                if red[u] & lead:
                    red[u] ^= new
    return selected


def attack_min_rank(read: ReadSet, erase_count: int, k: int | None = None, fallback: str = "lookahead") -> AttackPlan:
    """Keep a low-rank subset of the read rows and erase the rest."""
    _check_count(read, erase_count)
    if erase_count == len(read):
        return AttackPlan(frozenset(read.indices), "min_rank")
    keep = set(min_rank_survivors(read.rows, len(read) - erase_count, k, fallback))
    return AttackPlan(frozenset(read.indices[i] for i in range(len(read)) if i not in keep), "min_rank")


def attack_for_decoder(decoder_kind: str, eta_c: int | None, read: ReadSet, erase_count: int, k: int | None = None) -> AttackPlan:
    """Strategy matched to the victim's decoder."""
    kind = decoder_kind.lower()
    if kind == "bp":
        return attack_score(read, erase_count)
    if kind in ("ofg", "brh"):
        return attack_min_rank(read, erase_count, k)
    if kind == "crh":
        if eta_c is None:
            raise ValueError("crh dispatch needs eta_c")
        if eta_c > 0:
            plan = attack_score(read, erase_count)
        else:
            plan = attack_min_rank(read, erase_count, k)
        return AttackPlan(plan.erased, "crh_dispatch")
    raise ValueError(f"unknown decoder kind {decoder_kind!r}")


def attack_cost(sigma0: float, sigma: float, S: int, c_r: float = 1.0, c_e: float = 1.0) -> float:
    """``c_r * nodes read + c_e * nodes erased``."""
    if not 0 < sigma <= sigma0 <= 1:
        raise ValueError("need 0 < sigma <= sigma0 <= 1")
    return c_r * node_count(sigma0, S) + c_e * node_count(sigma, S)


def normalized_attack_cost(sigma0: float, sigma: float, S: int, zeta: float) -> float:
    """``sigma S (xi + zeta)`` with the read cost normalized to 1."""
    return sigma * S * (sigma0 / sigma + zeta)


class InfeasibleBudgetError(ValueError):
    """No (sigma, sigma0) pair fits the attack budget."""


@dataclass(frozen=True)
class SweepPoint:
    sigma: float
    sigma0: float
    failure_rate: float
    stderr: float
    cost: float


def budget_sweep(S: int, nu: float, zeta: float, step: float = 0.01) -> list[tuple[float, float]]:
    """Feasible ``(sigma, sigma0)`` pairs for budget ``nu``.

    ``sigma`` runs over multiples of ``step`` up to ``nu / (S (1 + zeta))``.
    ``sigma0`` spends the rest of the budget on reading, rounded down to a
    whole node, capped at 1 and raised to at least ``sigma``, so both the
    continuous and the whole-node cost stay within ``nu``.
    """
    if not nu > 0:
        raise ValueError("nu must be positive")
    if zeta < 1:
        raise ValueError("zeta must be >= 1")
    sigma_max = nu / (S * (1 + zeta))
    pairs = []
    i = 1
    while i * step <= sigma_max + 1e-12:
        sigma = round(i * step, 10)
        i += 1
        n_e = node_count(sigma, S)
        if n_e == 0:
            continue
        n_r = min(S, math.floor(nu - zeta * max(n_e, sigma * S) + 1e-9))
        if n_r < n_e:
            continue
        # rounding can leave n_r / S just below sigma; reading the erased nodes still fits
        pairs.append((sigma, max(n_r / S, sigma)))
    return pairs


def sweep_attack(
    decoder_kind: str,
    eta_c: int | None,
    k: int,
    S: int,
    nu: float,
    zeta: float,
    dist: DegreeDistribution,
    trials: int,
    rng: np.random.Generator | int | None = None,
    step: float = 0.01,
    K: int | None = None,
    workers: int = 1,
    K_policy: str = "strict",
) -> list[SweepPoint]:
    """Monte Carlo failure rate at every feasible budget point.

    Each point gets its own seed drawn from ``rng``, so the sweep does not
    depend on how points are scheduled.
    """
    from .sim import ExperimentConfig, run_experiment

    pairs = budget_sweep(S, nu, zeta, step)
    if not pairs:
        raise InfeasibleBudgetError(f"no feasible sweep point for nu={nu}, zeta={zeta}, S={S}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    seeds = rng.integers(0, 2**63 - 1, size=len(pairs))
    sweep = []
    for (sigma, sigma0), seed in zip(pairs, seeds):
        cfg = ExperimentConfig(
            k=k, S=S, c=dist.c, delta=dist.delta, decoder=decoder_kind, K=K, eta_c=eta_c,
            strategy="auto", sigma=sigma, sigma0=sigma0, trials=trials, master_seed=int(seed),
            K_policy=K_policy,
        )
        res = run_experiment(cfg, workers=workers, dist=dist)
        sweep.append(SweepPoint(sigma, sigma0, res.failure_rate, res.stderr, normalized_attack_cost(sigma0, sigma, S, zeta)))
    return sweep


def best_point(sweep: Sequence[SweepPoint]) -> SweepPoint:
    """Highest failure rate; the first (smallest sigma) wins ties."""
    return max(sweep, key=lambda p: p.failure_rate)


def optimize_attack(decoder_kind, eta_c, k, S, nu, zeta, dist, trials, rng=None, **kw) -> tuple[float, float, float]:
    """Budget-constrained attack: ``(sigma, sigma0, failure_rate)`` maximizing failures."""
    best = best_point(sweep_attack(decoder_kind, eta_c, k, S, nu, zeta, dist, trials, rng, **kw))
    return best.sigma, best.sigma0, best.failure_rate
