"""Overhead/complexity formulas, the OFG failure bound, and mirroring-cost optimizers.

Costs are normalized so one droplet XOR costs 1 and one droplet download
costs ``alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .decoders import PeelingState
from .gf2 import PivotBasis
from .lt import DegreeDistribution, build_rsd, random_coeff_rows


def _check_params(k, c, delta):
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def k_bp(k: int, c: float, delta: float) -> float:
    """Average BP bootstrap overhead, ``k + c sqrt(k) ln^2(k/delta)``."""
    _check_params(k, c, delta)
    return k + c * math.sqrt(k) * math.log(k / delta) ** 2


def _log_term(k, c, delta):
    return math.log(c * k**1.5 * math.log(k / delta) / delta) + 1.577


def avg_degree(k: int, c: float, delta: float) -> float:
    """Closed-form approximation of the mean droplet degree.

    Uses ``H(k) ~ ln k + 0.577``, so it is poor for very small ``k``; the
    exact mean is ``build_rsd(k, c, delta).mean()``.
    """
    _check_params(k, c, delta)
    return _log_term(k, c, delta) / build_rsd(k, c, delta).beta


def c_bp(k: int, c: float, delta: float) -> float:
    """Average BP XOR count, ``k * (ln(c k^1.5 ln(k/delta) / delta) + 1.577)``."""
    _check_params(k, c, delta)
    return k * _log_term(k, c, delta)


# ---------------------------------------------------------------------------
# OFG failure bound

_EVEN_CACHE: dict[tuple, np.ndarray] = {}


def _even_overlap_prob(dist: DegreeDistribution) -> np.ndarray:
    """``q[w-1]`` = P(a random droplet meets a fixed weight-``w`` set evenly).

    Hypergeometric terms are summed in log space (positive terms only), so
    nothing overflows at k = 500.
    """
    key = (dist.k, dist.omega.tobytes())
    hit = _EVEN_CACHE.get(key)
    if hit is not None:
        return hit
    k = dist.k
    d = np.arange(1, k + 1)
    logomega = np.log(np.where(dist.omega > 0, dist.omega, 1.0))
    logomega[dist.omega <= 0] = -np.inf
    lnC = lambda n, r: gammaln(n + 1) - gammaln(r + 1) - gammaln(n - r + 1)  # noqa: E731
    log_ckd = lnC(k, d)
    q = np.empty(k)
    for w in range(1, k + 1):
        ls = np.arange(0, min(w, k) + 1, 2)  # the bracket vanishes for odd l
        L, D = np.meshgrid(ls, d, indexing="ij")
        valid = (D - L >= 0) & (D - L <= k - w)
        Lc, Dc = np.where(valid, L, 0), np.where(valid, D - L, 0)
        terms = np.where(valid, lnC(w, Lc) + lnC(k - w, Dc) - log_ckd[None, :], -np.inf)
        per_degree = logsumexp(terms, axis=0)  # log P(even | d), one per degree
        q[w - 1] = math.exp(logsumexp(per_degree + logomega)) if np.isfinite(per_degree + logomega).any() else 0.0
    q = np.minimum(q, 1.0)
    _EVEN_CACHE[key] = q
    return q


def pf_upper_bound(k: int, epsilon: float, dist: DegreeDistribution, clamp: bool = True) -> float:
    """Union bound on OFG failure with ``k (1 + epsilon)`` droplets.

    Sum over nonzero weight-``w`` vectors of ``P(all droplets orthogonal)``.
    """
    if dist.k != k:
        raise ValueError(f"distribution is for k={dist.k}, not {k}")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    q = _even_overlap_prob(dist)
    w = np.arange(1, k + 1)
    logC = gammaln(k + 1) - gammaln(w + 1) - gammaln(k - w + 1)
    with np.errstate(divide="ignore"):
        logq = np.log(q)
    terms = logC + k * (1 + epsilon) * logq
    if not np.isfinite(terms).any():
        return 0.0
    p = math.exp(logsumexp(terms))
    return min(p, 1.0) if clamp else p


@dataclass(frozen=True)
class FailureBound:
    epsilon: float
    p_f: float
    epsilon_min: float


class UnboundedError(RuntimeError):
    """No overhead within the search cap meets the failure target."""


def k_ofg(k: int, delta: float, dist: DegreeDistribution, m_cap: int | None = None) -> int:
    """``k + m`` for the smallest ``m >= 1`` with ``pf_upper_bound(m/k) <= delta``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    m_cap = 5 * k if m_cap is None else m_cap
    for m in range(1, m_cap + 1):
        if pf_upper_bound(k, m / k, dist) <= delta:
            return k + m
    raise UnboundedError(f"P_F stays above {delta} for every m <= {m_cap}")


def ofg_failure_bound(k: int, delta: float, dist: DegreeDistribution, epsilon: float) -> FailureBound:
    return FailureBound(epsilon, pf_upper_bound(k, epsilon, dist), k_ofg(k, delta, dist) / k - 1)


# ---------------------------------------------------------------------------
# Monte Carlo statistics for the hybrid decoders


@dataclass(frozen=True)
class BrhStats:
    k: int
    K_BR: int
    mean_eta_b: float
    mean_sq_residual: float
    trials: int


@dataclass(frozen=True)
class CrhStats:
    k: int
    eta_c: int
    K_CR_av: float
    trials: int
    failure_rate: float = 0.0


def bp_progress(rows: Sequence[int], k: int) -> list[int]:
    """Blocks resolved by peeling each prefix: entry ``n-1`` is for the first ``n`` rows."""
    peel = PeelingState(k)
    out = []
    for r in rows:
        peel.add(r)
        out.append(peel.peel())
    return out


def first_full_rank(rows: Sequence[int], k: int) -> int | None:
    """Smallest prefix length whose rows span GF(2)^k, or None."""
    basis = PivotBasis(k)
    for n, r in enumerate(rows, start=1):
        if basis.add(r) and basis.rank == k:
            return n
    return None


def brh_stats_curve(
    k: int, K_values: Sequence[int], dist: DegreeDistribution, trials: int, rng: np.random.Generator
) -> list[BrhStats]:
    """BP-phase statistics for several ``K_BR`` from one nested ensemble.

    Each trial draws ``max(K_values)`` droplets; the ensemble for ``K_BR`` is
    its first ``K_BR`` droplets, so all grid points share random numbers.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    K_values = list(K_values)
    K_max = max(K_values)
    idx = np.array(K_values) - 1
    eta_sum = np.zeros(len(K_values))
    sq_sum = np.zeros(len(K_values))
    for _ in range(trials):
        eta = np.asarray(bp_progress(random_coeff_rows(dist, K_max, rng), k))[idx]
        eta_sum += eta
        sq_sum += (k - eta) ** 2
    return [
        BrhStats(k, K, eta_sum[i] / trials, sq_sum[i] / trials, trials)
        for i, K in enumerate(K_values)
    ]


def estimate_brh_stats(
    k: int, K_BR: int, dist: DegreeDistribution, trials: int, rng: np.random.Generator
) -> BrhStats:
    return brh_stats_curve(k, [K_BR], dist, trials, rng)[0]


def crh_stopping_times(rows: Sequence[int], k: int, K_init: int, progress: Sequence[int] | None = None) -> list[int | None]:
    """Droplets the CRH decoder contacts for each ``eta_c`` in ``0..k``.

    Equivalent to running the decoder on ``rows`` in order: it stops at the
    first prefix of length >= ``K_init`` whose peeling resolves at least
    ``eta_c`` blocks and whose rows have rank ``k``. ``None`` marks failure.
    ``progress`` may pass in a precomputed ``bp_progress(rows, k)``.
    """
    progress = bp_progress(rows, k) if progress is None else progress
    n_rank = first_full_rank(rows, k)
    out: list[int | None] = []
    n = 0
    for eta_c in range(k + 1):
        while n < len(progress) and progress[n] < eta_c:
            n += 1
        if n == len(progress) or n_rank is None:
            out.append(None)
        else:
            out.append(max(K_init, n + 1, n_rank))
    # a prefix that peels completely is always full rank, so n_rank <= n + 1 there
    return out


def crh_stats_curve(
    k: int,
    S: int,
    dist: DegreeDistribution,
    trials: int,
    rng: np.random.Generator,
    K_init: int | None = None,
) -> list[CrhStats]:
    """Average CRH bootstrap overhead for every ``eta_c`` in ``0..k``.

    A trial that exhausts all ``S`` nodes counts ``S`` contacted nodes.
    """
    if S <= k:
        raise ValueError("S must exceed k")
    K_init = k + 1 if K_init is None else K_init
    used = np.zeros(k + 1)
    fails = np.zeros(k + 1)
    for _ in range(trials):
        for e, t in enumerate(crh_stopping_times(random_coeff_rows(dist, S, rng), k, K_init)):
            if t is None:
                used[e] += S
                fails[e] += 1
            else:
                used[e] += t
    return [CrhStats(k, e, used[e] / trials, trials, fails[e] / trials) for e in range(k + 1)]


# ---------------------------------------------------------------------------
# Mirroring costs


def m_bp(alpha: float, K_BP: float, D: float) -> float:
    return K_BP * D + alpha * K_BP


def m_ofg(alpha: float, k: int, K_OFG: float) -> float:
    return k * k + alpha * K_OFG


def m_br(alpha: float, stats: BrhStats, D: float) -> float:
    k = stats.k
    return stats.K_BR * D * stats.mean_eta_b / k + stats.mean_sq_residual + alpha * stats.K_BR


def m_cr(alpha: float, stats: CrhStats, D: float) -> float:
    k = stats.k
    return stats.K_CR_av * D * stats.eta_c / k + (k - stats.eta_c) ** 2 + alpha * stats.K_CR_av


def mirroring_cost(decoder_kind: str, alpha: float, inputs) -> float:
    """Dispatch on ``decoder_kind``.

    ``inputs`` is ``(K_BP, D)`` for bp, ``(k, K_OFG)`` for ofg,
    ``(BrhStats, D)`` for brh and ``(CrhStats, D)`` for crh.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    kind = decoder_kind.lower()
    try:
        if kind == "bp":
            K, D = inputs
            return m_bp(alpha, float(K), float(D))
        if kind == "ofg":
            k, K = inputs
            return m_ofg(alpha, int(k), float(K))
        if kind == "brh":
            stats, D = inputs
            if not isinstance(stats, BrhStats):
                raise TypeError
            return m_br(alpha, stats, float(D))
        if kind == "crh":
            stats, D = inputs
            if not isinstance(stats, CrhStats):
                raise TypeError
            return m_cr(alpha, stats, float(D))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"inputs do not match decoder kind {decoder_kind!r}") from exc
    raise ValueError(f"unknown decoder kind {decoder_kind!r}")


def brh_range(k: int, c: float, delta: float, dist: DegreeDistribution | None = None) -> range:
    """Feasible ``K_BR`` values, ``[K_OFG, ceil(K_BP)]``."""
    dist = dist or build_rsd(k, c, delta)
    return range(k_ofg(k, delta, dist), math.ceil(k_bp(k, c, delta)) + 1)


def solve_problem_brh(
    alpha: float,
    k: int,
    dist: DegreeDistribution,
    K_range: Sequence[int] | None = None,
    trials: int = 10_000,
    rng: np.random.Generator | None = None,
    stats: Sequence[BrhStats] | None = None,
    D: float | None = None,
) -> tuple[int, float]:
    """Grid-search argmin of the BRH mirroring cost; ties go to smaller ``K_BR``.

    Pass precomputed ``stats`` to reuse one ensemble across several alphas.
    """
    if stats is None:
        if K_range is None:
            K_range = brh_range(k, dist.c, dist.delta, dist)
        if len(K_range) == 0:
            raise ValueError("empty K_BR range")
        stats = brh_stats_curve(k, K_range, dist, trials, rng or np.random.default_rng())
    D = avg_degree(k, dist.c, dist.delta) if D is None else D
    costs = [m_br(alpha, s, D) for s in stats]
    i = int(np.argmin(costs))
    return stats[i].K_BR, costs[i]


def solve_problem_crh(
    alpha: float,
    k: int,
    S: int,
    dist: DegreeDistribution,
    trials: int = 10_000,
    rng: np.random.Generator | None = None,
    stats: Sequence[CrhStats] | None = None,
    D: float | None = None,
) -> tuple[int, float]:
    """Grid-search argmin of the CRH mirroring cost over ``eta_c``; ties go to smaller ``eta_c``."""
    if stats is None:
        stats = crh_stats_curve(k, S, dist, trials, rng or np.random.default_rng())
    D = avg_degree(k, dist.c, dist.delta) if D is None else D
    costs = [m_cr(alpha, s, D) for s in stats]
    i = int(np.argmin(costs))
    return stats[i].eta_c, costs[i]
