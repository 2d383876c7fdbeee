"""BP, OFG and the two hybrid LT decoders, instrumented with cost counters.

XOR accounting: one unit per droplet-to-droplet XOR (coefficients and
payload together). Coefficient-only bookkeeping used to decide whether a
droplet is innovative is not charged.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gf2 import PivotBasis, popcount, support
from .lt import Droplet, FullNode


@dataclass
class DecodeOutcome:
    success: bool
    xor_count: int
    droplets_used: int
    eta_b: int
    recovered: list = field(default_factory=list, repr=False)
    """Recovered block payloads in payload mode, else recovered block indices."""

    def blocks(self) -> np.ndarray:
        """Recovered epoch as a (k, block_size) array (payload mode, success only)."""
        return np.stack(self.recovered)


class PeelingState:
    """Bipartite peeling graph between droplets and unresolved blocks.

    Droplets can be added at any time; blocks already resolved are XORed out
    of a new droplet on arrival.
    """

    def __init__(self, k: int, with_payload: bool = False, rng: np.random.Generator | None = None):
        self.k = k
        self.with_payload = with_payload
        self.rng = rng
        self.coeffs: list[int] = []
        self.payloads: list = []
        self.degree: list[int] = []
        self.adj: list[list[int]] = [[] for _ in range(k)]
        self.queue: deque[int] = deque()
        self.values: list = [None] * k
        self.solved_mask = 0
        self.resolved = 0
        self.xor_count = 0

    def add(self, coeffs: int, payload=None) -> None:
        hit = coeffs & self.solved_mask
        if hit:
            coeffs ^= hit
            for m in support(hit):
                self.xor_count += 1
                if self.with_payload:
                    payload = payload ^ self.values[m]
        idx = len(self.coeffs)
        self.coeffs.append(coeffs)
        self.payloads.append(payload)
        deg = popcount(coeffs)
        self.degree.append(deg)
        for m in support(coeffs):
            self.adj[m].append(idx)
        if deg == 1:
            self.queue.append(idx)

    def _next_singleton(self) -> int:
        if self.rng is None:
            return self.queue.popleft()
        j = int(self.rng.integers(len(self.queue)))
        self.queue[j], self.queue[-1] = self.queue[-1], self.queue[j]
        return self.queue.pop()

    def peel(self) -> int:
        """Resolve singletons until none remain; return blocks resolved so far."""
        coeffs, degree, payloads = self.coeffs, self.degree, self.payloads
        with_payload = self.with_payload
        while self.queue and self.resolved < self.k:
            i = self._next_singleton()
            if degree[i] != 1:
                continue
            c = coeffs[i]
            m = c.bit_length() - 1
            value = payloads[i]
            self.values[m] = value
            self.solved_mask |= c
            self.resolved += 1
            coeffs[i] = 0
            degree[i] = 0
            for j in self.adj[m]:
                if coeffs[j] & c:
                    coeffs[j] ^= c
                    degree[j] -= 1
                    self.xor_count += 1
                    if with_payload:
                        payloads[j] = payloads[j] ^ value
                    if degree[j] == 1:
                        self.queue.append(j)
            self.adj[m] = []
        return self.resolved

    def residual(self) -> list[tuple[int, object]]:
        """Non-empty droplets still connected to unresolved blocks."""
        return [(c, p) for c, p in zip(self.coeffs, self.payloads) if c]

    def residual_rank(self) -> int:
        return PivotBasis(self.k, (c for c in self.coeffs if c)).rank


class OnTheFlyEliminator:
    """Triangular pivot structure filled one droplet at a time.

    Slot ``j`` holds a row whose lowest set column is ``j``. An incoming row
    is reduced against occupied slots; a row that reduces to zero is
    discarded before any payload is touched.
    """

    def __init__(self, with_payload: bool = False):
        self.with_payload = with_payload
        self.slots: dict[int, tuple[int, object]] = {}
        self.xor_count = 0

    @property
    def rank(self) -> int:
        return len(self.slots)

    def add(self, coeffs: int, payload=None) -> bool:
        slots = self.slots
        used = []
        v = coeffs
        while v:
            lead = (v & -v).bit_length() - 1
            row = slots.get(lead)
            if row is None:
                break
            v ^= row[0]
            used.append(lead)
        if not v:
            return False
        self.xor_count += len(used)
        if self.with_payload:
            for lead in used:
                payload = payload ^ slots[lead][1]
        slots[(v & -v).bit_length() - 1] = (v, payload)
        return True

    def back_substitute(self) -> dict[int, object]:
        """Solve the full-rank triangular system; maps column -> value."""
        solved: dict[int, object] = {}
        for lead in sorted(self.slots, reverse=True):
            c, p = self.slots[lead]
            rest = c ^ (1 << lead)
            for j in support(rest):
                self.xor_count += 1
                if self.with_payload:
                    p = p ^ solved[j]
            solved[lead] = p
        return solved


def _with_payload(droplets: Sequence[Droplet]) -> bool:
    return bool(droplets) and all(d.payload is not None for d in droplets)


def _check(droplets: Sequence[Droplet], k: int) -> None:
    for d in droplets:
        if d.k != k or d.coeffs >> k:
            raise ValueError(f"droplet does not have {k} coefficients")


def _outcome(ok: bool, xors: int, used: int, eta: int, values: list, mask: int, payload: bool) -> DecodeOutcome:
    recovered = list(values) if payload else support(mask)
    return DecodeOutcome(ok, xors, used, eta, recovered)


def bp_decode(droplets: Sequence[Droplet], k: int, rng: np.random.Generator | None = None) -> DecodeOutcome:
    """Peeling decoder. ``rng`` randomizes the singleton order (FIFO otherwise)."""
    _check(droplets, k)
    payload = _with_payload(droplets)
    peel = PeelingState(k, payload, rng)
    for d in droplets:
        peel.add(d.coeffs, d.payload.copy() if payload else None)
    eta = peel.peel()
    return _outcome(eta == k, peel.xor_count, len(droplets), eta, peel.values, peel.solved_mask, payload)


def _ofg_finish(rows, target: int, payload: bool) -> tuple[OnTheFlyEliminator, dict | None]:
    ofg = OnTheFlyEliminator(payload)
    if target == 0:
        return ofg, {}
    for c, p in rows:
        if ofg.add(c, p) and ofg.rank == target:
            return ofg, ofg.back_substitute()
    return ofg, None


def ofg_decode(droplets: Sequence[Droplet], k: int) -> DecodeOutcome:
    """On-the-fly Gaussian elimination; stops consuming droplets at rank ``k``."""
    _check(droplets, k)
    payload = _with_payload(droplets)
    consumed = 0

    def rows():
        nonlocal consumed
        for d in droplets:
            consumed += 1
            yield d.coeffs, d.payload.copy() if payload else None

    ofg, solved = _ofg_finish(rows(), k, payload)
    values: list = [None] * k
    mask = 0
    for m, v in (solved or {}).items():
        values[m] = v
        mask |= 1 << m
    return _outcome(solved is not None, ofg.xor_count, consumed, 0, values, mask, payload)


def _hybrid_finish(peel: PeelingState) -> tuple[bool, int]:
    """Run OFG over the peeled residual; write solved blocks into ``peel``."""
    k = peel.k
    target = k - peel.resolved
    ofg, solved = _ofg_finish(peel.residual(), target, peel.with_payload)
    if solved is None:
        return False, ofg.xor_count
    for m, v in solved.items():
        peel.values[m] = v
        peel.solved_mask |= 1 << m
    return True, ofg.xor_count


def brh_decode(droplets: Sequence[Droplet], K_BR: int | None, k: int) -> DecodeOutcome:
    """Bootstrap-rigid hybrid: BP to exhaustion, then OFG on the residual."""
    if K_BR is not None and len(droplets) != K_BR:
        raise ValueError(f"expected {K_BR} droplets, got {len(droplets)}")
    _check(droplets, k)
    payload = _with_payload(droplets)
    peel = PeelingState(k, payload)
    for d in droplets:
        peel.add(d.coeffs, d.payload.copy() if payload else None)
    eta = peel.peel()
    bp_xors = peel.xor_count
    ok, ofg_xors = (True, 0) if eta == k else _hybrid_finish(peel)
    return _outcome(ok, bp_xors + ofg_xors, len(droplets), eta, peel.values, peel.solved_mask, payload)


def crh_decode_sequence(droplets: Sequence[Droplet], eta_c: int, K_init: int, k: int) -> DecodeOutcome:
    """Complexity-rigid hybrid over droplets in contact order.

    Contacts ``K_init`` droplets, then one more per retry until the BP phase
    has resolved at least ``eta_c`` blocks and the residual is full rank, or
    the sequence is exhausted. Peeling state persists across retries; the OFG
    pass only runs once the residual is known to be full rank.
    """
    if not 0 <= eta_c <= k:
        raise ValueError(f"eta_c must lie in [0, {k}]")
    _check(droplets, k)
    payload = _with_payload(droplets)
    peel = PeelingState(k, payload)
    n = len(droplets)
    used = min(K_init, n)
    for d in droplets[:used]:
        peel.add(d.coeffs, d.payload.copy() if payload else None)
    while True:
        eta = peel.peel()
        if eta == k:
            return _outcome(True, peel.xor_count, used, eta, peel.values, peel.solved_mask, payload)
        if eta >= eta_c and peel.residual_rank() == k - eta:
            bp_xors = peel.xor_count
            ok, ofg_xors = _hybrid_finish(peel)
            return _outcome(ok, bp_xors + ofg_xors, used, eta, peel.values, peel.solved_mask, payload)
        if used == n:
            return _outcome(False, peel.xor_count, used, eta, peel.values, peel.solved_mask, payload)
        d = droplets[used]
        peel.add(d.coeffs, d.payload.copy() if payload else None)
        used += 1


def crh_decode(node: FullNode, eta_c: int, K_init: int | None, k: int, rng: np.random.Generator) -> DecodeOutcome:
    """Complexity-rigid hybrid against a full node, contacting nodes in random order."""
    S = node.S
    if K_init is None:
        K_init = k + 1
    if not 0 <= eta_c <= k:
        raise ValueError(f"eta_c must lie in [0, {k}]")
    if not k < K_init < S:
        raise ValueError(f"K_init must satisfy {k} < K_init < {S}")
    order = rng.permutation(S)
    return crh_decode_sequence([node.droplets[i] for i in order], eta_c, K_init, k)


DECODERS = ("bp", "ofg", "brh", "crh")
