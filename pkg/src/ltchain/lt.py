"""Robust Soliton degree distribution, LT droplet encoding and full nodes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .gf2 import popcount, support


def round_half_up(x: float) -> int:
    # tolerance absorbs float noise such as 0.05 * 60 == 3.0000000000000004
    return int(math.floor(x + 0.5 + 1e-9))


@dataclass(frozen=True)
class DegreeDistribution:
    """Robust Soliton table for degrees ``1..k``.

    ``omega[d - 1]`` is the probability of degree ``d``; ``rho`` and ``tau``
    are the unnormalized ideal-soliton and spike components.
    """

    k: int
    c: float
    delta: float
    R: float
    beta: float
    spike: int
    rho: np.ndarray = field(repr=False)
    tau: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    cdf: np.ndarray = field(repr=False)

    def mean(self) -> float:
        """Exact mean degree, sum of d * omega(d)."""
        return float(np.dot(np.arange(1, self.k + 1), self.omega))


def build_rsd(k: int, c: float, delta: float) -> DegreeDistribution:
    """Robust Soliton distribution with parameters ``c > 0``, ``0 < delta < 1``.

    The spike sits at ``round(k / R)`` clamped to ``[1, k]``. A negative spike
    mass (possible when ``R < delta``) is clamped to zero.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    k = int(k)
    R = c * math.sqrt(k) * math.log(k / delta)
    spike = min(max(round_half_up(k / R), 1), k)

    d = np.arange(1, k + 1, dtype=float)
    rho = np.empty(k)
    rho[0] = 1.0 / k
    rho[1:] = 1.0 / (d[1:] * (d[1:] - 1.0))

    tau = np.zeros(k)
    tau[: spike - 1] = R / (d[: spike - 1] * k)
    tau[spike - 1] = max(R / k * math.log(R / delta), 0.0)

    mass = rho + tau
    beta = float(math.fsum(mass))
    omega = mass / beta
    cdf = np.cumsum(omega)
    cdf[-1] = 1.0
    return DegreeDistribution(k, c, delta, R, beta, spike, rho, tau, omega, cdf)


def point_mass(k: int, degree: int) -> DegreeDistribution:
    """Degenerate distribution that always yields ``degree``."""
    if not 1 <= degree <= k:
        raise ValueError(f"degree must lie in [1, {k}]")
    omega = np.zeros(k)
    omega[degree - 1] = 1.0
    return DegreeDistribution(
        k, float("nan"), float("nan"), float("nan"), 1.0, degree,
        omega.copy(), np.zeros(k), omega, np.cumsum(omega),
    )


def sample_degree(dist: DegreeDistribution, rng: np.random.Generator) -> int:
    return int(sample_degrees(dist, rng, 1)[0])


def sample_degrees(dist: DegreeDistribution, rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` i.i.d. degrees in ``[1, k]``."""
    idx = np.searchsorted(dist.cdf, rng.random(n), side="right")
    return np.minimum(idx, dist.k - 1) + 1


@dataclass
class Epoch:
    """``k`` equal-length blocks, one row of ``blocks`` per block."""

    blocks: np.ndarray

    def __post_init__(self):
        self.blocks = np.asarray(self.blocks, dtype=np.uint8)
        if self.blocks.ndim != 2 or self.blocks.shape[0] < 1:
            raise ValueError("epoch needs a (k, block_size) array with k >= 1")

    @property
    def k(self) -> int:
        return self.blocks.shape[0]

    @property
    def block_size(self) -> int:
        return self.blocks.shape[1]

    @classmethod
    def from_bytes(cls, data: bytes, k: int) -> "Epoch":
        """Split ``data`` into ``k`` blocks, zero-padding the tail."""
        size = max(1, -(-len(data) // k))
        buf = np.zeros(k * size, dtype=np.uint8)
        buf[: len(data)] = np.frombuffer(data, dtype=np.uint8)
        return cls(buf.reshape(k, size))

    @classmethod
    def random(cls, k: int, block_size: int, rng: np.random.Generator) -> "Epoch":
        return cls(rng.integers(0, 256, size=(k, block_size), dtype=np.uint8))

    def xor_of(self, coeffs: int) -> np.ndarray:
        out = np.zeros(self.block_size, dtype=np.uint8)
        for j in support(coeffs):
            out ^= self.blocks[j]
        return out


@dataclass
class Droplet:
    """One coded block: coefficient bitset plus optional payload bytes."""

    coeffs: int
    k: int
    payload: np.ndarray | None = None

    @property
    def degree(self) -> int:
        return popcount(self.coeffs)

    def neighbours(self) -> list[int]:
        return support(self.coeffs)

    def bitstring(self) -> str:
        return format(self.coeffs, f"0{self.k}b")[::-1]


@dataclass
class FullNode:
    """The ``S`` droplet nodes archiving an epoch.

    Every droplet node keeps the same coefficients in all epochs, so one
    epoch's droplets describe the whole node; ``epochs`` is informational.
    """

    droplets: list[Droplet]
    k: int
    epochs: int = 1

    @property
    def S(self) -> int:
        return len(self.droplets)

    @property
    def coeffs(self) -> list[int]:
        return [d.coeffs for d in self.droplets]

    def has_payloads(self) -> bool:
        return all(d.payload is not None for d in self.droplets)


def encode_droplet(epoch: Epoch | None, d: int, rng: np.random.Generator, k: int | None = None) -> Droplet:
    """Droplet over ``d`` distinct uniformly chosen blocks.

    With ``epoch=None`` a symbolic droplet (no payload) over ``k`` blocks is
    returned.
    """
    if epoch is not None:
        k = epoch.k
    if k is None:
        raise ValueError("k is required for a symbolic droplet")
    if not 1 <= d <= k:
        raise ValueError(f"degree {d} outside [1, {k}]")
    coeffs = 0
    for j in rng.choice(k, size=d, replace=False):
        coeffs |= 1 << int(j)
    payload = epoch.xor_of(coeffs) if epoch is not None else None
    return Droplet(coeffs, k, payload)


def random_coeff_rows(dist: DegreeDistribution, n: int, rng: np.random.Generator) -> list[int]:
    """``n`` coefficient bitsets with i.i.d. degrees and uniform neighbour sets."""
    k = dist.k
    degrees = sample_degrees(dist, rng, n)
    # the d smallest of k i.i.d. uniform keys form a uniform d-subset
    ranks = rng.random((n, k)).argsort(axis=1).argsort(axis=1)
    packed = np.packbits(ranks < degrees[:, None], axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def generate_full_node(
    epoch: Epoch | None, S: int, dist: DegreeDistribution, rng: np.random.Generator
) -> FullNode:
    """Create ``S > k`` droplet nodes with i.i.d. Robust Soliton degrees."""
    k = dist.k
    if epoch is not None and epoch.k != k:
        raise ValueError(f"epoch has {epoch.k} blocks, distribution expects {k}")
    if S <= k:
        raise ValueError(f"S must exceed k (S={S}, k={k})")
    rows = random_coeff_rows(dist, S, rng)
    if epoch is None:
        return FullNode([Droplet(r, k) for r in rows], k)
    return FullNode([Droplet(r, k, epoch.xor_of(r)) for r in rows], k)


def write_full_node(node: FullNode, fh: IO[str]) -> None:
    """Line format: ``k S`` header, then one 0/1 coefficient string per node,
    optionally followed by the hex payload."""
    fh.write(f"{node.k} {node.S}\n")
    for d in node.droplets:
        if d.payload is None:
            fh.write(d.bitstring() + "\n")
        else:
            fh.write(f"{d.bitstring()} {d.payload.tobytes().hex()}\n")


def read_full_node(fh: IO[str]) -> FullNode:
    header = fh.readline().split()
    if len(header) != 2:
        raise ValueError("full-node header must be 'k S'")
    k, S = int(header[0]), int(header[1])
    droplets = []
    for lineno, line in enumerate(fh, start=2):
        parts = line.split()
        if not parts:
            continue
        bits = parts[0]
        if len(bits) != k or set(bits) - {"0", "1"}:
            raise ValueError(f"line {lineno}: expected {k} coefficient bits")
        coeffs = int(bits[::-1], 2)
        if coeffs == 0:
            raise ValueError(f"line {lineno}: droplet has degree 0")
        payload = None
        if len(parts) > 1:
            payload = np.frombuffer(bytes.fromhex(parts[1]), dtype=np.uint8).copy()
        droplets.append(Droplet(coeffs, k, payload))
    if len(droplets) != S:
        raise ValueError(f"header declares {S} droplet nodes, found {len(droplets)}")
    return FullNode(droplets, k)


def droplets_from_strings(rows: Sequence[str]) -> list[Droplet]:
    """Symbolic droplets from 0/1 strings, e.g. ``["10", "11"]``."""
    k = len(rows[0])
    return [Droplet(int(r[::-1], 2), k) for r in rows]
