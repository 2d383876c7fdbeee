"""Seeded Monte Carlo failure-rate experiments.

Trial ``i`` of an experiment draws everything from
``np.random.default_rng([master_seed, i])``: the full node, the attack and
the bucket node's contact order. Aggregates are integer sums, so results do
not depend on how trials are split across worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from . import adversary as adv
from .decoders import DECODERS, bp_decode, brh_decode, crh_decode_sequence, ofg_decode
from .lt import DegreeDistribution, Droplet, Epoch, build_rsd, random_coeff_rows

ATTACKS = ("none", "blind", "degree", "score", "minrank", "auto")


@dataclass(frozen=True)
class ExperimentConfig:
    k: int
    S: int
    c: float = 0.1
    delta: float = 0.1
    decoder: str = "bp"
    K: int | None = None
    """Droplets the bucket node contacts (BP/OFG/BRH); None means every survivor."""
    eta_c: int | None = None
    K_init: int | None = None
    strategy: str = "none"
    sigma: float = 0.0
    sigma0: float | None = None
    trials: int = 10_000
    master_seed: int = 0
    payload: bool = False
    block_size: int = 8
    K_policy: str = "strict"
    """``strict``: fewer than ``K`` survivors is a failure; ``cap``: contact all survivors instead."""

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.strategy not in ATTACKS:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.K_policy not in ("strict", "cap"):
            raise ValueError(f"unknown K_policy {self.K_policy!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.S <= self.k:
            raise ValueError(f"S must exceed k (S={self.S}, k={self.k})")
        if self.K is not None and not 1 <= self.K <= self.S:
            raise ValueError(f"K must lie in [1, {self.S}]")
        if self.decoder == "crh":
            if self.eta_c is None or not 0 <= self.eta_c <= self.k:
                raise ValueError(f"crh needs eta_c in [0, {self.k}]")
            if self.K_init is not None and not self.k < self.K_init < self.S:
                raise ValueError(f"K_init must satisfy {self.k} < K_init < {self.S}")
        if self.strategy != "none":
            if not 0 < self.sigma <= 1:
                raise ValueError("sigma must lie in (0, 1]")
            if self.strategy != "blind":
                if self.sigma0 is None or not self.sigma <= self.sigma0 <= 1:
                    raise ValueError("non-oblivious attacks need sigma <= sigma0 <= 1")

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "ExperimentConfig":
        """Build from string or typed values; ``xi`` sets ``sigma0 = xi * sigma``."""
        values = dict(values)
        xi = values.pop("xi", None)
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(known[key].type, raw)
        if xi is not None:
            kwargs["sigma0"] = float(xi) * float(kwargs.get("sigma", 0.0))
        return cls(**kwargs)

    @property
    def K_init_value(self) -> int:
        return self.K_init if self.K_init is not None else self.k + 1


def _coerce(annotation: str, raw):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if "None" in annotation and text.lower() in ("", "none"):
        return None
    if annotation.startswith("int"):
        return int(text)
    if annotation.startswith("float"):
        return float(text)
    if annotation.startswith("bool"):
        if text.lower() not in ("1", "0", "true", "false", "yes", "no"):
            raise ValueError(f"not a boolean: {raw!r}")
        return text.lower() in ("1", "true", "yes")
    return text


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path: str) -> dict[str, str]:
    with open(path) as fh:
        return parse_config_text(fh.read())


@dataclass(frozen=True)
class TrialOutcome:
    success: bool
    droplets_used: int
    xor_count: int
    eta_b: int


@dataclass(frozen=True)
class FailureRateResult:
    trials: int
    failures: int
    failure_rate: float
    stderr: float
    mean_xor: float
    mean_droplets_used: float
    mean_eta_b: float


@lru_cache(maxsize=64)
def _dist(k: int, c: float, delta: float) -> DegreeDistribution:
    return build_rsd(k, c, delta)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, trial_index])


def _attack(config: ExperimentConfig, rows: list[int], rng: np.random.Generator) -> frozenset[int]:
    strategy = config.strategy
    if strategy == "none":
        return frozenset()
    S = config.S
    if strategy == "blind":
        return adv.attack_blind(S, config.sigma, rng).erased
    read = adv.sample_read_set(S, config.sigma0, rng, rows)
    n_e = adv.node_count(config.sigma, S)
    if strategy == "degree":
        plan = adv.attack_degree(read, n_e)
    elif strategy == "score":
        plan = adv.attack_score(read, n_e)
    elif strategy == "minrank":
        plan = adv.attack_min_rank(read, n_e, config.k)
    else:
        plan = adv.attack_for_decoder(config.decoder, config.eta_c, read, n_e, config.k)
    return plan.erased


def run_trial(config: ExperimentConfig, trial_index: int, dist: DegreeDistribution | None = None) -> TrialOutcome:
    """One draw of node generation, attack and bucket-node reconstruction."""
    k = config.k
    dist = dist or _dist(k, config.c, config.delta)
    rng = trial_rng(config.master_seed, trial_index)
    rows = random_coeff_rows(dist, config.S, rng)
    erased = _attack(config, rows, rng)
    survivors = np.array([i for i in range(config.S) if i not in erased], dtype=np.int64)

    if config.decoder == "crh":
        order = rng.permutation(survivors)
    else:
        K = len(survivors) if config.K is None else config.K
        if config.K_policy == "cap":
            K = min(K, len(survivors))
        if len(survivors) < K or K == 0:
            return TrialOutcome(False, 0, 0, 0)
        order = rng.choice(survivors, size=K, replace=False)

    epoch = Epoch.random(k, config.block_size, rng) if config.payload else None
    droplets = [
        Droplet(rows[i], k, epoch.xor_of(rows[i]) if epoch is not None else None) for i in order
    ]
    if config.decoder == "bp":
        out = bp_decode(droplets, k)
    elif config.decoder == "ofg":
        out = ofg_decode(droplets, k)
    elif config.decoder == "brh":
        out = brh_decode(droplets, None, k)
    else:
        out = crh_decode_sequence(droplets, config.eta_c, config.K_init_value, k)
    ok = out.success
    if ok and epoch is not None:
        ok = bool(np.array_equal(out.blocks(), epoch.blocks))
    return TrialOutcome(ok, out.droplets_used, out.xor_count, out.eta_b)


def _run_range(config: ExperimentConfig, start: int, stop: int) -> tuple[int, int, int, int]:
    dist = _dist(config.k, config.c, config.delta)
    failures = xors = used = eta = 0
    for i in range(start, stop):
        t = run_trial(config, i, dist)
        failures += not t.success
        xors += t.xor_count
        used += t.droplets_used
        eta += t.eta_b
    return failures, xors, used, eta


def default_workers() -> int:
    return max(1, int(os.environ.get("LTCHAIN_WORKERS", "1")))


def run_experiment(config: ExperimentConfig, workers: int | None = None, dist: DegreeDistribution | None = None) -> FailureRateResult:
    """Aggregate trials ``0..trials-1``; identical for any ``workers``."""
    workers = default_workers() if workers is None else workers
    N = config.trials
    if dist is not None and (dist.k, dist.c, dist.delta) != (config.k, config.c, config.delta):
        raise ValueError("distribution does not match the config")
    if workers <= 1 or N < 2 * workers:
        totals = _run_range(config, 0, N)
    else:
        bounds = np.linspace(0, N, 4 * workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_range, [config] * (len(bounds) - 1), bounds[:-1].tolist(), bounds[1:].tolist())
            totals = tuple(map(sum, zip(*parts)))
    failures, xors, used, eta = totals
    p = failures / N
    return FailureRateResult(
        trials=N,
        failures=failures,
        failure_rate=p,
        stderr=math.sqrt(p * (1 - p) / N),
        mean_xor=xors / N,
        mean_droplets_used=used / N,
        mean_eta_b=eta / N,
    )


def to_csv(rows: Iterable[Mapping[str, object]], header: list[str] | None = None) -> str:
    """CSV text with a header row; floats use ``repr`` so output is exact."""
    rows = list(rows)
    header = header or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r.get(h)) for h in header])
    return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return str(v)


def summary_json(config: ExperimentConfig, result: FailureRateResult) -> str:
    return json.dumps({"config": asdict(config), "result": asdict(result)}, indent=2, sort_keys=True)
