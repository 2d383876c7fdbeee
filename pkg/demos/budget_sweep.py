"""
Spending a fixed attack budget
==============================

Reading a node costs 1 and erasing costs ``zeta``. With budget ``nu`` the
adversary chooses how many nodes to erase and spends the rest on reading.
The sweep shows where the failure rate peaks.
"""

from __future__ import annotations

from ltchain import adversary as adv
from ltchain import build_rsd

k, S = 20, 60
sweep = adv.sweep_attack("bp", None, k, S, nu=S, zeta=1.5, dist=build_rsd(k, 0.1, 0.1), trials=500, rng=5, step=0.02)
best = adv.best_point(sweep)
for p in sweep:
    mark = "  <- best" if p is best else ""
    print(f"sigma={p.sigma:.2f} sigma0={p.sigma0:.3f} cost={p.cost:5.1f} failure={p.failure_rate:.3f}{mark}")
