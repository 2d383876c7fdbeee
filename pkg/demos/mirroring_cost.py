"""
Choosing hybrid parameters by mirroring cost
============================================

Mirroring cost weighs XOR work against droplets downloaded, with ``alpha``
the price of one droplet in XORs. For each ``alpha`` we pick the BRH droplet
count and the CRH peeling threshold that minimize expected cost, and
compare against pure BP and pure elimination.
"""

from __future__ import annotations

from ltchain import experiments

for r in experiments.hybrid_vs_endpoints(k=10, alphas=(1, 3, 5), trials=3000, seed=0):
    print(
        f"alpha={r['alpha']}: K_BR={r['K_min']} (cost {r['M_BR_min']:.1f}), "
        f"eta_c={r['eta_min']} (cost {r['M_CR_min']:.1f}), "
        f"BP {r['M_BP']:.1f}, OFG {r['M_OFG']:.1f}"
    )
