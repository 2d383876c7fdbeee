"""
Bootstrap overhead against XOR complexity
=========================================

BP is cheap to run but needs many droplets. Gaussian elimination needs few
droplets but costs about ``k**2`` XORs. The two hybrids fill the space in
between: BRH by fixing the droplet count, CRH by fixing how many blocks
peeling must resolve first.
"""

from __future__ import annotations

from ltchain import experiments

rows = experiments.tradeoff(k=20, c=0.1, trials=300, seed=1)
for r in rows:
    print(f"{r['decoder']:4s} param={r['param']:3d} overhead={r['overhead']:6.2f} complexity={r['complexity']:7.1f}")
