"""
Denial of service against a full node
=====================================

An adversary reads the coefficient vectors of some droplet nodes and
erases a subset of them. Knowing which decoder the bucket node runs lets it
pick the erasures that hurt most.
"""

from __future__ import annotations

from ltchain import adversary as adv
from ltchain import experiments

# %%
# Scores on a ten-row read set: low-degree rows covered by many
# higher-degree rows score highest, and are erased first.

table = ["001000", "000010", "101000", "000101", "000011", "010010", "011001", "101101", "111010", "111111"]
read = adv.ReadSet(tuple(range(1, 11)), tuple(int(s[::-1], 2) for s in table))
print("scores:", adv.compute_scores(read).tolist())
print("score attack erases", sorted(adv.attack_score(read, 5).erased))
print("min-rank attack erases", sorted(adv.attack_min_rank(read, 5, 6).erased))

# %%
# Failure rates against BP: oblivious erasure versus reading first.

for r in experiments.attack_grid("bp", ("blind", "degree", "score"), (0.2, 0.4), xis=(1.5, 2.5), trials=1000, seed=3):
    print(f"sigma={r['sigma']} xi={r['xi']}: blind {r['blind']:.3f} degree {r['degree']:.3f} score {r['score']:.3f}")
