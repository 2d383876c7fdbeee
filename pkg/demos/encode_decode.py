"""
Storing an epoch as LT droplets
===============================

A full node keeps ``S`` droplets for an epoch of ``k`` blocks. A bucket
node contacts some of them and rebuilds the epoch. Each decoder trades
droplets contacted against XOR work.
"""

from __future__ import annotations

import numpy as np

from ltchain import Epoch, build_rsd, generate_full_node
from ltchain.decoders import bp_decode, brh_decode, crh_decode, ofg_decode

k, S = 20, 60
rng = np.random.default_rng(2024)
dist = build_rsd(k, c=0.1, delta=0.1)
print(f"mean droplet degree {dist.mean():.2f}, spike at degree {dist.spike}")

epoch = Epoch.random(k, block_size=32, rng=rng)
node = generate_full_node(epoch, S, dist, rng)
print("first droplets:", [d.bitstring() for d in node.droplets[:3]])

# %%
# Contact the droplets in a random order and decode with each method.

order = [node.droplets[i] for i in rng.permutation(S)]
outcomes = {
    "bp": bp_decode(order, k),
    "ofg": ofg_decode(order, k),
    "brh(K=30)": brh_decode(order[:30], 30, k),
    "crh(eta_c=8)": crh_decode(node, 8, None, k, rng),
}
for name, out in outcomes.items():
    exact = out.success and np.array_equal(out.blocks(), epoch.blocks)
    print(f"{name:13s} ok={exact!s:5s} droplets={out.droplets_used:3d} xors={out.xor_count:4d} peeled={out.eta_b}")
