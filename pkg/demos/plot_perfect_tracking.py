"""
===================================
Pruning extinct lineages on the fly
===================================

The naive tracker keeps every taxon ever born. The pruning tracker deletes a
record as soon as no living descendant remains, at amortized constant cost.
"""

# %%

from strata.harness import SimConfig, run_sim
from strata.perfect import replay
from strata.policies import FixedResolution

result = run_sim(SimConfig(50, 400, FixedResolution(64), model="moran", seed=2))
naive = replay(result.events, "naive")
pruned = replay(result.events, "pruning")

print(f"births={pruned.births} removals={pruned.removals}")
print(f"naive nodes={len(naive)}  pruned nodes={len(pruned)}")
print(f"removal ops={pruned.removal_ops} <= 2R + B = {2 * pruned.removals + pruned.births}")

# %%
# Pruned size tracks the surviving ancestry (chains of single-child
# ancestors included), not the number of births.

for row in result.timelapse[::50]:
    print(row["generation"], row["tracker_nodes"], "of", 50 * (row["generation"] + 1), "born")
