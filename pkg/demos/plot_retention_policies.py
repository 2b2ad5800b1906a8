"""
=============================
Retention policies side by side
=============================

Every policy answers one question: at depth ``n``, which of the time points
``0..n`` are still kept? This script prints the retained sets for a few
policies and how their sizes grow.
"""

# %%
# Retained sets at a single depth
# -------------------------------

from strata.policies import (
    CurbedRecencyProportional,
    DepthProportional,
    FixedResolution,
    GeomSeqNthRoot,
    RecencyProportional,
    drops_at,
    enumerate_retained,
    gap_bound,
    size_bound,
)

n = 100
policies = [
    FixedResolution(10),
    DepthProportional(4),
    DepthProportional(4, tapered=True),
    RecencyProportional(2),
    GeomSeqNthRoot(3),
    CurbedRecencyProportional(20),
]
for policy in policies:
    times = enumerate_retained(policy, n)
    print(f"{str(policy):>14}  {len(times):3d} kept  {times.tolist()}")

# %%
# Recency-proportional spacing packs points near the present. The gap that
# starts at ``t`` is never wider than ``(n - t) // r``.

policy = RecencyProportional(2)
times = enumerate_retained(policy, n).tolist()
for t1, t2 in zip(times, times[1:]):
    print(f"gap {t1:3d} -> {t2:3d}  width {t2 - t1:2d}  bound {gap_bound(policy, n, t1)}")

# %%
# Growth of the retained set
# --------------------------
#
# Retained count over its guaranteed bound. Fixed resolution grows linearly,
# the others stay logarithmic or flat.

print("\n     n " + "".join(f"{str(p):>15}" for p in policies))
for n in (10, 100, 1000, 10_000, 100_000):
    sizes = "".join(f"{len(enumerate_retained(p, n))}/{size_bound(p, n)}".rjust(15) for p in policies)
    print(f"{n:6d} {sizes}")

# %%
# What goes at each step
# ----------------------
#
# Depth-proportional policies coarsen in bursts when the gap doubles.

policy = DepthProportional(2)
for n in range(5, 17):
    print(n, drops_at(policy, n).tolist(), enumerate_retained(policy, n).tolist())
