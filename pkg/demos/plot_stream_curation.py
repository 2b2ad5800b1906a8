"""
===================================
Curating an unbounded sensor stream
===================================

A :class:`~strata.curator.StreamCurator` keeps a bounded, temporally spread
sample of a stream. Times are not stored with the data; they are recovered
from the policy on demand.
"""

# %%

import numpy as np

from strata.curator import StreamCurator
from strata.policies import CurbedRecencyProportional

rng = np.random.default_rng(0)
curator = StreamCurator(CurbedRecencyProportional(16))

readings = 20.0 + np.cumsum(rng.normal(0, 0.3, size=5000))
for value in readings:
    curator.ingest(round(float(value), 2))

print(f"ingested {curator.depth + 1} readings, keeping {len(curator)}")

# %%
# The buffer is dense near the present and sparse in the past.

for i, obs in enumerate(curator):
    assert curator.time_of_index(i) == obs.time
    print(f"t={obs.time:5d}  age={curator.depth - obs.time:5d}  value={obs.payload}")
