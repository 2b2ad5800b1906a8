"""Stream curation policies, hereditary stratigraphy and phylogeny tracking."""

from .column import MrcaBounds, StratColumn, expected_spurious_matches, inherit, mrca_bounds
from .curator import Observation, StreamCurator
from .harness import ComparisonReport, SimConfig, evaluate, run_sim
from .perfect import PerfectTracker
from .policies import (
    CurbedRecencyProportional,
    DepthProportional,
    FixedResolution,
    GeomSeqNthRoot,
    PolicySpec,
    RecencyProportional,
    crpr_active,
    drops_at,
    enumerate_retained,
    floor_pow2,
    gap_bound,
    parse_policy,
    size_bound,
)
from .reconstruct import (
    build_trie,
    correct_origin_times,
    pairwise_mrca_matrix,
    reconstruct_tree,
    trie_to_tree,
)
from .tree import PhyloTree, TreeNode, parse_newick, to_newick

__version__ = "0.1.0"
