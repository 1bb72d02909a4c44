"""Anytime integer-partition search for optimal coalition structures."""
from .combinatorics import (
    CombinationCursor,
    IntegerPartition,
    bell_number,
    binomial,
    coalition,
    coalition_to_index,
    complement_index,
    enumerate_partitions,
    format_cs,
    index_to_coalition,
    members,
    partition_of,
    subspace_size,
)
from .value_model import DistributionSpec, SizeStats, ValueTable, generate, load, save, size_stats
from .scan import ScanResult, SubspaceStats, compute_bounds, initial_beta, scan_and_search, two_part_best
from .ip_search import (
    AnytimeSnapshot,
    SearchConfig,
    Solution,
    iter_subspace,
    prune,
    search_subspace,
    select_next,
    solve,
)
from .baselines import brute_force_solve, dp_solve, enumerate_all_cs

__version__ = "0.1.0"
