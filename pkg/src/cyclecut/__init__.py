"""Randomized 4/3-approximate Eulerian tours for half-integral cycle-cut TSP instances."""

from .chain import (
    DEFAULT_ROOT,
    ChainParams,
    State,
    StateDistribution,
    Variant,
    check_necessity,
    classify_pattern,
    even_step,
    odd_step,
    region_contains,
    select_params,
    swap12,
)
from .cli import report_schema_version, run
from .cuts import (
    Hierarchy,
    brute_force_tight_sets,
    build_hierarchy,
    crosses,
    enumerate_tight_sets,
    verify_cycle_cut_instance,
)
from .embedding import Frame, Twist, assign_frame, assign_frames, order_children, twist_type
from .errors import CycleCutError, InputError, PropertyViolation
from .instance import (
    Chain,
    Instance,
    Leaf,
    gen_figure1,
    gen_random_cyclecut,
    held_karp_opt,
    load_instance,
    lp_value,
    support_multigraph,
)
from .multigraph import Multigraph, build_multigraph, euler_circuit, global_min_cut_value, is_connected_spanning
from .sampler import (
    exact_outcome_distribution,
    fill_cut,
    prepare,
    propagate_distributions,
    sample_tour,
    usage_stats,
)

__version__ = "0.1.0"
