from .diagnostics import (
    default_rho,
    generation_bound,
    jump_probability_bound,
    large_jump_counts,
    one_large_jump_bound,
    one_large_jump_check,
)
from .measures import (
    PointMeasure,
    TestFunction,
    ancestral_measure,
    as_test_functions,
    cut_measure,
    direct_sum,
    extremal_measure,
    leaf_order_statistics,
    order_statistics,
)
from .simulator import (
    ParticleTree,
    dump_tree,
    generation_profile,
    many_to_one_count,
    many_to_one_mean,
    simulate_tree,
    spine_leaf,
    subtree_leaf_counts,
    uniform_leaf,
)

__all__ = [
    'ParticleTree',
    'PointMeasure',
    'TestFunction',
    'ancestral_measure',
    'as_test_functions',
    'cut_measure',
    'default_rho',
    'direct_sum',
    'dump_tree',
    'extremal_measure',
    'generation_bound',
    'generation_profile',
    'jump_probability_bound',
    'large_jump_counts',
    'leaf_order_statistics',
    'many_to_one_count',
    'many_to_one_mean',
    'one_large_jump_bound',
    'one_large_jump_check',
    'order_statistics',
    'simulate_tree',
    'spine_leaf',
    'subtree_leaf_counts',
    'uniform_leaf',
]
