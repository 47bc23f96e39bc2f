from .front import (
    BandCheck,
    FrontFunction,
    FrontPoint,
    MIN_TREES,
    FrontSpeed,
    HardIndicator,
    Ramp,
    TreeBatch,
    ZeroFunction,
    default_bracket,
    estimate_u,
    front_band_check,
    front_position,
    front_speed,
    simulate_leaf_batch,
    u_from_batch,
)

__all__ = [
    'MIN_TREES',
    'BandCheck',
    'FrontFunction',
    'FrontPoint',
    'FrontSpeed',
    'HardIndicator',
    'Ramp',
    'TreeBatch',
    'ZeroFunction',
    'default_bracket',
    'estimate_u',
    'front_band_check',
    'front_position',
    'front_speed',
    'simulate_leaf_batch',
    'u_from_batch',
]
