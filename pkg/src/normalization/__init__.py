from .scale import (
    ConstantOne,
    LogType,
    SlowlyVarying,
    TailScale,
    compute_h,
    forward_c_star,
    solve_q,
    stable_constant,
    v_alpha_interval,
    v_alpha_union,
)

__all__ = [
    'ConstantOne',
    'LogType',
    'SlowlyVarying',
    'TailScale',
    'compute_h',
    'forward_c_star',
    'solve_q',
    'stable_constant',
    'v_alpha_interval',
    'v_alpha_union',
]
