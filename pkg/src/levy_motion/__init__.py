from .exponent import characteristic_function, evaluate_psi
from .sampling import sample_increment, standard_one_stable, standard_stable
from .spec import (
    BrownianComponent,
    CompositeSum,
    MotionSpec,
    NonSymmetricOneStable,
    StrictlyStable,
    c_star,
    tail_index,
    tail_scale,
)
from .tails import TailApproximation, empirical_tail, fit_tail_constant, tail_asymptote, vague_check

__all__ = [
    'BrownianComponent',
    'CompositeSum',
    'MotionSpec',
    'NonSymmetricOneStable',
    'StrictlyStable',
    'TailApproximation',
    'c_star',
    'characteristic_function',
    'empirical_tail',
    'evaluate_psi',
    'fit_tail_constant',
    'sample_increment',
    'standard_one_stable',
    'standard_stable',
    'tail_asymptote',
    'tail_index',
    'tail_scale',
    'vague_check',
]
