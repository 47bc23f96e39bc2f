import math

import numpy as np

from ..errors import InvalidSpecError
from ..normalization import stable_constant
from .spec import BrownianComponent, CompositeSum, MotionSpec, NonSymmetricOneStable, StrictlyStable


def _positive_half(spec: MotionSpec, theta: np.ndarray) -> np.ndarray:
    """psi on theta > 0; theta == 0 entries come back as exactly 0."""
    out = np.zeros(theta.shape, dtype=complex)
    pos = theta > 0
    th = theta[pos]
    if isinstance(spec, StrictlyStable):
        if spec.alpha == 1:
            out[pos] = -spec.c1 * math.pi * th + 1j * spec.a * th
        else:
            phase = math.pi * spec.alpha / 2
            coefficient = -stable_constant(spec.alpha) * (
                spec.c1 * np.exp(-1j * phase) + spec.c2 * np.exp(1j * phase)
            )
            out[pos] = coefficient * th**spec.alpha
    elif isinstance(spec, NonSymmetricOneStable):
        skew = spec.c1 - spec.c2
        out[pos] = -(math.pi / 2) * (spec.c1 + spec.c2) * th - 1j * skew * th * np.log(th) + 1j * spec.a * skew * th
    elif isinstance(spec, BrownianComponent):
        out[pos] = -(spec.b**2) * th**2
    elif isinstance(spec, CompositeSum):
        for component in spec.components:
            out += _positive_half(component, theta)
    else:
        raise InvalidSpecError(f"Unknown motion {type(spec).__name__}")
    return out


def evaluate_psi(spec: MotionSpec, theta):
    """Levy exponent psi(theta) = log E exp(i theta xi_1).

    Scalars give a Python complex, arrays a complex ndarray. Negative arguments
    use psi(-theta) = conj(psi(theta)).
    """
    values = np.asarray(theta, dtype=float)
    flat = np.atleast_1d(values)
    psi = _positive_half(spec, np.abs(flat))
    negative = flat < 0
    psi[negative] = np.conj(psi[negative])
    if values.ndim == 0:
        return complex(psi[0])
    return psi.reshape(values.shape)


def characteristic_function(spec: MotionSpec, theta, s: float):
    """E exp(i theta xi_s) = exp(s psi(theta))."""
    return np.exp(s * evaluate_psi(spec, theta))
