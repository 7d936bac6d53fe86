"""Closed-form special functions backing the kernel and the weight formulas.

Everything here is pure and stateless: Bernoulli polynomials of even degree,
Stirling numbers of the second kind, the Riemann zeta function on (1, inf),
and the univariate periodic kernel factor built from them.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

#: Smoothness orders the kernel factor supports.
SUPPORTED_ALPHA = (1, 2, 3)

#: Reject zeta arguments this close to the pole at 1.
ZETA_MIN_EXPONENT = 1.001

# Even Bernoulli polynomials by degree, coefficients low order -> high order.
# B_2(t) = t^2 - t + 1/6
# B_4(t) = t^4 - 2t^3 + t^2 - 1/30
# B_6(t) = t^6 - 3t^5 + 5/2 t^4 - 1/2 t^2 + 1/42
_BERNOULLI_COEFFS = {
    2: (1.0 / 6.0, -1.0, 1.0),
    4: (-1.0 / 30.0, 0.0, 1.0, -2.0, 1.0),
    6: (1.0 / 42.0, 0.0, -0.5, 0.0, 2.5, -3.0, 1.0),
}

# Scale factor (2*pi)^(2a) / ((-1)^(a+1) * (2a)!) applied to B_{2a}.
_ETA_SCALE = {
    a: (2.0 * math.pi) ** (2 * a) / ((-1) ** (a + 1) * math.factorial(2 * a))
    for a in SUPPORTED_ALPHA
}


def bernoulli_poly(order: int, t):
    """Evaluate the Bernoulli polynomial B_order at t in [0, 1).

    Supports the even degrees needed by the kernel factor.  ``t`` may be a
    scalar or an array.
    """
    if order not in _BERNOULLI_COEFFS:
        raise ValueError(
            f"unsupported Bernoulli degree {order}; supported degrees are "
            f"{sorted(_BERNOULLI_COEFFS)}"
        )
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t >= 1.0):
        raise ValueError("Bernoulli polynomial argument must lie in [0, 1)")
    coeffs = _BERNOULLI_COEFFS[order]
    # Horner from the highest coefficient down.
    out = np.full_like(t, coeffs[-1])
    for c in coeffs[-2::-1]:
        out = out * t + c
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def stirling2(nu: int, m: int) -> int:
    """Stirling number of the second kind S(nu, m).

    Counts partitions of a nu-element set into m nonempty blocks, with
    S(0, 0) = 1 and S(nu, 0) = 0 for nu > 0.  Arguments with m > nu
    return 0 rather than raising.
    """
    if nu < 0 or m < 0:
        raise ValueError("stirling2 arguments must be nonnegative")
    if m > nu:
        return 0
    if nu == 0:
        return 1
    if m == 0:
        return 0
    return m * stirling2(nu - 1, m) + stirling2(nu - 1, m - 1)


def zeta(x: float) -> float:
    """Riemann zeta(x) = sum_{k>=1} k^-x for x > 1, to ~1e-12 absolute.

    Computed as a partial sum over the first N terms plus the integral
    tail N^(1-x)/(x-1) refined with Euler-Maclaurin corrections.  Arguments
    at or below ZETA_MIN_EXPONENT are rejected: convergence degrades near
    the pole and no exponent that close to 1 is ever needed here.
    """
    x = float(x)
    if not x > ZETA_MIN_EXPONENT:
        raise ValueError(
            f"zeta exponent must exceed {ZETA_MIN_EXPONENT}, got {x}"
        )
    n = 128
    k = np.arange(1, n + 1, dtype=float)
    partial = float(np.sum(k ** (-x)))
    # Integral tail plus the first Euler-Maclaurin corrections (the partial
    # sum already counts the k = N term, hence the -1/2 boundary term); the
    # truncation error is O(x^5 * N^(-x-5)), far below 1e-12 for N = 128.
    tail = n ** (1.0 - x) / (x - 1.0)
    tail -= 0.5 * n ** (-x)
    tail += x / 12.0 * n ** (-x - 1.0)
    tail -= x * (x + 1.0) * (x + 2.0) / 720.0 * n ** (-x - 3.0)
    return partial + tail


def eta(alpha: int, y, y2):
    """Univariate periodic kernel factor of smoothness ``alpha``.

    Equals (2*pi)^(2a) / ((-1)^(a+1) (2a)!) * B_{2a}({y - y2}), where {.}
    is the fractional part mapped into [0, 1) (so {-0.4} = 0.6).  Periodic
    with period 1 and symmetric in its two arguments.  Accepts scalars or
    broadcastable arrays.
    """
    if alpha not in _ETA_SCALE:
        raise ValueError(
            f"unsupported smoothness order {alpha}; supported orders are "
            f"{list(SUPPORTED_ALPHA)}"
        )
    diff = np.mod(np.asarray(y, dtype=float) - np.asarray(y2, dtype=float), 1.0)
    # mod can return 1.0 when the difference is a negative tiny epsilon
    diff = np.where(diff >= 1.0, 0.0, diff)
    out = _ETA_SCALE[alpha] * bernoulli_poly(2 * alpha, diff)
    return out if np.ndim(out) else float(out)
