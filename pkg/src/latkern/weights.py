"""Weight schemes for the function space and the lattice search criterion.

A weight scheme assigns a positive number gamma_u to every subset u of the
coordinate indices {1..s}, with gamma of the empty set fixed at 1.  Only
restricted parameterizations are representable: product weights (one factor
per dimension), POD weights (an order factor times a product), and SPOD
weights (order factors combined with per-dimension, per-smoothness-order
factors).  Serendipitous weights are product weights derived from the SPOD
formula by dropping its factorial order factor.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
from scipy.special import gammaln

from .specfun import SUPPORTED_ALPHA, stirling2, zeta


class EllipticityError(ValueError):
    """Raised when the fluctuation magnitude destroys uniform ellipticity."""


@dataclass(frozen=True)
class ProblemParams:
    """Parameters of the random-field test problem.

    theta: decay rate of the fluctuation amplitudes (> 1).
    c: overall fluctuation magnitude (> 0).
    p: summability exponent in (0, 1), constrained to p > 1/theta.
    s: truncation dimension.
    """

    theta: float
    c: float
    p: float
    s: int

    def __post_init__(self):
        if not self.theta > 1.0:
            raise ValueError(f"theta must exceed 1, got {self.theta}")
        if not self.c > 0.0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if not self.p > 1.0 / self.theta:
            raise ValueError(
                f"p must exceed 1/theta = {1.0 / self.theta:.6g}, got {self.p}"
            )
        if self.s < 1:
            raise ValueError(f"s must be a positive integer, got {self.s}")


@dataclass(frozen=True, eq=False)
class DerivedParams:
    """Quantities derived from ProblemParams that the weights consume.

    alpha: smoothness order floor(1/p + 1/2), restricted to {1, 2, 3}.
    lam: auxiliary exponent p / (2 - p) in (1/(2 alpha), 1].
    a_min, a_max: field bounds 1 -+ c * zeta(theta).
    b: per-dimension sensitivity sequence c * j^-theta / a_min, decreasing.
    """

    alpha: int
    lam: float
    a_min: float
    a_max: float
    b: np.ndarray

    @property
    def s(self) -> int:
        return len(self.b)


def derive_params(params: ProblemParams) -> DerivedParams:
    """Map problem parameters to (alpha, lambda, a_min, a_max, b_j)."""
    alpha = math.floor(1.0 / params.p + 0.5)
    if alpha not in SUPPORTED_ALPHA:
        raise ValueError(
            f"p = {params.p} implies smoothness order {alpha}, outside the "
            f"supported set {list(SUPPORTED_ALPHA)}"
        )
    lam = params.p / (2.0 - params.p)
    zt = zeta(params.theta)
    if params.c * zt >= 1.0:
        raise EllipticityError(
            f"c = {params.c:.6g} with zeta(theta) = {zt:.6g} gives "
            f"c * zeta(theta) >= 1; the field can touch zero"
        )
    a_min = 1.0 - params.c * zt
    a_max = 1.0 + params.c * zt
    j = np.arange(1, params.s + 1, dtype=float)
    b = params.c * j ** (-params.theta) / a_min
    return DerivedParams(alpha=alpha, lam=lam, a_min=a_min, a_max=a_max, b=b)


def _positive_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)) or not np.all(arr > 0.0):
        raise ValueError(f"{what} must be strictly positive and finite")


@dataclass(frozen=True, eq=False)
class ProductWeights:
    """gamma_u = prod_{j in u} gamma_j, one factor per dimension."""

    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=float))
        _positive_finite(self.gamma, "product weight factors")

    @property
    def dims(self) -> int:
        return len(self.gamma)

    label = "product"


class SerendipitousWeights(ProductWeights):
    """Product weights obtained by stripping the SPOD factorial factor."""

    label = "serendipitous"


@dataclass(frozen=True, eq=False)
class PodWeights:
    """gamma_u = Gamma_{|u|} * prod_{j in u} gamma_j.

    order_factors holds Gamma_0..Gamma_s with Gamma_0 = 1.  Carried as a
    data shape for kernel evaluation and tests; no specific construction
    formula is provided here.
    """

    order_factors: np.ndarray
    gamma: np.ndarray

    label = "pod"

    def __post_init__(self):
        object.__setattr__(
            self, "order_factors", np.asarray(self.order_factors, dtype=float)
        )
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=float))
        _positive_finite(self.order_factors, "POD order factors")
        _positive_finite(self.gamma, "POD per-dimension factors")
        if len(self.order_factors) < len(self.gamma) + 1:
            raise ValueError("POD order factors must cover orders 0..dims")
        if self.order_factors[0] != 1.0:
            raise ValueError("POD order factor for the empty set must be 1")

    @property
    def dims(self) -> int:
        return len(self.gamma)


@dataclass(frozen=True, eq=False)
class SpodWeights:
    """gamma_u as a sum over per-dimension order profiles.

    gamma_u = sum over nu in {1..alpha}^|u| of Gamma_{|nu|} * prod gamma_{j, nu_j},
    with Gamma_l = (l!)^(2/(1+lambda)).  The order factors are stored as
    log_order_factors = log Gamma_l for l = 0..s*alpha, since (l!)^q
    overflows double precision long before l reaches s*alpha at scale.
    """

    log_order_factors: np.ndarray
    gamma_nu: np.ndarray  # shape (dims, alpha); column nu-1 holds gamma_{j, nu}

    label = "spod"

    def __post_init__(self):
        object.__setattr__(
            self,
            "log_order_factors",
            np.asarray(self.log_order_factors, dtype=float),
        )
        object.__setattr__(self, "gamma_nu", np.asarray(self.gamma_nu, dtype=float))
        if self.gamma_nu.ndim != 2:
            raise ValueError("gamma_nu must be a (dims, alpha) table")
        _positive_finite(self.gamma_nu, "SPOD per-dimension factors")
        if not np.all(np.isfinite(self.log_order_factors)):
            raise ValueError("SPOD log order factors must be finite")
        dims, alpha = self.gamma_nu.shape
        if len(self.log_order_factors) < dims * alpha + 1:
            raise ValueError("SPOD order factors must cover orders 0..dims*alpha")

    @property
    def dims(self) -> int:
        return self.gamma_nu.shape[0]

    @property
    def alpha(self) -> int:
        return self.gamma_nu.shape[1]


WeightScheme = Union[ProductWeights, PodWeights, SpodWeights]


def _normalizer(alpha: int, lam: float) -> float:
    # sqrt(2 * e^(1/e) * zeta(2 * alpha * lambda)), shared by the SPOD and
    # serendipitous formulas.
    return math.sqrt(2.0 * math.exp(1.0 / math.e) * zeta(2.0 * alpha * lam))


def serendipitous_weights(derived: DerivedParams) -> SerendipitousWeights:
    """Per-dimension factors ((sum_m b_j^m S(alpha, m)) / normalizer)^(2/(1+lam))."""
    alpha, lam = derived.alpha, derived.lam
    norm = _normalizer(alpha, lam)
    sums = np.zeros_like(derived.b)
    for m in range(1, alpha + 1):
        sums += derived.b**m * stirling2(alpha, m)
    gamma = (sums / norm) ** (2.0 / (1.0 + lam))
    return SerendipitousWeights(gamma=gamma)


def spod_weights(derived: DerivedParams) -> SpodWeights:
    """SPOD factors gamma_{j,nu} and log order factors for the same (alpha, lam, b)."""
    alpha, lam = derived.alpha, derived.lam
    q = 2.0 / (1.0 + lam)
    norm = _normalizer(alpha, lam)
    nu = np.arange(1, alpha + 1, dtype=float)
    gamma_nu = (derived.b[:, None] ** nu[None, :]
                * np.array([stirling2(alpha, int(v)) for v in nu])
                / norm) ** q
    orders = np.arange(derived.s * alpha + 1, dtype=float)
    log_order_factors = q * gammaln(orders + 1.0)
    return SpodWeights(log_order_factors=log_order_factors, gamma_nu=gamma_nu)


def weight_of_subset(scheme: WeightScheme, u: Iterable[int]) -> float:
    """Exact gamma_u by direct evaluation of the scheme's defining formula.

    ``u`` is a collection of distinct 1-based dimension indices.  Meant for
    small subsets (enumeration is exponential in |u| for SPOD schemes);
    serves as the oracle the structured kernel evaluations are tested
    against.
    """
    idx = sorted(set(int(j) for j in u))
    if idx and (idx[0] < 1 or idx[-1] > scheme.dims):
        raise ValueError(f"subset {idx} not contained in 1..{scheme.dims}")
    if not idx:
        return 1.0
    if isinstance(scheme, ProductWeights):
        return float(np.prod([scheme.gamma[j - 1] for j in idx]))
    if isinstance(scheme, PodWeights):
        prod = float(np.prod([scheme.gamma[j - 1] for j in idx]))
        return float(scheme.order_factors[len(idx)]) * prod
    if isinstance(scheme, SpodWeights):
        alpha = scheme.alpha
        total = 0.0
        for profile in itertools.product(range(1, alpha + 1), repeat=len(idx)):
            order = sum(profile)
            term = math.exp(scheme.log_order_factors[order])
            for j, nu_j in zip(idx, profile):
                term *= scheme.gamma_nu[j - 1, nu_j - 1]
            total += term
        return total
    raise TypeError(f"unknown weight scheme type {type(scheme)!r}")
