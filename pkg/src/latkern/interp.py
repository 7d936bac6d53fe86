"""Weighted periodic kernel evaluation and circulant interpolation.

The kernel of the weighted space is K(y, y') = sum over subsets u of
gamma_u * prod_{j in u} eta_alpha(y_j, y'_j).  Product-form schemes
collapse this to a single product over dimensions; POD and SPOD schemes
are evaluated with a dynamic program over the cumulative order.  On a
rank-1 lattice the interpolation matrix K(t_k, t_k') is circulant, so
fitting and evaluation at all shifted points reduce to FFTs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import GeneratingVector, nodes
from .specfun import SUPPORTED_ALPHA, eta
from .weights import PodWeights, ProductWeights, SpodWeights, WeightScheme

#: Fail the circulant solve when min|eigenvalue| / max|eigenvalue| drops
#: below this; dividing by such eigenvalues returns noise, not coefficients.
CONDITION_FLOOR = 1e-14

#: Relative tolerance on the node residual of a fitted interpolant.
RESIDUAL_RTOL = 1e-6

_LN2 = float(np.log(2.0))
# Rescale a point's order-profile row once its magnitude leaves 2^+-_RESCALE.
_RESCALE = 400


class IllConditionedKernelError(ArithmeticError):
    """Circulant kernel system too ill-conditioned (or overflowed) to solve."""

    def __init__(self, message: str, frequency: int | None = None,
                 ratio: float | None = None):
        super().__init__(message)
        self.frequency = frequency
        self.ratio = ratio


class ResidualError(ArithmeticError):
    """Fitted coefficients fail to reproduce the data at the nodes."""


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Kernel of smoothness ``alpha`` with a weight scheme over s dimensions."""

    alpha: int
    scheme: WeightScheme
    s: int

    def __post_init__(self):
        if self.alpha not in SUPPORTED_ALPHA:
            raise ValueError(
                f"unsupported smoothness order {self.alpha}; supported "
                f"orders are {list(SUPPORTED_ALPHA)}"
            )
        if self.s < 1:
            raise ValueError(f"s must be positive, got {self.s}")
        if self.scheme.dims < self.s:
            raise ValueError(
                f"scheme covers {self.scheme.dims} dimensions, need {self.s}"
            )
        if isinstance(self.scheme, SpodWeights) and self.scheme.alpha != self.alpha:
            raise ValueError(
                f"SPOD scheme built for alpha = {self.scheme.alpha}, "
                f"kernel uses alpha = {self.alpha}"
            )


@dataclass(frozen=True, eq=False)
class Interpolant:
    """Fitted kernel interpolant: coefficients over the lattice nodes.

    ``coeffs[k-1]`` multiplies K(t_k, .) for k = 1..n in lattice index
    order (node n is the origin).
    """

    spec: KernelSpec
    gv: GeneratingVector
    coeffs: np.ndarray


def _eta_matrix(alpha: int, y_rows: np.ndarray, y2_rows: np.ndarray) -> np.ndarray:
    return np.asarray(eta(alpha, y_rows, y2_rows))


def _product_kernel_values(gamma: np.ndarray, eta_mat: np.ndarray) -> np.ndarray:
    # overflow to inf is deliberate: downstream checks reject a non-finite
    # kernel column loudly instead of warning here
    with np.errstate(over="ignore"):
        return np.prod(1.0 + gamma[None, :] * eta_mat, axis=1)


def _pod_kernel_values(scheme: PodWeights, s: int, eta_mat: np.ndarray) -> np.ndarray:
    m = eta_mat.shape[0]
    table = np.zeros((m, s + 1))
    table[:, 0] = 1.0
    for j in range(s):
        prev = table.copy()
        table[:, 1:] += scheme.gamma[j] * eta_mat[:, j : j + 1] * prev[:, :-1]
    return table @ scheme.order_factors[: s + 1]


def _spod_kernel_values(scheme: SpodWeights, s: int, eta_mat: np.ndarray) -> np.ndarray:
    """Order-profile dynamic program with per-point rescaling.

    Folds one dimension at a time into a table indexed by cumulative
    smoothness order.  Each point carries a binary exponent so that the
    table entries stay representable even when the order factors and
    profile products individually overflow or underflow doubles.
    """
    m = eta_mat.shape[0]
    alpha = scheme.alpha
    width = s * alpha + 1
    table = np.zeros((m, width))
    table[:, 0] = 1.0
    expo = np.zeros(m)
    for j in range(s):
        prev = table.copy()
        col = eta_mat[:, j : j + 1]
        for nu in range(1, alpha + 1):
            table[:, nu:] += scheme.gamma_nu[j, nu - 1] * col * prev[:, :-nu]
        mags = np.max(np.abs(table), axis=1)
        drift = np.zeros(m, dtype=np.int64)
        live = mags > 0.0
        drift[live] = np.frexp(mags[live])[1]
        need = np.abs(drift) > _RESCALE
        if np.any(need):
            table[need] = np.ldexp(table[need], -drift[need, None])
            expo[need] += drift[need]

    # combine sum_l Gamma_l * D[l] in signed log space: the order factors
    # and the rescaled profiles are only representable together
    log_abs = np.full_like(table, -np.inf)
    np.log(np.abs(table), out=log_abs, where=table != 0.0)
    weighted = log_abs + scheme.log_order_factors[None, :width]
    peak = np.max(weighted, axis=1)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    signed_sum = np.sum(np.sign(table) * np.exp(weighted - peak[:, None]), axis=1)
    magnitude = np.full_like(signed_sum, -np.inf)
    np.log(np.abs(signed_sum), out=magnitude, where=signed_sum != 0.0)
    with np.errstate(over="ignore"):
        return np.sign(signed_sum) * np.exp(peak + magnitude + expo * _LN2)


def _kernel_values(spec: KernelSpec, y_rows: np.ndarray, y2_rows: np.ndarray) -> np.ndarray:
    """Kernel at paired rows of y_rows and y2_rows, shape (m, s) each."""
    eta_mat = _eta_matrix(spec.alpha, y_rows, y2_rows)
    if isinstance(spec.scheme, ProductWeights):
        return _product_kernel_values(spec.scheme.gamma[: spec.s], eta_mat)
    if isinstance(spec.scheme, SpodWeights):
        return _spod_kernel_values(spec.scheme, spec.s, eta_mat)
    if isinstance(spec.scheme, PodWeights):
        return _pod_kernel_values(spec.scheme, spec.s, eta_mat)
    raise TypeError(f"unknown weight scheme type {type(spec.scheme)!r}")


def kernel_eval(spec: KernelSpec, y, y2) -> float:
    """K(y, y') for two points in [0, 1]^s (any reals; the kernel is periodic)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    y2 = np.atleast_1d(np.asarray(y2, dtype=float))
    if y.shape != (spec.s,) or y2.shape != (spec.s,):
        raise ValueError(
            f"points must have dimension {spec.s}, got {y.shape} and {y2.shape}"
        )
    return float(_kernel_values(spec, y[None, :], y2[None, :])[0])


def kernel_first_column(spec: KernelSpec, gv: GeneratingVector) -> np.ndarray:
    """K(t_k, 0) for k = 1..n; the interpolation matrix is the circulant
    this column generates."""
    if spec.s != gv.s:
        raise ValueError(f"kernel dimension {spec.s} != lattice dimension {gv.s}")
    pts = nodes(gv)
    return _kernel_values(spec, pts, np.zeros_like(pts))


class CirculantKernelSystem:
    """Shared circulant factorization of the kernel matrix on one lattice.

    Computes the kernel first column and its real DFT eigenvalues once;
    every function fitted on the same (spec, gv) pair reuses them.  A
    non-finite kernel column (overflowing weights) fails immediately.

    Eigenvalues below CONDITION_FLOOR relative to the peak, or failing to
    be positive, sit at or under the rounding noise of the column DFT for
    smooth kernels at large n; the solve zeroes those modes (minimum-norm
    truncation) and remembers the worst frequency.  Whether that mattered
    is decided where fits are verified: a truncated system whose node
    residual still passes is healthy, one that fails raises
    :class:`IllConditionedKernelError` with the offending frequency.
    """

    def __init__(self, spec: KernelSpec, gv: GeneratingVector):
        self.spec = spec
        self.gv = gv
        self.first_column = kernel_first_column(spec, gv)
        if not np.all(np.isfinite(self.first_column)):
            raise IllConditionedKernelError(
                "kernel first column overflowed double precision; the "
                "weights are too large for this configuration"
            )
        col0 = np.roll(self.first_column, 1)  # circulant order, origin first
        # Center the column before the DFT: the nonzero-frequency
        # eigenvalues are unchanged, but the dominant constant part no
        # longer pollutes them with cancellation noise of size n*eps*|c|.
        mean = float(np.mean(col0))
        lam = np.fft.rfft(col0 - mean)
        lam[0] += self.gv.n * mean
        self.eigenvalues = lam.real
        mags = np.abs(self.eigenvalues)
        peak = float(np.max(mags))
        if peak == 0.0 or not np.isfinite(peak):
            raise IllConditionedKernelError("kernel spectrum degenerate")
        worst = int(np.argmin(mags))
        self.condition_ratio = float(mags[worst] / peak)
        # Exact eigenvalues are positive; computed nonpositive ones are
        # rounding noise and their modes carry no usable information.
        suspect = self.eigenvalues <= 0.0
        self.suspect_frequency = (
            int(np.argmax(suspect)) if bool(np.any(suspect))
            else (worst if self.condition_ratio < CONDITION_FLOOR else None)
        )
        safe = np.where(suspect, 1.0, self.eigenvalues)
        self._solve_scale = np.where(suspect, 0.0, 1.0 / safe)

    @property
    def n(self) -> int:
        return self.gv.n

    def conditioning_error(self) -> IllConditionedKernelError:
        return IllConditionedKernelError(
            f"circulant eigenvalue ratio {self.condition_ratio:.3e} below "
            f"{CONDITION_FLOOR:.0e} at frequency {self.suspect_frequency}; "
            "the fitted coefficients do not reproduce the data",
            frequency=self.suspect_frequency,
            ratio=self.condition_ratio,
        )

    def solve(self, f_values: np.ndarray) -> np.ndarray:
        """Coefficients a with K a = f, for one vector or a stacked (n, m) batch."""
        f = np.asarray(f_values, dtype=float)
        if f.shape[0] != self.n:
            raise ValueError(f"expected {self.n} node values, got {f.shape[0]}")
        f0 = np.roll(f, 1, axis=0)
        fhat = np.fft.rfft(f0, axis=0)
        shape = (-1,) + (1,) * (f.ndim - 1)
        ahat = fhat * self._solve_scale.reshape(shape)
        a0 = np.fft.irfft(ahat, self.n, axis=0)
        return np.roll(a0, -1, axis=0)

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        """Circulant matrix-vector product K a (node values of the interpolant)."""
        a = np.asarray(coeffs, dtype=float)
        a0 = np.roll(a, 1, axis=0)
        shape = (-1,) + (1,) * (a.ndim - 1)
        y0 = np.fft.irfft(np.fft.rfft(a0, axis=0) * self.eigenvalues.reshape(shape),
                          self.n, axis=0)
        return np.roll(y0, -1, axis=0)

    def shifted_correlation(self, coeffs: np.ndarray, kernel_col: np.ndarray) -> np.ndarray:
        """sum_k a_k K(t_k, y + t_k') for all k', given K(t_k, y) for all k."""
        return circular_correlation(coeffs, kernel_col, self.n)


def circular_correlation(coeffs: np.ndarray, kernel_col: np.ndarray, n: int) -> np.ndarray:
    """Batched shifted evaluation sum_k a_k K(t_k, y + t_k') over all k'.

    Uses the lattice shift identity K(t_k, y + t_k') = K(t_{k-k'}, y),
    which turns the evaluation into a circular correlation of the
    coefficients with the kernel column v_k = K(t_k, y).  Inputs and
    output are in lattice index order k = 1..n; ``coeffs`` may be (n,)
    or (n, m) for m functions sharing the same nodes.
    """
    a0 = np.roll(np.asarray(coeffs, dtype=float), 1, axis=0)
    v0 = np.roll(np.asarray(kernel_col, dtype=float), 1)
    vhat = np.conj(np.fft.rfft(v0))
    shape = (-1,) + (1,) * (a0.ndim - 1)
    out0 = np.fft.irfft(np.fft.rfft(a0, axis=0) * vhat.reshape(shape), n, axis=0)
    return np.roll(out0, -1, axis=0)


def fit(spec: KernelSpec, gv: GeneratingVector, f_values,
        system: CirculantKernelSystem | None = None) -> Interpolant:
    """Interpolate node data f_values[k-1] = f(t_k) by solving the circulant
    system with one FFT division, then verify the node residual."""
    f = np.asarray(f_values, dtype=float)
    if system is None:
        system = CirculantKernelSystem(spec, gv)
    coeffs = system.solve(f)
    residual = np.max(np.abs(system.apply(coeffs) - f))
    tol = RESIDUAL_RTOL * (1.0 + float(np.max(np.abs(f))))
    if not residual <= tol:
        if system.suspect_frequency is not None:
            raise system.conditioning_error()
        raise ResidualError(
            f"node residual {residual:.3e} exceeds tolerance {tol:.3e}"
        )
    return Interpolant(spec=spec, gv=gv, coeffs=coeffs)


def evaluate(interp: Interpolant, y) -> float:
    """Interpolant value sum_k a_k K(t_k, y) at a single point."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (interp.spec.s,):
        raise ValueError(f"point must have dimension {interp.spec.s}")
    pts = nodes(interp.gv)
    vals = _kernel_values(interp.spec, pts, np.broadcast_to(y, pts.shape))
    return float(interp.coeffs @ vals)


def evaluate_shifted(interp: Interpolant, y) -> np.ndarray:
    """Interpolant values at y + t_k' for all k' = 1..n with two FFTs.

    Costs n kernel evaluations plus O(n log n), against n^2 kernel
    evaluations for n independent calls to :func:`evaluate`.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (interp.spec.s,):
        raise ValueError(f"point must have dimension {interp.spec.s}")
    pts = nodes(interp.gv)
    col = _kernel_values(interp.spec, pts, np.broadcast_to(y, pts.shape))
    return circular_correlation(interp.coeffs, col, interp.gv.n)
