"""Rank-1 lattice point sets and greedy component-by-component search.

A rank-1 lattice with n points in s dimensions is the set
{frac(k * z / n) : k = 1..n} for an integer generating vector z whose
entries are coprime to n.  The k = n point is the origin, and the set is
a group under componentwise addition mod 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .specfun import eta
from .weights import ProductWeights, SpodWeights, WeightScheme

#: Candidates whose criterion is within this relative distance of the best
#: are treated as ties and resolved toward the smallest component.
TIE_REL_TOL = 1e-12

#: Candidates evaluated per vectorized block during the CBC search.
_CHUNK = 64


class VectorFormatError(ValueError):
    """Malformed generating-vector file; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, eq=False)
class GeneratingVector:
    """Integer generating vector for a rank-1 lattice with n points.

    For n >= 2 each component must lie in {1..n-1} and be coprime to n.
    For the degenerate n = 1 lattice all components must be 0 (the single
    node is the origin).
    """

    n: int
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=np.int64))
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.z.ndim != 1 or len(self.z) == 0:
            raise ValueError("z must be a nonempty integer vector")
        if self.n == 1:
            if np.any(self.z != 0):
                raise ValueError("for n = 1 all components must be 0")
            return
        if np.any(self.z < 1) or np.any(self.z > self.n - 1):
            raise ValueError(f"components must lie in 1..{self.n - 1}")
        g = np.gcd(self.z, self.n)
        if np.any(g != 1):
            bad = int(np.argmax(g != 1))
            raise ValueError(
                f"component z_{bad + 1} = {int(self.z[bad])} shares a factor "
                f"with n = {self.n}"
            )

    @property
    def s(self) -> int:
        return len(self.z)


def node(gv: GeneratingVector, k: int) -> np.ndarray:
    """Lattice node frac(k * z / n) for k in 1..n; node(n) is the origin."""
    if not 1 <= k <= gv.n:
        raise IndexError(f"node index {k} outside 1..{gv.n}")
    return ((k * gv.z) % gv.n) / gv.n


def nodes(gv: GeneratingVector) -> np.ndarray:
    """All n nodes as an (n, s) array, row k-1 holding node k."""
    k = np.arange(1, gv.n + 1, dtype=np.int64)
    return ((k[:, None] * gv.z[None, :]) % gv.n) / gv.n


def save_vector(gv: GeneratingVector, path) -> None:
    """Write the two-line text format: 'n s' then the s components."""
    text = f"{gv.n} {gv.s}\n" + " ".join(str(int(v)) for v in gv.z) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_vector(path) -> GeneratingVector:
    """Read a generating vector saved by :func:`save_vector`.

    Enforces the component invariants at load time; any structural or
    numeric problem raises :class:`VectorFormatError` with a line number.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 1 or not lines[0].strip():
        raise VectorFormatError("missing header 'n s'", line=1)
    head = lines[0].split()
    if len(head) != 2:
        raise VectorFormatError(
            f"expected 'n s', got {len(head)} fields", line=1
        )
    try:
        n, s = int(head[0]), int(head[1])
    except ValueError as exc:
        raise VectorFormatError(f"non-integer header field: {exc}", line=1)
    if len(lines) < 2 or not lines[1].strip():
        raise VectorFormatError("missing component line", line=2)
    try:
        z = [int(tok) for tok in lines[1].split()]
    except ValueError as exc:
        raise VectorFormatError(f"non-integer component: {exc}", line=2)
    if len(z) != s:
        raise VectorFormatError(
            f"expected {s} components, found {len(z)}", line=2
        )
    try:
        return GeneratingVector(n=n, z=np.array(z, dtype=np.int64))
    except ValueError as exc:
        raise VectorFormatError(str(exc), line=2)


def _coprime_candidates(n: int) -> np.ndarray:
    cand = np.arange(1, n, dtype=np.int64)
    return cand[np.gcd(cand, n) == 1]


def _sorted_mean(values: np.ndarray) -> np.ndarray:
    # Summing in sorted order makes the criterion invariant under
    # permutations of the per-point values, so candidates whose value
    # multisets coincide (always the case in dimension 1) tie exactly.
    return np.sum(np.sort(values, axis=-1), axis=-1) / values.shape[-1]


class _ProductState:
    """Per-point running products for product-form criterion updates."""

    def __init__(self, n: int, gamma: np.ndarray, order_factor: bool):
        self.gamma = gamma
        self.order_factor = order_factor
        self.prod = np.ones(n)
        self.linear = np.zeros(n) if order_factor else None

    def candidate_values(self, d: int, eta_vals: np.ndarray) -> np.ndarray:
        # eta_vals: (n_cand, n) kernel factors for each candidate component.
        ge = self.gamma[d] * eta_vals
        if self.order_factor:
            return self.linear[None, :] * (1.0 + ge) + self.prod[None, :] * ge
        return self.prod[None, :] * (1.0 + ge) - 1.0

    def commit(self, d: int, eta_col: np.ndarray) -> None:
        ge = self.gamma[d] * eta_col
        if self.order_factor:
            self.linear = self.linear * (1.0 + ge) + self.prod * ge
        self.prod = self.prod * (1.0 + ge)


class _SpodState:
    """Per-point order-profile table for SPOD criterion updates."""

    def __init__(self, n: int, scheme: SpodWeights, s: int):
        self.alpha = scheme.alpha
        self.gamma_nu = scheme.gamma_nu
        with np.errstate(over="raise"):
            try:
                self.order_factors = np.exp(
                    scheme.log_order_factors[: s * self.alpha + 1]
                )
            except FloatingPointError:
                raise ValueError(
                    "SPOD order factors overflow at this dimension and "
                    "smoothness; use a product-form scheme for the search"
                )
        self.table = np.zeros((n, s * self.alpha + 1))
        self.table[:, 0] = 1.0
        self.filled = 0  # orders 0..filled are populated

    def _fold(self, table: np.ndarray, d: int, eta_vals: np.ndarray) -> np.ndarray:
        # table: (..., n, L); eta_vals broadcastable to (..., n).
        out = table.copy()
        for nu in range(1, self.alpha + 1):
            out[..., nu:] += (
                self.gamma_nu[d, nu - 1]
                * eta_vals[..., None]
                * table[..., :-nu]
            )
        return out

    def candidate_values(self, d: int, eta_vals: np.ndarray) -> np.ndarray:
        hi = self.filled + self.alpha + 1
        base = np.broadcast_to(
            self.table[None, :, :hi],
            (eta_vals.shape[0], self.table.shape[0], hi),
        )
        folded = self._fold(base, d, eta_vals)
        return folded @ self.order_factors[:hi] - 1.0

    def commit(self, d: int, eta_col: np.ndarray) -> None:
        hi = self.filled + self.alpha + 1
        self.table[:, :hi] = self._fold(self.table[:, :hi], d, eta_col)
        self.filled += self.alpha


def _make_state(n: int, s: int, scheme: WeightScheme,
                lambda_power: float | None, order_factor: bool):
    if isinstance(scheme, ProductWeights):
        gamma = scheme.gamma[:s].copy()
        if lambda_power is not None:
            gamma = gamma**lambda_power
        return _ProductState(n, gamma, order_factor)
    if isinstance(scheme, SpodWeights):
        if lambda_power is not None:
            raise ValueError(
                "searching with gamma_u^lambda is only representable for "
                "product-form schemes"
            )
        if order_factor:
            raise ValueError(
                "the order-factor criterion variant is only available for "
                "product-form schemes"
            )
        return _SpodState(n, scheme, s)
    raise ValueError(
        f"CBC search supports product-form and SPOD schemes, got "
        f"{type(scheme).__name__}"
    )


def cbc_construct(n: int, s: int, alpha: int, scheme: WeightScheme, *,
                  lambda_power: float | None = None,
                  order_factor: bool = False) -> GeneratingVector:
    """Greedy component-by-component search for a generating vector.

    For each dimension in turn, picks the component in {1..n-1} coprime to
    n that minimizes the mean over lattice points of (K_d(t_k, 0) - 1),
    where K_d is the kernel restricted to the dimensions chosen so far.
    Ties resolve to the smallest component, so the construction is
    deterministic and extending s never changes earlier components.

    ``lambda_power`` searches with the per-dimension factors raised to
    that power (product-form schemes only).  ``order_factor`` switches to
    the variant that multiplies each subset weight by max(|u|, 1).
    """
    if n < 2:
        raise ValueError("CBC construction requires n >= 2 (no candidates)")
    if scheme.dims < s:
        raise ValueError(f"scheme covers {scheme.dims} dimensions, need {s}")
    candidates = _coprime_candidates(n)
    r = np.arange(n, dtype=np.int64)
    eta_table = np.asarray(eta(alpha, r / n, 0.0))
    state = _make_state(n, s, scheme, lambda_power, order_factor)

    z = np.empty(s, dtype=np.int64)
    for d in range(s):
        best_val = math.inf
        best_z = None
        for lo in range(0, len(candidates), _CHUNK):
            chunk = candidates[lo:lo + _CHUNK]
            idx = (r[None, :] * chunk[:, None]) % n
            vals = _sorted_mean(state.candidate_values(d, eta_table[idx]))
            if not np.all(np.isfinite(vals)):
                raise ValueError(
                    f"criterion overflowed at dimension {d + 1}; the weight "
                    "scheme is too large for a plain-precision search"
                )
            for j, v in enumerate(vals):
                tol = TIE_REL_TOL * max(abs(v), abs(best_val) if best_z else 0.0)
                if v < best_val - tol:
                    best_val = float(v)
                    best_z = int(chunk[j])
        state.commit(d, eta_table[(r * best_z) % n])
        z[d] = best_z
    return GeneratingVector(n=n, z=z)


def criterion_value(gv: GeneratingVector, alpha: int, scheme: WeightScheme, *,
                    lambda_power: float | None = None,
                    order_factor: bool = False) -> float:
    """Criterion of a full vector, as minimized per dimension by the search."""
    n, s = gv.n, gv.s
    state = _make_state(n, s, scheme, lambda_power, order_factor)
    r = np.arange(n, dtype=np.int64)
    eta_table = np.asarray(eta(alpha, r / n, 0.0))
    for d in range(s - 1):
        state.commit(d, eta_table[(r * int(gv.z[d])) % n])
    idx = (r[None, :] * gv.z[s - 1 : s, None]) % n
    return float(_sorted_mean(state.candidate_values(s - 1, eta_table[idx]))[0])
