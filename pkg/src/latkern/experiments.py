"""Convergence-experiment driver: point sets, error estimator, CSV records.

One run fixes the problem parameters and a weight variant, then for each
point count n: obtains a generating vector (cache or fresh search), solves
the PDE at the n lattice nodes, fits kernel interpolants for all interior
FEM nodes at once, and estimates the joint L2 error over space and
parameters by comparing against reference solves at shifted evaluation
points.  Identical configurations produce bit-identical CSV output: every
stage is deterministic and single-threaded.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import interp, lattice, pde, sobol
from .weights import (
    DerivedParams,
    ProblemParams,
    ProductWeights,
    WeightScheme,
    derive_params,
    serendipitous_weights,
    spod_weights,
)

WEIGHT_VARIANTS = ("spod", "serendipitous", "product")

EVAL_SOURCES = ("sobol", "uniform")

CSV_COLUMNS = (
    "theta", "c", "p", "s", "alpha", "lambda", "weights", "n",
    "error", "seconds", "status",
)


@dataclass
class ExperimentConfig:
    """One convergence run over a list of lattice sizes."""

    params: ProblemParams
    weight_variant: str
    n_list: list
    mesh_exponent: int = 5
    L: int = 100
    eval_source: str = "sobol"
    sobol_path: str | None = None
    seed: int = 0
    vector_cache: str | None = None
    output_path: str | None = None
    cbc_lambda_power: bool = False
    cbc_order_factor: bool = False

    def __post_init__(self):
        if self.weight_variant not in WEIGHT_VARIANTS:
            raise ValueError(
                f"weights must be one of {WEIGHT_VARIANTS}, "
                f"got {self.weight_variant!r}"
            )
        if self.eval_source not in EVAL_SOURCES:
            raise ValueError(
                f"eval_source must be one of {EVAL_SOURCES}, "
                f"got {self.eval_source!r}"
            )
        ns = [int(n) for n in self.n_list]
        if not ns or any(n < 2 for n in ns):
            raise ValueError("n_list must contain integers >= 2")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n_list must be strictly increasing")
        self.n_list = ns
        if self.mesh_exponent < 1:
            raise ValueError("mesh_exponent must be at least 1")
        if self.L < 1:
            raise ValueError("L must be at least 1")


@dataclass
class ConvergenceRecord:
    theta: float
    c: float
    p: float
    s: int
    alpha: int
    lam: float
    weights: str
    n: int
    error: float
    seconds: float
    status: str


def make_scheme(variant: str, derived: DerivedParams) -> WeightScheme:
    """Weight scheme for a CLI/config variant name.

    The plain ``product`` variant uses the sensitivity sequence b_j itself
    as per-dimension factors; it exists as a baseline, not as a tuned
    construction.
    """
    if variant == "serendipitous":
        return serendipitous_weights(derived)
    if variant == "spod":
        return spod_weights(derived)
    if variant == "product":
        return ProductWeights(gamma=derived.b.copy())
    raise ValueError(f"unknown weight variant {variant!r}")


def bundled_direction_file():
    """Path to the packaged Sobol' direction-number table."""
    return resources.files("latkern").joinpath("data/sobol_direction_numbers.txt")


def eval_points(cfg: ExperimentConfig) -> np.ndarray:
    """L evaluation points in [0,1)^s from the configured source."""
    s = cfg.params.s
    if cfg.eval_source == "uniform":
        rng = np.random.default_rng(cfg.seed)
        return rng.random((cfg.L, s))
    path = cfg.sobol_path if cfg.sobol_path else bundled_direction_file()
    table = sobol.DirectionNumbers.from_file(path)
    return sobol.sobol_points(cfg.L, s, table)


class NodalSurrogate:
    """Kernel interpolants for every interior FEM node, sharing one
    circulant factorization.

    The interpolation matrix depends only on the kernel and the lattice,
    so all spatial nodes are fitted with a single eigenvalue computation
    and one batched FFT solve.
    """

    def __init__(self, system: interp.CirculantKernelSystem, coeffs: np.ndarray):
        self.system = system
        self.coeffs = coeffs  # (n, n_interior)

    @classmethod
    def fit(cls, spec: interp.KernelSpec, gv: lattice.GeneratingVector,
            node_values: np.ndarray,
            system: interp.CirculantKernelSystem | None = None) -> "NodalSurrogate":
        """Fit from node_values[k-1, i] = u(x_i, t_k); verifies the residual."""
        f = np.asarray(node_values, dtype=float)
        if system is None:
            system = interp.CirculantKernelSystem(spec, gv)
        coeffs = system.solve(f)
        residual = float(np.max(np.abs(system.apply(coeffs) - f)))
        tol = interp.RESIDUAL_RTOL * (1.0 + float(np.max(np.abs(f))))
        if not residual <= tol:
            if system.suspect_frequency is not None:
                raise system.conditioning_error()
            raise interp.ResidualError(
                f"node residual {residual:.3e} exceeds tolerance {tol:.3e}"
            )
        return cls(system, coeffs)

    @property
    def gv(self) -> lattice.GeneratingVector:
        return self.system.gv

    @property
    def spec(self) -> interp.KernelSpec:
        return self.system.spec

    def eval_shifted(self, y: np.ndarray) -> np.ndarray:
        """All surrogate values at y + t_k'; shape (n, n_interior)."""
        pts = lattice.nodes(self.gv)
        col = interp._kernel_values(
            self.spec, pts, np.broadcast_to(np.asarray(y, dtype=float), pts.shape)
        )
        return self.system.shifted_correlation(self.coeffs, col)

    def eval_at(self, points: np.ndarray) -> np.ndarray:
        """Surrogate values at arbitrary parameter points; shape (batch, n_interior)."""
        pts = lattice.nodes(self.gv)
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty((len(points), self.coeffs.shape[1]))
        for i, y in enumerate(points):
            col = interp._kernel_values(
                self.spec, pts, np.broadcast_to(y, pts.shape)
            )
            out[i] = col @ self.coeffs
        return out


def estimate_error(fp: pde.FemProblem, fs: pde.FieldSpec,
                   surrogate: NodalSurrogate, points: np.ndarray) -> float:
    """Estimated L2(D x U) interpolation error over shifted evaluation points.

    For each evaluation point y_l, compares reference FEM solves at the n
    shifted parameter points y_l + t_k against the surrogate evaluated at
    the same shifts, integrating the squared difference over the spatial
    domain with the mass matrix.
    """
    table = fp.psi_table(fs)
    grid = lattice.nodes(surrogate.gv)
    n = surrogate.gv.n
    total = 0.0
    for y in np.atleast_2d(points):
        shifted = np.mod(grid + y[None, :], 1.0)
        reference = fp.solve_batch(table, np.sin(2.0 * np.pi * shifted))
        diff = reference - surrogate.eval_shifted(y)
        total += float(np.sum(diff * (fp.mass @ diff.T).T))
    count = len(np.atleast_2d(points)) * n
    return math.sqrt(max(total, 0.0) / count)


def _cache_file(cfg: ExperimentConfig, derived: DerivedParams, n: int) -> Path:
    tag = (
        f"{cfg.weight_variant}|{cfg.params.theta!r}|{cfg.params.c!r}|"
        f"{cfg.params.p!r}|{cfg.params.s}|{derived.alpha}|"
        f"lp{int(cfg.cbc_lambda_power)}|of{int(cfg.cbc_order_factor)}"
    )
    digest = hashlib.sha1(tag.encode()).hexdigest()[:10]
    name = f"z_{cfg.weight_variant}_n{n}_s{cfg.params.s}_{digest}.txt"
    return Path(cfg.vector_cache) / name


def obtain_vector(cfg: ExperimentConfig, derived: DerivedParams,
                  scheme: WeightScheme, n: int) -> lattice.GeneratingVector:
    """Load a cached generating vector or run the CBC search and cache it."""
    cache = None
    if cfg.vector_cache:
        cache = _cache_file(cfg, derived, n)
        if cache.exists():
            try:
                gv = lattice.load_vector(cache)
                if gv.n == n and gv.s == cfg.params.s:
                    return gv
            except lattice.VectorFormatError:
                pass  # stale or corrupt cache entry: rebuild below
    gv = lattice.cbc_construct(
        n, cfg.params.s, derived.alpha, scheme,
        lambda_power=derived.lam if cfg.cbc_lambda_power else None,
        order_factor=cfg.cbc_order_factor,
    )
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        lattice.save_vector(gv, cache)
    return gv


def run_convergence(cfg: ExperimentConfig) -> list[ConvergenceRecord]:
    """Full convergence run; failure at one n is recorded and the run continues."""
    derived = derive_params(cfg.params)
    scheme = make_scheme(cfg.weight_variant, derived)
    fp = pde.FemProblem(cfg.mesh_exponent)
    fs = pde.FieldSpec(cfg.params, derived)
    table = fp.psi_table(fs)
    points = eval_points(cfg)
    records = []
    for n in cfg.n_list:
        start = time.perf_counter()
        error, status = math.nan, "ok"
        try:
            gv = obtain_vector(cfg, derived, scheme, n)
            spec = interp.KernelSpec(alpha=derived.alpha, scheme=scheme,
                                     s=cfg.params.s)
            node_values = fp.solve_batch(
                table, np.sin(2.0 * np.pi * lattice.nodes(gv))
            )
            surrogate = NodalSurrogate.fit(spec, gv, node_values)
            error = estimate_error(fp, fs, surrogate, points)
        except (ArithmeticError, pde.SolverError, ValueError) as exc:
            status = str(exc)
        records.append(ConvergenceRecord(
            theta=cfg.params.theta, c=cfg.params.c, p=cfg.params.p,
            s=cfg.params.s, alpha=derived.alpha, lam=derived.lam,
            weights=cfg.weight_variant, n=n, error=error,
            seconds=time.perf_counter() - start, status=status,
        ))
    if cfg.output_path:
        write_csv(records, cfg.output_path)
    return records


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log error against log n, with the theoretical
    reference exponent -(1/(2p) - 1/4) for the same configuration."""

    slope: float
    theoretical: float


def theoretical_rate(p: float) -> float:
    """Reference convergence exponent r = 1/(2p) - 1/4."""
    return 1.0 / (2.0 * p) - 0.25


def fit_rate(records: list) -> RateFit:
    """Fit the observed convergence rate from successful records."""
    usable = [
        r for r in records
        if r.status == "ok" and math.isfinite(r.error) and r.error > 0.0
    ]
    if len(usable) < 3:
        raise ValueError(
            f"need at least 3 usable records to fit a rate, got {len(usable)}"
        )
    logs_n = np.log([r.n for r in usable])
    logs_e = np.log([r.error for r in usable])
    slope = float(np.polyfit(logs_n, logs_e, 1)[0])
    return RateFit(slope=slope, theoretical=-theoretical_rate(usable[0].p))


def _format_row(r: ConvergenceRecord) -> list:
    # parameters use shortest round-trip formatting so consumers recover
    # the exact doubles (the plot tool derives its reference slope from p)
    return [
        repr(r.theta), repr(r.c), repr(r.p), str(r.s),
        str(r.alpha), repr(r.lam), r.weights, str(r.n),
        ("NaN" if not math.isfinite(r.error) else f"{r.error:.12e}"),
        f"{r.seconds:.3f}", r.status,
    ]


def render_csv(records: list) -> str:
    """CSV text with the documented header; failures carry error=NaN."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(_format_row(r))
    return buf.getvalue()


def write_csv(records: list, path) -> None:
    Path(path).write_text(render_csv(records), encoding="utf-8")
