"""Self-contained diagnostic checks exposed by the service and the CLI.

Each check computes an independent reference (truncated Fourier series,
dense linear solve, manufactured solution, empirical CDF) and reports the
observed deviation together with the tolerance it is held to.
"""

from __future__ import annotations

import math

import numpy as np

from . import interp, lattice, pde
from .specfun import eta
from .weights import ProblemParams, derive_params, serendipitous_weights, spod_weights

#: Truncation length of the Fourier reference series for the kernel factor.
FOURIER_TERMS = 100_000

#: Deviation tolerances for the Fourier oracle by smoothness order; the
#: alpha = 1 series converges only like 1/H.
FOURIER_TOL = {1: 1e-4, 2: 1e-10, 3: 1e-10}

FEM_RATIO_RANGE = (3.5, 4.5)

DENSE_SOLVE_RTOL = 1e-10


def transform_tolerance(samples: int) -> float:
    """Dvoretzky-Kiefer-Wolfowitz bound at miss probability 1e-6.

    P(D_n > eps) <= 2 exp(-2 n eps^2); below 0.01 from 1e5 samples on.
    """
    return math.sqrt(math.log(2.0 / 1e-6) / (2.0 * samples))


def transform_check(samples: int = 100_000, seed: int = 0) -> dict:
    """Empirical CDF of sin(2 pi U) against the arcsine law."""
    distance = pde.transform_cdf_distance(samples, seed)
    tolerance = transform_tolerance(samples)
    return {
        "samples": samples,
        "seed": seed,
        "distance": distance,
        "tolerance": tolerance,
        "passed": bool(distance < tolerance),
    }


def fem_check(mesh_exponents=(3, 4, 5)) -> dict:
    """Manufactured-solution errors and refinement ratios (target ~4)."""
    errors = pde.manufactured_errors(mesh_exponents)
    ms = sorted(errors)
    ratios = {
        f"{a}->{b}": errors[a] / errors[b] for a, b in zip(ms, ms[1:])
    }
    lo, hi = FEM_RATIO_RANGE
    return {
        "errors": {str(m): errors[m] for m in ms},
        "ratios": ratios,
        "tolerance": list(FEM_RATIO_RANGE),
        "passed": bool(all(lo <= r <= hi for r in ratios.values())),
    }


def fourier_reference(alpha: int, y: np.ndarray) -> np.ndarray:
    """Truncated series 2 sum_{h<=H} cos(2 pi h y) / h^(2 alpha)."""
    h = np.arange(1, FOURIER_TERMS + 1, dtype=float)
    phase = np.cos(2.0 * np.pi * np.outer(np.asarray(y, dtype=float), h))
    return 2.0 * phase @ h ** (-2.0 * alpha)


def kernel_check(seed: int = 0) -> dict:
    """Kernel factor against its Fourier series, and FFT fit against a
    dense solve on a small lattice."""
    rng = np.random.default_rng(seed)
    y = rng.random(20)
    fourier = {}
    for alpha in (1, 2, 3):
        ref = fourier_reference(alpha, y)
        dev = float(np.max(np.abs(np.asarray(eta(alpha, y, 0.0)) - ref)))
        fourier[str(alpha)] = {
            "max_deviation": dev,
            "tolerance": FOURIER_TOL[alpha],
            "passed": bool(dev <= FOURIER_TOL[alpha]),
        }

    # moderate-decay parameters keep the kernel matrix condition number
    # low enough that the dense reference is trustworthy at the tolerance
    params = ProblemParams(theta=2.4, c=1.5 / np.sqrt(6.0), p=1 / 2.2, s=4)
    derived = derive_params(params)
    dense = {}
    for name, scheme in (
        ("serendipitous", serendipitous_weights(derived)),
        ("spod", spod_weights(derived)),
    ):
        spec = interp.KernelSpec(alpha=derived.alpha, scheme=scheme, s=params.s)
        gv = lattice.cbc_construct(32, params.s, derived.alpha, scheme)
        pts = lattice.nodes(gv)
        f = np.sin(2.0 * np.pi * pts[:, 0]) + pts[:, 1] * (1.0 - pts[:, 1])
        fitted = interp.fit(spec, gv, f)
        dense_mat = np.empty((gv.n, gv.n))
        for i in range(gv.n):
            for j in range(gv.n):
                dense_mat[i, j] = interp.kernel_eval(spec, pts[i], pts[j])
        ref = np.linalg.solve(dense_mat, f)
        rel = float(np.max(np.abs(fitted.coeffs - ref))
                    / np.max(np.abs(ref)))
        dense[name] = {
            "relative_error": rel,
            "tolerance": DENSE_SOLVE_RTOL,
            "passed": bool(rel <= DENSE_SOLVE_RTOL),
        }

    passed = all(v["passed"] for v in fourier.values()) and all(
        v["passed"] for v in dense.values()
    )
    return {"fourier": fourier, "dense_solve": dense, "passed": bool(passed)}
