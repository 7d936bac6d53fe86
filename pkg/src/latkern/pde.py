"""Parametric diffusion field, periodic/affine transform, and P1 FEM solver.

The test problem is -div(a(x, y) grad u) = q on the unit square with zero
Dirichlet data, where the diffusion field a(x, y) = 1 + sum_j sin(2*pi*y_j)
* psi_j(x) carries the stochastic parameters y through periodic maps of
uniform variables.  The same solver also accepts the affine multipliers
z_j directly, which is how the distributional-equivalence check exercises
both formulations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .weights import DerivedParams, ProblemParams

#: Meshes with more exponent than this switch from banded Cholesky to CG.
_DIRECT_MAX_EXPONENT = 7

_CG_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """Diffusion field 1 + sum_j sin(2 pi y_j) psi_j(x) on the unit square,
    with psi_j(x) = c j^-theta sin(j pi x1) sin(j pi x2)."""

    params: ProblemParams
    derived: DerivedParams

    @property
    def s(self) -> int:
        return self.params.s

    def psi_amplitudes(self) -> np.ndarray:
        j = np.arange(1, self.s + 1, dtype=float)
        return self.params.c * j ** (-self.params.theta)

    def psi_values(self, x1, x2) -> np.ndarray:
        """psi_j at spatial points; shape (len(x1), s)."""
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        x2 = np.atleast_1d(np.asarray(x2, dtype=float))
        j = np.arange(1, self.s + 1, dtype=float)
        return (self.psi_amplitudes()[None, :]
                * np.sin(np.pi * np.outer(x1, j))
                * np.sin(np.pi * np.outer(x2, j)))


def field_eval(fs: FieldSpec, x, y) -> float:
    """Field value a(x, y) at one spatial point and one parameter point.

    ``y`` may be longer than the truncation dimension; extra coordinates
    are ignored.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)[: fs.s]
    psis = fs.psi_values(x[0], x[1])[0]
    return 1.0 + float(np.sin(2.0 * np.pi * y) @ psis)


def periodic_to_affine(y):
    """Componentwise map y -> sin(2 pi y) from [0,1]^s onto [-1,1]^s."""
    return np.sin(2.0 * np.pi * np.asarray(y, dtype=float))


def affine_to_periodic(z):
    """Componentwise branch arcsin(z) / (2 pi), mapping into [-1/4, 1/4].

    One fixed branch of the (non-monotone) inverse of sin(2 pi y); used
    for round-trip checks, where any single branch suffices.
    """
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > 1.0):
        raise ValueError("affine coordinates must lie in [-1, 1]")
    return np.arcsin(z) / (2.0 * np.pi)


def arcsine_cdf(t):
    """CDF F(t) = 1/2 + arcsin(t) / pi of the arcsine law on [-1, 1]."""
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    out = 0.5 + np.arcsin(t) / np.pi
    return out if out.ndim else float(out)


def transform_cdf_distance(sample_count: int, seed: int) -> float:
    """Sup distance between the empirical CDF of sin(2 pi U) and the
    arcsine CDF, for seeded uniform U."""
    if sample_count < 10_000:
        raise ValueError("need at least 1e4 samples for a stable statistic")
    rng = np.random.default_rng(seed)
    x = np.sort(np.sin(2.0 * np.pi * rng.random(sample_count)))
    f = arcsine_cdf(x)
    i = np.arange(1, sample_count + 1, dtype=float)
    upper = np.max(i / sample_count - f)
    lower = np.max(f - (i - 1.0) / sample_count)
    return float(max(upper, lower))


class SolverError(RuntimeError):
    """Linear solver failed to produce a solution within tolerance."""


class FemProblem:
    """Piecewise-linear FEM on a uniform triangulation of the unit square.

    The mesh has h = 2^-mesh_exponent; each grid square is split along its
    main diagonal into two triangles.  Only the (2^m - 1)^2 interior nodes
    carry degrees of freedom (homogeneous Dirichlet data).  The stiffness
    sparsity pattern, element geometry, consistent mass matrix and load
    vector are precomputed once; assembling for a new diffusion field is
    a single sparse matrix-vector product into banded storage.
    """

    def __init__(self, mesh_exponent: int, source=None):
        if mesh_exponent < 1:
            raise ValueError("mesh exponent must be at least 1")
        self.mesh_exponent = mesh_exponent
        self.h = 2.0 ** (-mesh_exponent)
        cells = 2**mesh_exponent
        self.n_side = cells - 1
        self.n_interior = self.n_side**2
        self.source = source if source is not None else (lambda x1, x2: x2)
        self._build_mesh(cells)
        self._build_operators()
        self._psi_cache: dict = {}

    # -- mesh construction -------------------------------------------------

    def _build_mesh(self, cells: int) -> None:
        ci, cj = np.meshgrid(np.arange(cells), np.arange(cells), indexing="ij")
        ci, cj = ci.ravel(), cj.ravel()
        # grid node ids (cells+1 per side), x index fastest
        stride = cells + 1

        def gid(i, j):
            return j * stride + i

        v00, v10 = gid(ci, cj), gid(ci + 1, cj)
        v01, v11 = gid(ci, cj + 1), gid(ci + 1, cj + 1)
        # two triangles per cell, split along the (1,1) diagonal
        self.tri_vertices = np.concatenate(
            [np.stack([v00, v10, v11], axis=1),
             np.stack([v00, v11, v01], axis=1)]
        )
        gx = np.arange(stride) * self.h
        self.node_xy = np.stack(
            [np.tile(gx, stride), np.repeat(gx, stride)], axis=1
        )
        gi = np.tile(np.arange(stride), stride)
        gj = np.repeat(np.arange(stride), stride)
        interior = (gi > 0) & (gi < cells) & (gj > 0) & (gj < cells)
        self.dof_of_node = np.full(stride * stride, -1, dtype=np.int64)
        self.dof_of_node[interior] = np.arange(self.n_interior)
        self.interior_coords = self.node_xy[interior]
        self.centroids = self.node_xy[self.tri_vertices].mean(axis=1)
        self.n_tri = len(self.tri_vertices)

    def _build_operators(self) -> None:
        xy = self.node_xy[self.tri_vertices]  # (n_tri, 3, 2)
        x, y = xy[..., 0], xy[..., 1]
        beta = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
        gamma = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
        area = 0.5 * np.abs(
            (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
            - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
        )
        self.tri_area = area
        # geometry factor of the element stiffness: grad phi_i . grad phi_j * area
        geom = (beta[:, :, None] * beta[:, None, :]
                + gamma[:, :, None] * gamma[:, None, :]) / (4.0 * area[:, None, None])

        dofs = self.dof_of_node[self.tri_vertices]  # (n_tri, 3), -1 on boundary
        tri_idx = np.repeat(np.arange(self.n_tri), 9)
        di = np.repeat(dofs, 3, axis=1).ravel()
        dj = np.tile(dofs, (1, 3)).ravel()
        gvals = geom.reshape(self.n_tri, 9).ravel()
        keep = (di >= 0) & (dj >= 0)
        tri_idx, di, dj, gvals = tri_idx[keep], di[keep], dj[keep], gvals[keep]

        # banded (upper) scatter: slot = (u + i - j) * ndof + j for i <= j
        self.half_bandwidth = self.n_side + 1
        upper = di <= dj
        rows = (self.half_bandwidth + di[upper] - dj[upper]) * self.n_interior + dj[upper]
        self._band_scatter = scipy.sparse.coo_matrix(
            (gvals[upper], (rows, tri_idx[upper])),
            shape=((self.half_bandwidth + 1) * self.n_interior, self.n_tri),
        ).tocsr()
        # full COO scatter for the CG fallback
        self._coo = (di, dj, gvals, tri_idx)

        # consistent mass matrix (exact element integrals for P1)
        mlocal = (np.full((3, 3), 1.0) + np.eye(3)) / 12.0
        di9 = np.repeat(dofs, 3, axis=1).ravel()
        dj9 = np.tile(dofs, (1, 3)).ravel()
        mv = np.tile(mlocal.ravel(), self.n_tri) * np.repeat(self.tri_area, 9)
        keep9 = (di9 >= 0) & (dj9 >= 0)
        self.mass = scipy.sparse.coo_matrix(
            (mv[keep9], (di9[keep9], dj9[keep9])),
            shape=(self.n_interior, self.n_interior),
        ).tocsr()

        qc = np.asarray(
            self.source(self.centroids[:, 0], self.centroids[:, 1]), dtype=float
        )
        qc = np.broadcast_to(qc, (self.n_tri,))
        load = np.zeros(self.n_interior)
        contrib = (qc * self.tri_area / 3.0)
        for loc in range(3):
            d = dofs[:, loc]
            np.add.at(load, d[d >= 0], contrib[d >= 0])
        self.load = load
        # integral weights: integral of each interior hat function
        w = np.zeros(self.n_interior)
        third = self.tri_area / 3.0
        for loc in range(3):
            d = dofs[:, loc]
            np.add.at(w, d[d >= 0], third[d >= 0])
        self._integral_weights = w

    # -- field plumbing ----------------------------------------------------

    def psi_table(self, fs: FieldSpec) -> np.ndarray:
        """psi_j at the triangle centroids, shape (n_tri, s); cached per field."""
        key = fs.params
        tab = self._psi_cache.get(key)
        if tab is None:
            tab = fs.psi_values(self.centroids[:, 0], self.centroids[:, 1])
            self._psi_cache[key] = tab
        return tab

    @staticmethod
    def coefficient_values(table: np.ndarray, multipliers: np.ndarray) -> np.ndarray:
        """Per-triangle diffusion values 1 + multipliers @ psi^T.

        ``multipliers`` holds sin(2 pi y) rows for the periodic model or
        affine z rows directly; shape (batch, s) or (s,).
        """
        mult = np.atleast_2d(np.asarray(multipliers, dtype=float))
        return 1.0 + mult @ table.T

    # -- solves ------------------------------------------------------------

    def solve_coefficient(self, a_tri: np.ndarray | None = None) -> np.ndarray:
        """Solve one system for per-triangle diffusion values (None = unit field)."""
        if a_tri is None:
            a_tri = np.ones(self.n_tri)
        a_tri = np.asarray(a_tri, dtype=float)
        if self.mesh_exponent <= _DIRECT_MAX_EXPONENT:
            ab = (self._band_scatter @ a_tri).reshape(
                self.half_bandwidth + 1, self.n_interior
            )
            try:
                return scipy.linalg.solveh_banded(ab, self.load, lower=False)
            except scipy.linalg.LinAlgError as exc:
                raise SolverError(f"banded Cholesky failed: {exc}")
        di, dj, gvals, tri_idx = self._coo
        mat = scipy.sparse.coo_matrix(
            (gvals * a_tri[tri_idx], (di, dj)),
            shape=(self.n_interior, self.n_interior),
        ).tocsr()
        x, info = scipy.sparse.linalg.cg(mat, self.load, rtol=_CG_RTOL, maxiter=20000)
        if info != 0:
            resid = float(np.linalg.norm(mat @ x - self.load))
            raise SolverError(
                f"CG failed to converge (info={info}), residual {resid:.3e}"
            )
        return x

    def solve_batch(self, table: np.ndarray, multipliers: np.ndarray) -> np.ndarray:
        """Solve for every multiplier row; returns (batch, n_interior)."""
        a = self.coefficient_values(table, multipliers)
        out = np.empty((a.shape[0], self.n_interior))
        for i in range(a.shape[0]):
            out[i] = self.solve_coefficient(a[i])
        return out

    # -- functionals ---------------------------------------------------------

    def l2_norm(self, v: np.ndarray) -> float:
        """L2(D) norm of the FE function with interior nodal values v."""
        v = np.asarray(v, dtype=float)
        return math.sqrt(max(float(v @ (self.mass @ v)), 0.0))

    def integral(self, v: np.ndarray) -> float:
        """Integral over D of the FE function with interior nodal values v."""
        return float(self._integral_weights @ np.asarray(v, dtype=float))


def fem_assemble_solve(fp: FemProblem, fs: FieldSpec, y) -> np.ndarray:
    """Interior nodal solution for the periodic field at parameter point y."""
    y = np.asarray(y, dtype=float)[: fs.s]
    table = fp.psi_table(fs)
    a_tri = fp.coefficient_values(table, np.sin(2.0 * np.pi * y))[0]
    return fp.solve_coefficient(a_tri)


def l2_norm_D(fp: FemProblem, v: np.ndarray) -> float:
    """L2(D) norm of a FE solution via the consistent mass matrix."""
    return fp.l2_norm(v)


def manufactured_errors(mesh_exponents) -> dict[int, float]:
    """L2 errors of the unit-coefficient problem with an exact sine solution.

    Uses q = 2 pi^2 sin(pi x1) sin(pi x2), whose solution for a = 1 is
    sin(pi x1) sin(pi x2); the error is measured against the exact
    solution's nodal interpolant, so it contracts at the FE rate O(h^2).
    """

    def q(x1, x2):
        return 2.0 * np.pi**2 * np.sin(np.pi * x1) * np.sin(np.pi * x2)

    out = {}
    for m in mesh_exponents:
        fp = FemProblem(m, source=q)
        uh = fp.solve_coefficient(None)
        exact = np.sin(np.pi * fp.interior_coords[:, 0]) * np.sin(
            np.pi * fp.interior_coords[:, 1]
        )
        out[int(m)] = fp.l2_norm(uh - exact)
    return out
