"""Kernel evaluation and circulant fitting against enumeration, dense
solves, and direct summation."""

import itertools
import math

import numpy as np
import pytest

from latkern.interp import (
    CirculantKernelSystem,
    IllConditionedKernelError,
    Interpolant,
    KernelSpec,
    evaluate,
    evaluate_shifted,
    fit,
    kernel_eval,
    kernel_first_column,
)
from latkern.lattice import GeneratingVector, cbc_construct, node, nodes
from latkern.specfun import eta
from latkern.weights import (
    PodWeights,
    ProblemParams,
    ProductWeights,
    derive_params,
    serendipitous_weights,
    spod_weights,
    weight_of_subset,
)

HARD = ProblemParams(theta=2.4, c=1.5 / math.sqrt(6.0), p=1 / 2.2, s=10)


@pytest.fixture(scope="module")
def hard():
    derived = derive_params(HARD)
    return {
        "derived": derived,
        "serendipitous": serendipitous_weights(derived),
        "spod": spod_weights(derived),
    }


def brute_kernel(spec, y, y2):
    """2^s subset enumeration of the kernel sum."""
    total = 0.0
    for size in range(spec.s + 1):
        for u in itertools.combinations(range(1, spec.s + 1), size):
            term = weight_of_subset(spec.scheme, u)
            for j in u:
                term *= eta(spec.alpha, y[j - 1], y2[j - 1])
            total += term
    return total


class TestKernelEval:
    def test_vanishing_weights_leave_only_empty_subset(self):
        spec = KernelSpec(alpha=1, scheme=ProductWeights(gamma=np.full(3, 1e-300)), s=3)
        assert kernel_eval(spec, np.zeros(3), np.zeros(3)) == 1.0

    def test_single_dimension_product(self, hard):
        scheme = hard["serendipitous"]
        spec = KernelSpec(alpha=2, scheme=scheme, s=1)
        y, y2 = 0.3, 0.85
        expected = 1.0 + scheme.gamma[0] * eta(2, y, y2)
        assert kernel_eval(spec, [y], [y2]) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("p,s", [(1 / 1.1, 2), (1 / 1.1, 3), (1 / 2.2, 2), (1 / 2.2, 3)])
    def test_spod_matches_subset_enumeration(self, p, s):
        params = ProblemParams(theta=2.4, c=1.5 / math.sqrt(6.0), p=p, s=s)
        derived = derive_params(params)
        spec = KernelSpec(alpha=derived.alpha, scheme=spod_weights(derived), s=s)
        rng = np.random.default_rng(11)
        for _ in range(10):
            y, y2 = rng.random(s), rng.random(s)
            dp = kernel_eval(spec, y, y2)
            assert dp == pytest.approx(brute_kernel(spec, y, y2), rel=1e-12)

    def test_pod_matches_subset_enumeration(self):
        scheme = PodWeights(order_factors=np.array([1.0, 1.5, 4.0, 9.0]),
                            gamma=np.array([0.8, 0.5, 0.3]))
        spec = KernelSpec(alpha=2, scheme=scheme, s=3)
        rng = np.random.default_rng(12)
        y, y2 = rng.random(3), rng.random(3)
        assert kernel_eval(spec, y, y2) == pytest.approx(
            brute_kernel(spec, y, y2), rel=1e-13
        )

    def test_symmetry(self, hard):
        rng = np.random.default_rng(13)
        for scheme in (hard["serendipitous"], hard["spod"]):
            spec = KernelSpec(alpha=2, scheme=scheme, s=10)
            y, y2 = rng.random(10), rng.random(10)
            assert kernel_eval(spec, y, y2) == pytest.approx(
                kernel_eval(spec, y2, y), rel=1e-13
            )

    def test_dimension_mismatch(self, hard):
        spec = KernelSpec(alpha=2, scheme=hard["serendipitous"], s=10)
        with pytest.raises(ValueError, match="dimension"):
            kernel_eval(spec, np.zeros(9), np.zeros(10))

    def test_spod_alpha_mismatch_rejected(self, hard):
        with pytest.raises(ValueError, match="alpha"):
            KernelSpec(alpha=1, scheme=hard["spod"], s=10)


class TestFirstColumn:
    def test_single_point_lattice(self, hard):
        spec = KernelSpec(alpha=2, scheme=hard["serendipitous"], s=3)
        gv = GeneratingVector(n=1, z=[0, 0, 0])
        col = kernel_first_column(spec, gv)
        assert col.shape == (1,)
        assert col[0] == pytest.approx(
            kernel_eval(spec, np.zeros(3), np.zeros(3)), rel=1e-14
        )

    def test_reflection_symmetry(self, hard):
        spec = KernelSpec(alpha=2, scheme=hard["spod"], s=5)
        gv = cbc_construct(32, 5, 2, hard["spod"])
        col = kernel_first_column(spec, gv)
        for k in range(1, 32):
            assert col[k - 1] == pytest.approx(col[32 - k - 1], rel=1e-12)

    def test_vanishing_weights_give_unit_column(self):
        spec = KernelSpec(alpha=1, scheme=ProductWeights(gamma=np.full(2, 1e-300)), s=2)
        gv = GeneratingVector(n=8, z=[1, 3])
        assert np.array_equal(kernel_first_column(spec, gv), np.ones(8))


class TestSystem:
    @pytest.mark.parametrize("n", [16, 64, 256])
    def test_eigenvalues_real_positive(self, hard, n):
        for scheme in (hard["serendipitous"], hard["spod"]):
            spec = KernelSpec(alpha=2, scheme=scheme, s=6)
            gv = cbc_construct(n, 6, 2, scheme)
            system = CirculantKernelSystem(spec, gv)
            assert np.all(system.eigenvalues > 0.0)
            assert system.suspect_frequency is None

    def test_overflowing_weights_fail_loudly(self):
        spec = KernelSpec(alpha=1, scheme=ProductWeights(gamma=np.full(3, 1e150)), s=3)
        gv = GeneratingVector(n=8, z=[1, 3, 5])
        with pytest.raises(IllConditionedKernelError, match="overflow"):
            CirculantKernelSystem(spec, gv)

    def test_degenerate_spectrum_detected_for_rough_data(self):
        # At large n the smooth high-order kernel has eigenvalues at the
        # DFT rounding floor; data with genuine content there cannot be
        # reproduced and the failure must carry the offending frequency.
        params = ProblemParams(theta=3.6, c=0.2 / math.sqrt(6.0), p=1 / 3.3, s=100)
        derived = derive_params(params)
        scheme = serendipitous_weights(derived)
        rng = np.random.default_rng(5)
        gv = GeneratingVector(
            n=1024, z=rng.choice(np.arange(1, 1024, 2), size=100, replace=True)
        )
        spec = KernelSpec(alpha=3, scheme=scheme, s=100)
        system = CirculantKernelSystem(spec, gv)
        assert system.suspect_frequency is not None

        with pytest.raises(IllConditionedKernelError) as err:
            fit(spec, gv, rng.standard_normal(1024), system=system)
        assert err.value.frequency is not None
        assert err.value.ratio is not None and err.value.ratio < 1e-14

        # smooth data with matching decay fits fine on the same system
        smooth = np.prod(1.0 + 0.01 * np.sin(2.0 * np.pi * nodes(gv)[:, :3]), axis=1)
        fitted = fit(spec, gv, smooth, system=system)
        resid = np.max(np.abs(system.apply(fitted.coeffs) - smooth))
        assert resid <= 1e-6 * (1.0 + np.max(np.abs(smooth)))


class TestFit:
    def test_scalar_lattice(self, hard):
        spec = KernelSpec(alpha=2, scheme=hard["serendipitous"], s=2)
        gv = GeneratingVector(n=1, z=[0, 0])
        fitted = fit(spec, gv, np.array([3.5]))
        k00 = kernel_eval(spec, np.zeros(2), np.zeros(2))
        assert fitted.coeffs[0] == pytest.approx(3.5 / k00, rel=1e-14)

    def test_zero_data_zero_coefficients(self, hard):
        spec = KernelSpec(alpha=2, scheme=hard["spod"], s=4)
        gv = cbc_construct(16, 4, 2, hard["spod"])
        fitted = fit(spec, gv, np.zeros(16))
        assert np.array_equal(fitted.coeffs, np.zeros(16))

    @pytest.mark.parametrize("n", [8, 16, 64])
    @pytest.mark.parametrize("s", [2, 10])
    def test_matches_dense_solve(self, hard, n, s):
        rng = np.random.default_rng(21)
        for scheme in (hard["serendipitous"], hard["spod"]):
            spec = KernelSpec(alpha=2, scheme=scheme, s=s)
            gv = cbc_construct(n, s, 2, scheme)
            pts = nodes(gv)
            f = rng.standard_normal(n)
            fitted = fit(spec, gv, f)
            dense = np.empty((n, n))
            for i in range(n):
                for j in range(n):
                    dense[i, j] = kernel_eval(spec, pts[i], pts[j])
            ref = np.linalg.solve(dense, f)
            rel = np.max(np.abs(fitted.coeffs - ref)) / np.max(np.abs(ref))
            assert rel <= 1e-10

    def test_interpolates_at_nodes(self, hard):
        spec = KernelSpec(alpha=2, scheme=hard["serendipitous"], s=10)
        gv = cbc_construct(64, 10, 2, hard["serendipitous"])
        pts = nodes(gv)
        f = np.sin(2.0 * np.pi * pts[:, 0]) * np.cos(2.0 * np.pi * pts[:, 3])
        fitted = fit(spec, gv, f)
        values = np.array([evaluate(fitted, pts[k]) for k in range(64)])
        assert np.max(np.abs(values - f)) <= 1e-6 * (1.0 + np.max(np.abs(f)))


class TestEvaluate:
    def test_zero_coefficients(self, hard):
        spec = KernelSpec(alpha=2, scheme=hard["serendipitous"], s=3)
        gv = GeneratingVector(n=8, z=[1, 3, 5])
        interp_obj = Interpolant(spec=spec, gv=gv, coeffs=np.zeros(8))
        assert evaluate(interp_obj, np.full(3, 0.2)) == 0.0

    def test_matches_naive_summation(self, hard):
        spec = KernelSpec(alpha=2, scheme=hard["spod"], s=4)
        gv = cbc_construct(32, 4, 2, hard["spod"])
        pts = nodes(gv)
        rng = np.random.default_rng(31)
        coeffs = rng.standard_normal(32)
        interp_obj = Interpolant(spec=spec, gv=gv, coeffs=coeffs)
        y = rng.random(4)
        naive = sum(
            coeffs[k] * kernel_eval(spec, pts[k], y) for k in range(32)
        )
        assert evaluate(interp_obj, y) == pytest.approx(naive, rel=1e-12)


class TestEvaluateShifted:
    def test_zero_shift_returns_node_values(self, hard):
        spec = KernelSpec(alpha=2, scheme=hard["serendipitous"], s=6)
        gv = cbc_construct(32, 6, 2, hard["serendipitous"])
        pts = nodes(gv)
        f = pts[:, 0] * (1.0 - pts[:, 0]) + 0.5 * np.sin(2.0 * np.pi * pts[:, 1])
        fitted = fit(spec, gv, f)
        shifted = evaluate_shifted(fitted, np.zeros(6))
        assert np.max(np.abs(shifted - f)) <= 1e-6 * (1.0 + np.max(np.abs(f)))

    @pytest.mark.parametrize("n", [16, 128])
    def test_matches_independent_evaluations(self, hard, n):
        for scheme in (hard["serendipitous"], hard["spod"]):
            spec = KernelSpec(alpha=2, scheme=scheme, s=5)
            gv = cbc_construct(n, 5, 2, scheme)
            pts = nodes(gv)
            f = np.cos(2.0 * np.pi * pts[:, 2]) + pts[:, 0] * (1.0 - pts[:, 0])
            fitted = fit(spec, gv, f)
            rng = np.random.default_rng(41)
            y = rng.random(5)
            batched = evaluate_shifted(fitted, y)
            direct = np.array([
                evaluate(fitted, y + pts[k]) for k in range(n)
            ])
            rel = np.max(np.abs(batched - direct)) / np.max(np.abs(direct))
            assert rel <= 1e-10

    def test_constant_interpolant(self):
        spec = KernelSpec(alpha=1, scheme=ProductWeights(gamma=np.full(2, 1e-300)), s=2)
        gv = GeneratingVector(n=8, z=[1, 3])
        coeffs = np.zeros(8)
        coeffs[0] = 2.75
        interp_obj = Interpolant(spec=spec, gv=gv, coeffs=coeffs)
        shifted = evaluate_shifted(interp_obj, np.array([0.1, 0.9]))
        assert np.allclose(shifted, 2.75, atol=1e-14)

    def test_shift_invariance_identity(self, hard):
        # K(t_k, y + t_k') = K(t_{k-k' mod n}, y), exhaustively on a
        # small lattice
        spec = KernelSpec(alpha=2, scheme=hard["serendipitous"], s=3)
        gv = cbc_construct(16, 3, 2, hard["serendipitous"])
        pts = nodes(gv)
        rng = np.random.default_rng(51)
        y = rng.random(3)
        for kp in range(1, 17):
            for k in range(1, 17):
                idx = (k - kp) % 16 or 16
                lhs = kernel_eval(spec, pts[k - 1], y + pts[kp - 1])
                rhs = kernel_eval(spec, pts[idx - 1], y)
                assert lhs == pytest.approx(rhs, rel=1e-12)
