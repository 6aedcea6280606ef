"""Disc grid, Cauchy-Green transform, Schwarz integral, finite differences."""

import numpy as np
import pytest

from holodisc.diskops import (
    BoundaryFunction,
    GridFunction,
    cauchy_green,
    dbar_fd,
    dbar_spectral,
    disc_grid,
    lower_arc_cutoff,
    schwarz,
    schwarz_derivative,
)
from holodisc.errors import BadCutoff, GridTooCoarse, SingularityTooClose


def cauchy_pompeiu_monomial(q, p, zeta):
    """Independent closed-form oracle for T(w^q wbar^p) inside the disc.

    A primitive of the dbar problem is u0 = z^q zbar^{p+1}/(p+1); removing
    its boundary Cauchy integral (u0 = z^{q-p-1}/(p+1) on |z| = 1, whose
    interior Cauchy transform keeps only nonnegative powers) gives T.
    """
    zeta = np.asarray(zeta, dtype=complex)
    out = zeta ** q * np.conj(zeta) ** (p + 1) / (p + 1)
    k = q - p - 1
    if k >= 0:
        out = out - zeta ** k / (p + 1)
    return out


class TestGrid:
    def test_weights_sum_to_disc_area(self):
        for (nr, nt) in [(32, 64), (64, 128), (128, 256)]:
            g = disc_grid(nr, nt)
            assert abs(g.weights.sum() - np.pi) / np.pi < 1e-12

    def test_nodes_strictly_inside(self):
        g = disc_grid(64, 128)
        r = np.abs(g.zeta)
        assert r.max() < 1.0
        assert r.min() > 0.0

    def test_quadrature_of_smooth_function(self):
        g = disc_grid(64, 128)
        vals = np.exp(-np.abs(g.zeta) ** 2)
        exact = np.pi * (1.0 - np.exp(-1.0))
        assert abs(g.area_integral(vals) - exact) < 1e-12

    def test_too_coarse_raises(self):
        with pytest.raises(GridTooCoarse):
            disc_grid(8, 4)


class TestCauchyGreen:
    def test_zero_in_zero_out(self):
        g = disc_grid(32, 64)
        f = GridFunction(g, np.zeros_like(g.zeta))
        out = cauchy_green(f)
        assert np.max(np.abs(out.values)) == 0.0

    def test_constant_gives_zbar_inside(self):
        g = disc_grid(32, 64)
        f = GridFunction(g, np.ones_like(g.zeta))
        out = cauchy_green(f)
        expected = np.conj(g.zeta)
        assert np.max(np.abs(out.values - expected)) < 1e-12

    def test_constant_gives_reciprocal_outside(self):
        g = disc_grid(64, 128)
        f = GridFunction(g, np.ones_like(g.zeta))
        pts = np.array([1.5, 2.0 + 1.0j, -3.0j])
        out = cauchy_green(f, eval_points=pts)
        assert np.max(np.abs(out - 1.0 / pts)) < 1e-8

    @pytest.mark.parametrize("q,p", [(0, 0), (0, 1), (1, 0), (2, 0), (0, 2), (1, 1), (2, 1)])
    def test_monomials_match_pompeiu_oracle(self, q, p):
        g = disc_grid(64, 128)
        f = GridFunction(g, g.zeta ** q * np.conj(g.zeta) ** p)
        out = cauchy_green(f)
        expected = cauchy_pompeiu_monomial(q, p, g.zeta)
        assert np.max(np.abs(out.values - expected)) < 1e-11

    def test_interior_point_evaluation(self):
        g = disc_grid(32, 64)
        f = GridFunction(g, np.conj(g.zeta))
        pts = np.array([0.3 + 0.2j, -0.5j, 0.85, 1e-3 + 1e-3j])
        out = cauchy_green(f, eval_points=pts)
        expected = cauchy_pompeiu_monomial(0, 1, pts)
        assert np.max(np.abs(out - expected)) < 1e-10

    def test_smooth_function_dbar_identity(self):
        g = disc_grid(64, 256)
        fn = lambda z: np.exp(z) * np.conj(z) + np.sin(np.abs(z) ** 2)
        f = GridFunction(g, fn(g.zeta))
        Tf = cauchy_green(f)
        resid = dbar_spectral(Tf.values, g) - f.values
        assert np.max(np.abs(resid)) < 1e-9

    def test_exterior_exclusion_radius(self):
        g = disc_grid(32, 64)
        f = GridFunction(g, np.ones_like(g.zeta))
        close = g.zeta[-1, 0] * (1.0 + 1e-9) / np.abs(g.zeta[-1, 0])
        # a point on the unit circle hugging the outermost node ring
        with pytest.raises(SingularityTooClose):
            cauchy_green(f, eval_points=np.array([close]))

    def test_morera_outside(self):
        g = disc_grid(64, 128)
        fn = lambda z: np.conj(z) ** 2 + z
        f = GridFunction(g, fn(g.zeta))
        m = 64
        ang = 2.0 * np.pi * np.arange(m) / m
        circle = 2.0 + 0.3 * np.exp(1j * ang)
        vals = cauchy_green(f, eval_points=circle)
        contour = np.sum(vals * 0.3j * np.exp(1j * ang)) * (2.0 * np.pi / m)
        assert abs(contour) < 1e-6
        center = cauchy_green(f, eval_points=np.array([2.0]))[0]
        assert abs(np.mean(vals) - center) < 1e-6


class TestDbarFD:
    def test_holomorphic_gives_zero(self):
        g = disc_grid(32, 64)
        u = GridFunction(g, g.zeta)
        out = dbar_fd(u)
        # order 2: the angular sinc error does not cancel the exact radial part
        assert np.max(np.abs(out.values)) < 2e-3
        out6 = dbar_fd(u, order=6)
        assert np.max(np.abs(out6.values)) < 1e-7

    def test_zbar_gives_one(self):
        g = disc_grid(32, 64)
        u = GridFunction(g, np.conj(g.zeta))
        out = dbar_fd(u)
        assert np.max(np.abs(out.values - 1.0)) < 1e-3
        out6 = dbar_fd(u, order=6)
        assert np.max(np.abs(out6.values - 1.0)) < 1e-7

    def test_abs_squared_gives_zeta(self):
        g = disc_grid(32, 64)
        u = GridFunction(g, np.abs(g.zeta) ** 2)
        out = dbar_fd(u, order=2)
        assert np.max(np.abs(out.values - g.zeta)) < 1e-10  # radial quadratic, angular const

    def test_polynomial_floor_at_order_six(self):
        g = disc_grid(128, 256)
        u = GridFunction(g, g.zeta ** 3 + 0.5 * np.conj(g.zeta) ** 2 * g.zeta)
        out = dbar_fd(u, order=6)
        expected = g.zeta * np.conj(g.zeta)  # dbar of 0.5 zbar^2 z
        assert np.max(np.abs(out.values - expected)) < 1e-8

    def test_second_order_convergence(self):
        fn = lambda z: np.exp(z + 0.3 * np.conj(z)) * np.cos(np.abs(z) ** 2)
        errs = []
        for nr, nt in [(32, 64), (64, 128)]:
            g = disc_grid(nr, nt)
            u = GridFunction(g, fn(g.zeta))
            exact = dbar_spectral(u.values, g)
            out = dbar_fd(u, order=2)
            inner = slice(2, -2)
            errs.append(np.max(np.abs(out.values[inner] - exact[inner])))
        slope = np.log2(errs[0] / errs[1])
        assert abs(slope - 2.0) < 0.45

    def test_grid_too_coarse(self):
        g = disc_grid(8, 8)
        u = GridFunction(g, g.zeta)
        with pytest.raises(GridTooCoarse):
            dbar_fd(u, order=6)


class TestComposition:
    def test_dbar_of_cauchy_green_recovers_f(self):
        g = disc_grid(128, 256)
        fn = lambda z: np.conj(z) ** 2 + 1.0
        f = GridFunction(g, fn(g.zeta))
        Tf = cauchy_green(f)
        out = dbar_fd(Tf, order=2)
        err = np.max(np.abs(out.values - f.values))
        assert err < 1e-3

    def test_composition_converges_at_stencil_order(self):
        fn = lambda z: np.conj(z) ** 2 + 1.0
        errs = []
        for nr, nt in [(64, 128), (128, 256)]:
            g = disc_grid(nr, nt)
            f = GridFunction(g, fn(g.zeta))
            out = dbar_fd(cauchy_green(f), order=2)
            errs.append(np.max(np.abs(out.values - f.values)))
        slope = np.log2(errs[0] / errs[1])
        assert abs(slope - 2.0) < 0.3


class TestSchwarz:
    def test_constant_reproduced(self):
        g = disc_grid(32, 64)
        phi = BoundaryFunction(np.full(64, 0.7))
        out = schwarz(phi, grid=g)
        assert np.max(np.abs(out.values - 0.7)) < 1e-13

    @pytest.mark.parametrize("k", [1, 2])
    def test_cosine_gives_power(self, k):
        g = disc_grid(64, 512)
        phi = BoundaryFunction.from_callable(lambda t: np.cos(k * t), 512)
        out = schwarz(phi, grid=g)
        assert np.max(np.abs(out.values - g.zeta ** k)) < 1e-8

    def test_linearity(self):
        g = disc_grid(32, 64)
        rng = np.random.default_rng(2)
        a = rng.standard_normal(64)
        b = rng.standard_normal(64)
        s_ab = schwarz(BoundaryFunction(a + 2.0 * b), grid=g).values
        s_a = schwarz(BoundaryFunction(a), grid=g).values
        s_b = schwarz(BoundaryFunction(b), grid=g).values
        assert np.max(np.abs(s_ab - s_a - 2.0 * s_b)) < 1e-12

    def test_holomorphic_and_normalized(self):
        g = disc_grid(64, 256)
        phi = lower_arc_cutoff(256)
        out = schwarz(phi, grid=g)
        resid = dbar_spectral(out.values, g)
        assert np.max(np.abs(resid)) < 1e-8
        center = schwarz(phi, eval_points=np.array([0.0]))[0]
        assert abs(center.imag) < 1e-14

    def test_boundary_trace_real_part_exact(self):
        g = disc_grid(64, 256)
        phi = lower_arc_cutoff(256)
        out = schwarz(phi, grid=g)
        assert np.max(np.abs(out.boundary.real - phi.samples)) == 0.0

    def test_trig_reproduction_spectral(self):
        n = 256
        g = disc_grid(64, n)
        rng = np.random.default_rng(5)
        coeffs = rng.standard_normal(n // 4)
        theta = 2.0 * np.pi * np.arange(n) / n
        vals = np.zeros(n)
        expected = np.zeros_like(g.zeta, dtype=complex)
        for k, c in enumerate(coeffs[1:], start=1):
            vals += c * np.cos(k * theta)
            expected += c * g.zeta ** k
        vals += coeffs[0]
        expected += coeffs[0]
        out = schwarz(BoundaryFunction(vals), grid=g)
        assert np.max(np.abs(out.values - expected)) < 1e-10

    def test_derivative(self):
        phi = BoundaryFunction.from_callable(lambda t: np.cos(2 * t), 128)
        d = schwarz_derivative(phi)
        z = np.array([0.3 + 0.1j])
        assert np.max(np.abs(d(z) - 2.0 * z)) < 1e-10


class TestCutoff:
    def test_builtin_cutoff_valid(self):
        phi = lower_arc_cutoff(256)
        assert phi.samples.min() >= -1.0
        assert phi.samples.max() <= 0.0

    def test_invalid_cutoffs_rejected(self):
        theta = 2.0 * np.pi * np.arange(64) / 64
        with pytest.raises(BadCutoff):
            BoundaryFunction(-np.sin(theta) ** 4).check_cutoff()  # negative on upper arc too
        with pytest.raises(BadCutoff):
            BoundaryFunction(np.zeros(64)).check_cutoff()  # vanishing lower arc

    def test_center_value_is_mean(self):
        phi = lower_arc_cutoff(128)
        val = schwarz(phi, eval_points=np.array([0.0]))[0]
        assert abs(val - phi.samples.mean()) < 1e-14


class TestInterpolation:
    def test_interpolates_smooth_samples(self):
        g = disc_grid(64, 128)
        fn = lambda z: np.exp(z) + 0.5 * np.conj(z) ** 2
        u = GridFunction(g, fn(g.zeta))
        pts = np.array([0.3 + 0.4j, -0.2 + 0.1j, 0.9, 1e-4j])
        u_no_eval = GridFunction(g, u.values)
        vals = u_no_eval.eval_at(pts)
        assert np.max(np.abs(vals - fn(pts))) < 1e-9


class TestOperatorBoundedness:
    @staticmethod
    def holder_type_norm(grid, values, exponent=0.5, n_pairs=400, seed=0):
        """Discrete Hoelder-type norm: sup + max |du| / |dz|^exponent."""
        rng = np.random.default_rng(seed)
        flat_z = grid.zeta.ravel()
        flat_v = values.ravel()
        i = rng.integers(0, flat_z.size, n_pairs)
        j = rng.integers(0, flat_z.size, n_pairs)
        keep = np.abs(flat_z[i] - flat_z[j]) > 1e-9
        ratios = (np.abs(flat_v[i] - flat_v[j])[keep]
                  / np.abs(flat_z[i] - flat_z[j])[keep] ** exponent)
        return float(np.max(np.abs(values))) + float(ratios.max())

    def test_empirical_norm_stable_under_refinement(self):
        # measured ratio of Hoelder-type norms of Tf and f stays finite and
        # within a factor 2 across refinement (recorded at exponent 0.5)
        fn = lambda z: np.exp(z) * np.conj(z) + 0.3
        ratios = []
        for nr, nt in [(32, 64), (64, 128), (128, 256)]:
            g = disc_grid(nr, nt)
            f = GridFunction(g, fn(g.zeta))
            Tf = cauchy_green(f)
            nf = self.holder_type_norm(g, f.values)
            nTf = self.holder_type_norm(g, Tf.values)
            ratios.append(nTf / nf)
        assert all(np.isfinite(r) for r in ratios)
        assert max(ratios) / min(ratios) < 2.0
