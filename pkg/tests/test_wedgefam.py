"""Wedges, cones, and the flat/glued disc families."""

import numpy as np
import pytest

from holodisc.accal import ComplexMatrixField
from holodisc.diskops import BoundaryFunction, disc_grid, lower_arc_cutoff, schwarz
from holodisc.errors import (
    BadCutoff,
    DirectionNotInterior,
    NotInWedge,
)
from holodisc.wedgefam import (
    Cone,
    DiscFamily,
    EdgeGraph,
    WedgeDomain,
    build_cone,
    cone_membership,
    flat_family,
    glued_family,
)


@pytest.fixture(scope="module")
def grid():
    return disc_grid(64, 128)


@pytest.fixture(scope="module")
def phi(grid):
    return lower_arc_cutoff(grid.n_theta)


class TestWedgeDomain:
    def test_model_membership(self):
        W = WedgeDomain.standard(2)
        assert bool(W.contains(np.array([-0.5 + 1.0j, -0.1 - 2.0j])))
        assert not bool(W.contains(np.array([0.5, -0.1])))
        assert bool(W.on_edge(np.array([1.0j, -3.0j])))

    def test_shrunken_wedge_is_smaller(self):
        W = WedgeDomain.standard(2, delta=0.2)
        # strongly asymmetric depths violate the shrunken condition
        z = np.array([-1e-4 + 0.0j, -1.0 + 0.0j])
        assert bool(W.contains(z))
        assert not bool(W.contains_shrunk(z))
        z2 = np.array([-0.5, -0.5])
        assert bool(W.contains_shrunk(z2))

    def test_graph_wedge(self):
        g = EdgeGraph.quadratic_iso(2, 0.05)
        W = WedgeDomain.from_graph(g)
        y = np.array([0.3, -0.2])
        p = W.edge_point(y)
        assert bool(W.on_edge(p))
        assert bool(W.contains(p - np.array([0.1, 0.1])))

    def test_edge_graph_constraints(self):
        with pytest.raises(ValueError):
            EdgeGraph(1, [[(0.3, (1,))]])  # nonzero linear part

    def test_genericity_model(self):
        W = WedgeDomain.standard(2)
        A = ComplexMatrixField.zero(2)
        pts = [np.array([0.3j, -0.7j]), np.array([0.0j, 0.0j])]
        sv = W.genericity_report(A, pts)
        assert abs(sv - 0.5) < 1e-12
        assert W.totally_real_edge

    def test_genericity_with_structure(self):
        W = WedgeDomain.standard(2)
        rng = np.random.default_rng(3)
        M = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        M *= 0.3 / np.linalg.norm(M, ord=2)
        sv = W.genericity_report(ComplexMatrixField.constant(M), [np.array([0.2j, 0.1j])])
        assert sv > 0.2


class TestFlatFamily:
    def test_degenerate_phi_gives_constant(self, grid):
        phi0 = BoundaryFunction(np.zeros(grid.n_theta))
        disc = flat_family([0.7], [1.0], phi0, grid, validate_cutoff=False)
        assert np.max(np.abs(disc.values[1] - 0.7j)) < 1e-14
        assert np.max(np.abs(disc.values[0])) < 1e-14

    def test_degenerate_phi_rejected_by_default(self, grid):
        phi0 = BoundaryFunction(np.zeros(grid.n_theta))
        with pytest.raises(BadCutoff):
            flat_family([0.0], [1.0], phi0, grid)

    def test_upper_arc_flatness_and_interior_sign(self, grid, phi):
        disc = flat_family([0.0], [1.0], phi, grid)
        upper = grid.upper_arc_indices()
        assert np.max(np.abs(disc.boundary[:, upper].real)) < 1e-10
        assert np.all(disc.values.real < 0.0)

    def test_t_scales_real_parts(self, grid, phi):
        disc = flat_family([0.0], [2.0], phi, grid)
        assert np.max(np.abs(disc.values[1].real - 2.0 * disc.values[0].real)) < 1e-13

    def test_boundary_continuity(self, grid, phi):
        disc = flat_family([0.3], [1.5], phi, grid)
        assert disc.boundary_jump() < 32.0 / grid.n_theta


class TestEvaluationMap:
    def test_round_trip_flat(self, grid, phi):
        fam = DiscFamily.model(2, grid, phi=phi)
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(100):
            c = rng.uniform(-0.5, 0.5, size=1)
            t = np.exp(rng.uniform(np.log(0.5), np.log(2.0), size=1))
            zeta = rng.uniform(0.05, 0.9) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            w = fam.evaluate(c, t, np.array([zeta]))[:, 0]
            c2, t2, zeta2 = fam.invert(w)
            err = max(np.max(np.abs(c2 - c)), np.max(np.abs(t2 - t)), abs(zeta2 - zeta))
            worst = max(worst, err)
        assert worst < 1e-8

    def test_diagonal_closed_form(self, grid, phi):
        fam = DiscFamily.model(2, grid, phi=phi)
        c = np.array([0.25])
        t = np.array([1.0])
        zeta = 0.4 - 0.3j
        w = fam.evaluate(c, t, np.array([zeta]))[:, 0]
        # on the diagonal t = 1 the real parts coincide
        assert abs(w[0].real - w[1].real) < 1e-12
        c2, t2, zeta2 = fam.invert(w)
        assert abs(t2[0] - 1.0) < 1e-9
        assert abs(zeta2 - zeta) < 1e-9

    def test_edge_point_rejected(self, grid, phi):
        fam = DiscFamily.model(2, grid, phi=phi)
        with pytest.raises(NotInWedge):
            fam.invert(np.array([0.3j, -0.2j]))


class TestGluedFamily:
    def test_zero_perturbation_reduces_to_flat(self, grid, phi):
        flat = flat_family([0.1], [1.2], phi, grid)
        glued = glued_family(EdgeGraph.zero(2), None, [0.1], [1.2], phi, grid)
        assert np.max(np.abs(glued.values - flat.values)) < 1e-13
        assert glued.meta["boundary_residual"] < 1e-13

    def test_quadratic_graph(self, grid, phi):
        g = EdgeGraph.quadratic_iso(2, 0.05)
        disc = glued_family(g, None, [0.1], [1.0], phi, grid)
        assert disc.meta["boundary_residual"] < 1e-6
        assert disc.meta["interior_residual"] < 1e-5
        # first-order response in the graph size
        d5 = disc.meta["flat_distance"]
        disc1 = glued_family(EdgeGraph.quadratic_iso(2, 0.01), None, [0.1], [1.0], phi, grid)
        d1 = disc1.meta["flat_distance"]
        ratio = (d5 / 0.05) / (d1 / 0.01)
        assert 0.5 < ratio < 2.0

    def test_constant_structure_closed_form(self, grid, phi):
        # oracle: z = H + a conj(H), H = S(phi)/(1+a), for real scalar a
        a = 0.1
        disc = glued_family(EdgeGraph.zero(1), ComplexMatrixField.constant([[a]]),
                            [], [], phi, grid)
        S = schwarz(phi, grid=grid)
        H = S.values / (1.0 + a)
        expected = H + a * np.conj(H)
        assert np.max(np.abs(disc.values[0] - expected)) < 1e-6
        assert disc.meta["boundary_residual"] < 1e-8

    def test_glued_boundary_on_edge(self, grid, phi):
        g = EdgeGraph.quadratic_iso(2, 0.05)
        W = WedgeDomain.from_graph(g)
        disc = glued_family(g, None, [0.2], [1.3], phi, grid)
        upper = grid.upper_arc_indices()
        pts = disc.boundary[:, upper].T
        assert np.max(np.abs(W.rho_values(pts))) < 1e-8

    def test_glued_interior_in_wedge(self, grid, phi):
        g = EdgeGraph.quadratic_iso(2, 0.05)
        W = WedgeDomain.from_graph(g)
        disc = glued_family(g, None, [0.2], [1.3], phi, grid)
        interior = np.moveaxis(disc.values, 0, -1)
        assert bool(np.all(W.contains(interior)))


class TestFoliation:
    def test_flat_report(self, grid, phi):
        fam = DiscFamily.model(2, grid, phi=phi)
        rep = fam.foliation_check([np.array([1.0]), np.array([2.0])],
                                  n_edge=12, n_cover=15, seed=5)
        assert rep["edge_cover_defect"] < 1e-9
        assert rep["sheet_separation"] > 1e-3
        assert rep["coverage_success_fraction"] == 1.0
        assert rep["coverage_worst_residual"] < 1e-8

    def test_glued_report_small(self, phi):
        g = disc_grid(32, 128)
        graph = EdgeGraph.quadratic_iso(2, 0.05)
        W = WedgeDomain.from_graph(graph)
        fam = DiscFamily(W, lower_arc_cutoff(g.n_theta), g)
        rep = fam.foliation_check([np.array([1.0])], n_edge=5, n_cover=0, seed=2)
        assert rep["edge_cover_defect"] < 1e-4


class TestCones:
    def test_half_plane_membership(self):
        W = WedgeDomain.standard(1)
        cone = build_cone(np.array([0.0j]), np.array([-1.0 + 0.0j]),
                          np.deg2rad(45.0), W)
        assert cone_membership(cone, np.array([-1.0 + 0.5j]))
        assert not cone_membership(cone, np.array([1.0j]))

    def test_oversized_cone_shrinks(self):
        W = WedgeDomain.standard(2)
        d = np.array([-1.0, -1.0]) / np.sqrt(2.0) + 0.0j
        cone = build_cone(np.zeros(2, dtype=complex), d, np.deg2rad(80.0), W)
        assert cone.shrunk_from is not None
        assert cone.half_angle < np.deg2rad(80.0)
        # all sampled member directions actually lie in the wedge
        dirs = cone.sample_directions(32, rng=np.random.default_rng(7))
        from holodisc.wedgefam import _real_to_complex_basis
        pts = 0.01 * (dirs @ _real_to_complex_basis(2))
        assert bool(np.all(W.contains(pts)))

    def test_vertex_off_edge_rejected(self):
        W = WedgeDomain.standard(2)
        with pytest.raises(DirectionNotInterior):
            build_cone(np.array([-0.5 + 0.0j, 0.0j]), np.array([-1.0, -1.0]) + 0.0j,
                       np.deg2rad(30.0), W)

    def test_outward_direction_rejected(self):
        W = WedgeDomain.standard(2)
        with pytest.raises(DirectionNotInterior):
            build_cone(np.zeros(2, dtype=complex), np.array([1.0, -1.0]) + 0.0j,
                       np.deg2rad(30.0), W)

    def test_aperture_nesting(self):
        W = WedgeDomain.standard(2)
        d = np.array([-1.0, -1.0]) / np.sqrt(2.0) + 0.0j
        small = build_cone(np.zeros(2, dtype=complex), d, np.deg2rad(10.0), W)
        big = build_cone(np.zeros(2, dtype=complex), d, np.deg2rad(30.0), W)
        pts = 0.1 * (small.sample_directions(16) @ np.array(
            [[1.0, 0], [1j, 0], [0, 1.0], [0, 1j]]))
        assert bool(np.all(big.contains(pts)))


class TestGluedInversion:
    def test_round_trip_tracks_perturbation(self):
        g = disc_grid(32, 64)
        graph = EdgeGraph.quadratic_iso(2, 0.05)
        W = WedgeDomain.from_graph(graph)
        fam = DiscFamily(W, lower_arc_cutoff(64), g)
        c = np.array([0.15])
        t = np.array([1.2])
        zeta = 0.4 - 0.25j
        w = fam.evaluate(c, t, np.array([zeta]))[:, 0]
        c2, t2, z2 = fam.invert(w)
        err = max(np.max(np.abs(c2 - c)), np.max(np.abs(t2 - t)), abs(z2 - zeta))
        assert err < 1e-8


class TestFoliationRefinement:
    def test_glued_edge_cover_defect_shrinks(self):
        graph = EdgeGraph.quadratic_iso(2, 0.05)
        W = WedgeDomain.from_graph(graph)
        rng = np.random.default_rng(3)
        y = np.column_stack([rng.uniform(-0.05, 0.05, 6), rng.uniform(-0.3, 0.3, 6)])
        defects = []
        for nr, nt in [(32, 128), (64, 256)]:
            g = disc_grid(nr, nt)
            fam = DiscFamily(W, lower_arc_cutoff(nt), g)
            d, _ = fam.edge_cover_defect(np.array([1.0]), y)
            defects.append(d)
        assert defects[1] < defects[0] / 2.0
