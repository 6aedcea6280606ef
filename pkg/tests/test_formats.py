"""Text grammars and CSV round trips."""

import numpy as np
import pytest

from holodisc import formats
from holodisc.diskops import GridFunction, disc_grid, lower_arc_cutoff
from holodisc.discsolve import DiscMap
from holodisc.errors import InputParseError


class TestCSV:
    def test_grid_function_round_trip(self, tmp_path):
        g = disc_grid(16, 32)
        gf = GridFunction(g, np.exp(g.zeta) + 1j * np.abs(g.zeta))
        path = tmp_path / "f.csv"
        formats.write_grid_function(path, gf)
        back = formats.read_grid_function(path, disc_grid)
        assert back.grid is g
        assert np.array_equal(back.values, gf.values)

    def test_disc_round_trip(self, tmp_path):
        g = disc_grid(16, 32)
        disc = DiscMap(g, np.stack([g.zeta, 2.0 * np.conj(g.zeta)]))
        path = tmp_path / "d.csv"
        formats.write_disc(path, disc)
        back = formats.read_disc(path, disc_grid)
        assert back.n == 2
        assert np.array_equal(back.values, disc.values)

    def test_boundary_round_trip(self, tmp_path):
        phi = lower_arc_cutoff(64)
        path = tmp_path / "phi.csv"
        formats.write_boundary(path, phi)
        back = formats.read_boundary(path)
        assert np.array_equal(back.samples, phi.samples)

    def test_points_round_trip(self, tmp_path):
        pts = np.array([0.1 + 0.2j, -3.0, 2.0j])
        path = tmp_path / "p.csv"
        formats.write_points(path, pts)
        assert np.array_equal(formats.read_points(path), pts)

    def test_malformed_grid_function(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("16,32\n0,0,hello,1.0\n")
        with pytest.raises(InputParseError) as exc:
            formats.read_grid_function(path, disc_grid)
        assert exc.value.line == 2


class TestMatrixFieldGrammar:
    def test_constant_entry(self):
        A = formats.parse_matrix_field("n 1\nA 1 1  0.3 0.0\n")
        assert np.allclose(A(np.array([0.5 + 0.5j])), [[0.3]])

    def test_polynomial_entries(self):
        text = """
        # structure with one linear and one mixed entry
        n 2
        A 1 1  0.1 0.0 z1
        A 1 2  0.0 -0.5 z2^2 zbar1 + 0.25 0.0
        """
        A = formats.parse_matrix_field(text)
        z = np.array([1.0 + 1.0j, 2.0])
        M = A(z)
        assert abs(M[0, 0] - 0.1 * z[0]) < 1e-14
        assert abs(M[0, 1] - (-0.5j * z[1] ** 2 * np.conj(z[0]) + 0.25)) < 1e-14
        assert M[1, 1] == 0.0

    def test_inline_const_and_linear(self):
        A = formats.parse_matrix_field_inline("const 0.3")
        assert np.allclose(A(np.zeros(1, dtype=complex)), [[0.3]])
        A2 = formats.parse_matrix_field_inline("linear 0.1")
        assert np.allclose(A2(np.array([2.0 + 0j])), [[0.2]])

    def test_errors_carry_line_numbers(self):
        with pytest.raises(InputParseError) as exc:
            formats.parse_matrix_field("n 2\nA 1 5  0.1 0.0\n")
        assert exc.value.line == 2
        with pytest.raises(InputParseError):
            formats.parse_matrix_field("A 1 1  0.1 0.0\n")  # n missing
        with pytest.raises(InputParseError):
            formats.parse_matrix_field("n 1\nA 1 1  0.1 0.0 w3\n")


class TestWedgeGrammar:
    def test_model_wedge(self):
        W = formats.parse_wedge("n 2\nmodel true\ndelta 0.2\n")
        assert W.model and W.n == 2 and W.delta == 0.2

    def test_graph_wedge(self):
        text = "n 2\ngraph 1: 0.05 y1^2 + 0.05 y2^2\ngraph 2: 0.05 y1^2 + 0.05 y2^2\n"
        W = formats.parse_wedge(text)
        y = np.array([0.3, -0.4])
        assert abs(W.edge_graph(y)[0] - 0.05 * 0.25) < 1e-14

    def test_conjugate_rejected_in_graph(self):
        with pytest.raises(InputParseError):
            formats.parse_wedge("n 1\ngraph 1: 0.05 zbar1^2\n")

    def test_linear_graph_rejected(self):
        with pytest.raises(InputParseError):
            formats.parse_wedge("n 1\ngraph 1: 0.5 y1\n")


class TestOtherGrammars:
    def test_seed_spec(self):
        seed = formats.parse_seed("zeta")
        assert seed.n == 1
        z = np.array([0.3 + 0.2j])
        assert np.allclose(seed(z)[0], z)
        seed2 = formats.parse_seed("0 1 0.5j; 1+2j")
        assert seed2.n == 2
        assert np.allclose(seed2(z)[0], z + 0.5j * z ** 2)
        assert np.allclose(seed2(z)[1], 1 + 2j)

    def test_test_function_file(self):
        from holodisc.wedgefam import WedgeDomain
        W = WedgeDomain.standard(2)
        F = formats.parse_test_function("name branch_power\n", W)
        assert F.dbar_bound == 0.0
        F2 = formats.parse_test_function("name perturbed\neps 0.2\n", W)
        assert F2.dbar_bound == 0.2
        with pytest.raises(InputParseError):
            formats.parse_test_function("name unknown_thing\n", W)

    def test_curve_file(self):
        from holodisc.wedgefam import WedgeDomain
        W = WedgeDomain.standard(2)
        ray = formats.parse_curve(
            "type ray\nvertex 0 0 0 0\ndirection -1 0 -0.5 0\n", W)
        assert np.allclose(ray(np.array([1.0]))[0], 0.0)
        tang = formats.parse_curve(
            "type tangent\nvertex 0 0 0 0\ndirection -1 0 -0.5 0\n"
            "power 1.5\nmagnitude 0.1\nperp 0 -1 0 0\n", W)
        d = np.linalg.norm(tang(np.array([0.9]))[0] - ray(np.array([0.9]))[0])
        assert abs(d - 0.1 * 0.1 ** 1.5) < 1e-12
