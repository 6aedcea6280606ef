r"""Wedge domains with totally real edges and their attached disc families.

A wedge is W = {rho_j < 0, j = 1..k} with edge E = {rho_j = 0 for all j};
genericity means the (0,1) parts of the rho_j stay linearly independent
along E, and k = n makes the edge totally real.  The model wedge has
rho_j = x_j, so E = i R^n and W_0 = {x_j < 0}.

The flat disc family attached to the model edge is

    z_j(c, t)(zeta) = t_j S phi(zeta) + i c_j,   t_1 = 1, c_1 = 0,

where phi is a cutoff vanishing on the closed upper half-circle and
strictly negative below, so discs are glued to E exactly along the upper
arc and dip into W_0 elsewhere (their real parts are negative inside by
the maximum principle).  Since S phi is bounded, the family covers E and
W_0 locally: the first edge coordinate y_1 ranges over the (symmetric)
interval swept by Im S phi on the upper arc, scaled by t_1 = 1; everything
here is meant in such a neighborhood of the origin.

For an edge given as a graph x = h(y) (h(0) = 0, dh(0) = 0) and a
structure with complex matrix A, the glued family is produced by an
alternating Picard scheme: the Cauchy-Green transform absorbs the interior
dbar defect, and a Schwarz integral re-imposes the boundary condition
Re z = t phi + h(Im z) on the whole circle (which reduces to the gluing
x = h(y) on the upper arc, where phi = 0).  The anchors Im z_j(0) = c_j fix
the remaining imaginary constants.
"""

import numpy as np

from .accal import ComplexMatrixField, PolyCZ, ScalarField, complex_to_real, dbar_scalar
from .diskops import (
    BoundaryFunction,
    dbar_spectral,
    lower_arc_cutoff,
    schwarz,
    schwarz_derivative,
)
from .discsolve import DiscMap, holomorphy_residual
from .errors import (
    BoundaryMismatch,
    DirectionNotInterior,
    InversionFailed,
    MaxIterExceeded,
    NoContraction,
    NotInWedge,
)

DEFAULT_DELTA = 0.1


class EdgeGraph:
    """Polynomial graph map h : R^n -> R^n with h(0) = 0, dh(0) = 0.

    Components are lists of (coefficient, exponent tuple) monomials in y.
    """

    def __init__(self, n, components):
        self.n = int(n)
        comps = []
        for terms in components:
            clean = [(float(c), tuple(int(e) for e in exp)) for c, exp in terms]
            for c, exp in clean:
                if sum(exp) <= 1 and c != 0.0:
                    raise ValueError("edge graph must satisfy h(0) = 0 and dh(0) = 0")
            comps.append(clean)
        if len(comps) != self.n:
            raise ValueError("edge graph needs one component per coordinate")
        self.components = comps

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape[:-1] + (self.n,))
        for j, terms in enumerate(self.components):
            for c, exp in terms:
                term = np.full(y.shape[:-1], c)
                for l, e in enumerate(exp):
                    if e:
                        term = term * y[..., l] ** e
                out[..., j] += term
        return out

    def gradient(self, y):
        """dh/dy, shape (..., n, n): entry [j, l] = d h_j / d y_l."""
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape[:-1] + (self.n, self.n))
        for j, terms in enumerate(self.components):
            for c, exp in terms:
                for l, e in enumerate(exp):
                    if e == 0:
                        continue
                    term = np.full(y.shape[:-1], c * e)
                    for l2, e2 in enumerate(exp):
                        pw = e2 - 1 if l2 == l else e2
                        if pw:
                            term = term * y[..., l2] ** pw
                    out[..., j, l] += term
        return out

    @classmethod
    def zero(cls, n):
        return cls(n, [[] for _ in range(n)])

    @classmethod
    def quadratic_iso(cls, n, eps):
        """h_j(y) = eps |y|^2 for every j."""
        terms = [(eps, tuple(2 if l == m else 0 for l in range(n))) for m in range(n)]
        return cls(n, [list(terms) for _ in range(n)])

    def is_zero(self):
        return all(len(t) == 0 for t in self.components)


def _model_rho(n, j):
    poly = PolyCZ(n, [(0.5, tuple(1 if l == j else 0 for l in range(n)), (0,) * n),
                      (0.5, (0,) * n, tuple(1 if l == j else 0 for l in range(n)))])
    return ScalarField.from_poly(poly, is_real=True, name=f"x_{j+1}")


def _graph_rho(graph, j):
    n = graph.n
    ej = np.zeros(n)
    ej[j] = 1.0

    def fn(z):
        z = np.asarray(z, dtype=complex)
        return (z[..., j].real - graph(z.imag)[..., j]).astype(complex)

    def grad_z(z):
        z = np.asarray(z, dtype=complex)
        dh = graph.gradient(z.imag)[..., j, :]
        return 0.5 * ej + 0.5j * dh

    def grad_zbar(z):
        z = np.asarray(z, dtype=complex)
        dh = graph.gradient(z.imag)[..., j, :]
        return 0.5 * ej - 0.5j * dh

    return ScalarField(n, fn, grad_z=grad_z, grad_zbar=grad_zbar,
                       is_real=True, name=f"x_{j+1} - h_{j+1}(y)")


class WedgeDomain:
    """Wedge {rho_j < 0} with its edge, shrink parameter and helpers."""

    def __init__(self, n, rhos, delta=DEFAULT_DELTA, model=False, edge_graph=None):
        self.n = int(n)
        self.rhos = list(rhos)
        self.k = len(self.rhos)
        self.delta = float(delta)
        self.model = bool(model)
        self.edge_graph = edge_graph
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")

    @classmethod
    def standard(cls, n, delta=DEFAULT_DELTA):
        """Model wedge W_0 = {x_j < 0} with edge i R^n."""
        return cls(n, [_model_rho(n, j) for j in range(n)], delta=delta,
                   model=True, edge_graph=EdgeGraph.zero(n))

    @classmethod
    def from_graph(cls, graph, delta=DEFAULT_DELTA):
        """Wedge over the edge x = h(y): rho_j = x_j - h_j(y)."""
        n = graph.n
        return cls(n, [_graph_rho(graph, j) for j in range(n)], delta=delta,
                   model=graph.is_zero(), edge_graph=graph)

    @property
    def totally_real_edge(self):
        return self.k == self.n

    def rho_values(self, z):
        z = np.asarray(z, dtype=complex)
        return np.stack([np.real(r(z)) for r in self.rhos], axis=-1)

    def contains(self, z, margin=0.0):
        vals = self.rho_values(z)
        return np.all(vals < -margin, axis=-1)

    def contains_shrunk(self, z):
        """Membership in W_delta = {rho_j - delta sum_{k != j} rho_k < 0}."""
        vals = self.rho_values(z)
        total = vals.sum(axis=-1, keepdims=True)
        shrunk = vals - self.delta * (total - vals)
        return np.all(shrunk < 0.0, axis=-1)

    def on_edge(self, z, tol=1e-9):
        vals = self.rho_values(z)
        return np.all(np.abs(vals) <= tol, axis=-1)

    def edge_point(self, y):
        """Point of E over the y-coordinates (x = h(y))."""
        y = np.asarray(y, dtype=float)
        x = self.edge_graph(y) if self.edge_graph is not None else np.zeros_like(y)
        return x + 1j * y

    def genericity_report(self, A_field, edge_samples):
        """Smallest singular value of the k x n matrix of (0,1)-coefficient
        rows of the rho_j over the given edge points."""
        worst = np.inf
        for z in np.atleast_2d(np.asarray(edge_samples, dtype=complex)):
            rows = np.stack([dbar_scalar(r, A_field, z).residual_row for r in self.rhos])
            s = np.linalg.svd(rows, compute_uv=False)
            worst = min(worst, float(s[-1]))
        return worst


class Cone:
    """Circular cone with vertex on the edge, pointing into the wedge."""

    def __init__(self, vertex, axis, half_angle, shrunk_from=None):
        self.vertex = np.atleast_1d(np.asarray(vertex, dtype=complex))
        axis = complex_to_real(np.atleast_1d(np.asarray(axis, dtype=complex)))
        self.axis = axis / np.linalg.norm(axis)
        self.half_angle = float(half_angle)
        self.shrunk_from = shrunk_from

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        w = complex_to_real(z - self.vertex)
        norms = np.linalg.norm(w, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            cosang = np.where(norms > 0, (w @ self.axis) / norms, -1.0)
        return (norms > 0) & (cosang >= np.cos(self.half_angle) - 1e-14)

    def sample_directions(self, count, rng=None, angle_fraction=1.0):
        """Unit directions in the cone: the axis plus a seeded sample of
        directions at angle_fraction * half_angle off the axis."""
        rng = np.random.default_rng(0) if rng is None else rng
        basis = _orthogonal_complement(self.axis)
        dirs = [self.axis]
        ang = self.half_angle * angle_fraction
        for _ in range(count - 1):
            w = rng.standard_normal(basis.shape[0])
            u = w @ basis
            u /= np.linalg.norm(u)
            dirs.append(np.cos(ang) * self.axis + np.sin(ang) * u)
        return np.array(dirs)


def _orthogonal_complement(axis):
    """Orthonormal basis of the hyperplane orthogonal to the axis."""
    dim = axis.size
    basis = [axis]
    for k in range(dim):
        v = np.eye(dim)[:, k].copy()
        for b in basis:
            v -= (v @ b) * b
        nv = np.linalg.norm(v)
        if nv > 1e-10:
            basis.append(v / nv)
    return np.array(basis[1:])


def cone_membership(cone, z):
    """Predicate: is z inside the (open, vertex-removed) cone."""
    return bool(np.all(cone.contains(np.atleast_1d(np.asarray(z, dtype=complex)))))


def build_cone(p, direction, half_angle, wedge, probe_radii=(1e-3, 1e-2, 0.05),
               n_dirs=24, shrink=0.9, max_shrink=60, edge_tol=1e-8):
    """Cone with vertex p on the edge, directed into the wedge.

    Verifies the axis points inward; samples boundary directions at the
    probe radii and shrinks the half-angle geometrically until all samples
    lie in the wedge, recording the original angle when shrunk.
    """
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    if not bool(np.all(wedge.on_edge(p, tol=edge_tol))):
        raise DirectionNotInterior(f"cone vertex {p} is not on the edge")
    cone = Cone(p, direction, half_angle)
    axis_c = np.atleast_1d(np.asarray(direction, dtype=complex))
    axis_c = axis_c / np.linalg.norm(complex_to_real(axis_c))
    probes = p[None, :] + np.asarray(probe_radii)[:, None] * axis_c[None, :]
    if not bool(np.all(wedge.contains(probes))):
        raise DirectionNotInterior(f"axis direction {direction} does not enter the wedge at {p}")
    angle = float(half_angle)
    for _ in range(max_shrink):
        cone = Cone(p, direction, angle,
                    shrunk_from=half_angle if angle != half_angle else None)
        dirs = cone.sample_directions(n_dirs)
        ok = True
        for r in probe_radii:
            pts = p[None, :] + r * (dirs @ _real_to_complex_basis(p.size))
            if not bool(np.all(wedge.contains(pts))):
                ok = False
                break
        if ok:
            return cone
        angle *= shrink
    raise DirectionNotInterior("could not fit a cone inside the wedge at the requested vertex")


def _real_to_complex_basis(n):
    """Matrix turning packed real 2n-directions into complex n-vectors."""
    B = np.zeros((2 * n, n), dtype=complex)
    for j in range(n):
        B[2 * j, j] = 1.0
        B[2 * j + 1, j] = 1j
    return B


def _full_params(c, t):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise ValueError("family parameters t_j must be positive")
    return np.concatenate([[0.0], c]), np.concatenate([[1.0], t])


def flat_family(c, t, phi, grid, validate_cutoff=True):
    """Model-family disc z_j = t_j S phi + i c_j (t_1 = 1, c_1 = 0).

    The boundary trace has exact real part t_j phi, so the disc is glued to
    the model edge along the closed upper half-circle; interior real parts
    are negative.  ``validate_cutoff=False`` admits degenerate boundary
    data (testing only).
    """
    if validate_cutoff:
        phi.check_cutoff()
    cf, tf = _full_params(c, t)
    n = cf.size
    S = schwarz(phi, grid=grid)
    values = np.empty((n, grid.n_r, grid.n_theta), dtype=complex)
    boundary = np.empty((n, grid.n_theta), dtype=complex)
    evals = []
    for j in range(n):
        values[j] = tf[j] * S.values + 1j * cf[j]
        boundary[j] = tf[j] * S.boundary + 1j * cf[j]
        evals.append(lambda zz, _t=tf[j], _c=cf[j], _S=S.evaluator: _t * _S(zz) + 1j * _c)
    meta = {"family": "flat", "c": cf, "t": tf}
    return DiscMap(grid, values, boundary=boundary, meta=meta, evaluators=evals)


def glued_family(edge_graph, A_field, c, t, phi, grid, tol=1e-10, max_iter=80,
                 residual_order=6):
    """Disc glued to the edge x = h(y) along the upper half-circle, holomorphic
    for the structure with complex matrix A.

    Alternating Picard scheme; see the module docstring.  The result's meta
    carries the boundary-gluing residual (sup over upper-arc samples of
    |x - h(y)|), the interior holomorphy residual, and the sup distance to
    the flat model family at the same parameters.
    """
    phi.check_cutoff()
    cf, tf = _full_params(c, t)
    n = cf.size
    if edge_graph.n != n:
        raise ValueError("edge graph dimension does not match the parameters")
    if A_field is not None and A_field.n != n:
        raise ValueError("structure dimension does not match the parameters")
    cg = grid.cauchy_green_op()
    flat = flat_family(c, t, phi, grid)
    z = flat.values.copy()
    z_b = flat.boundary.copy()
    upper = grid.upper_arc_indices()
    steps = []
    bad_streak = 0
    for it in range(1, max_iter + 1):
        if A_field is not None:
            conj_dzbar = np.stack([dbar_spectral(np.conj(z[i]), grid) for i in range(n)])
            pts = np.moveaxis(z, 0, -1)
            u = np.einsum("rtij,jrt->irt", A_field(pts), conj_dzbar)
            G = np.stack([cg.apply(u[i]) for i in range(n)])
            G_b = np.stack([cg.boundary_values(u[i]) for i in range(n)])
            G_0 = np.array([cg.center_value(u[i]) for i in range(n)])
        else:
            G = np.zeros_like(z)
            G_b = np.zeros((n, grid.n_theta), dtype=complex)
            G_0 = np.zeros(n, dtype=complex)
        y_b = z_b.imag.T                                   # [n_theta, n]
        h_b = edge_graph(y_b).T                            # [n, n_theta]
        z_new = np.empty_like(z)
        zb_new = np.empty_like(z_b)
        for j in range(n):
            psi = tf[j] * phi.samples + h_b[j] - G_b[j].real
            Spsi = schwarz(BoundaryFunction(psi), grid=grid)
            shift = 1j * (cf[j] - G_0[j].imag)
            z_new[j] = Spsi.values + shift + G[j]
            zb_new[j] = Spsi.boundary + shift + G_b[j]
        step = float(max(np.max(np.abs(z_new - z)), np.max(np.abs(zb_new - z_b))))
        z, z_b = z_new, zb_new
        steps.append(step)
        if step <= tol * 1e-1:
            break
        if len(steps) >= 2 and steps[-2] > 0 and steps[-1] > 10 * tol:
            if steps[-1] / steps[-2] >= 1.0:
                bad_streak += 1
                if bad_streak >= 3:
                    raise NoContraction("glued-family iteration stopped contracting; "
                                        "shrink the edge graph or the structure")
            else:
                bad_streak = 0
    else:
        raise MaxIterExceeded(f"glued family: no convergence in {max_iter} iterations")
    y_up = z_b.imag.T[upper]
    h_up = edge_graph(y_up).T
    boundary_residual = float(np.max(np.abs(z_b.real[:, upper] - h_up)))
    if boundary_residual > max(1e3 * tol, 1e-8):
        raise BoundaryMismatch(
            f"gluing condition stalled at {boundary_residual:.3e} on the upper arc")
    meta = {
        "family": "glued",
        "c": cf,
        "t": tf,
        "iterations": it,
        "step_history": steps,
        "boundary_residual": boundary_residual,
        "flat_distance": float(np.max(np.abs(z - flat.values))),
    }
    disc = DiscMap(grid, z, boundary=z_b, meta=meta)
    A_eff = A_field if A_field is not None else ComplexMatrixField.zero(n)
    disc.meta["interior_residual"] = holomorphy_residual(disc, A_eff, order=residual_order)
    return disc


class DiscFamily:
    """Family (c, t) -> disc glued to the edge along the upper half-circle.

    Wraps the flat or glued constructor with caching, the evaluation map,
    its inversion, and the foliation diagnostics.
    """

    def __init__(self, wedge, phi, grid, A_field=None, tol=1e-10):
        self.wedge = wedge
        self.phi = phi
        self.grid = grid
        self.A_field = A_field
        self.tol = tol
        self.n = wedge.n
        self._cache = {}
        self._S_eval = None
        self._is_flat = (wedge.edge_graph is None or wedge.edge_graph.is_zero()) \
            and A_field is None

    @classmethod
    def model(cls, n, grid, phi=None, delta=DEFAULT_DELTA):
        phi = phi if phi is not None else lower_arc_cutoff(grid.n_theta)
        return cls(WedgeDomain.standard(n, delta=delta), phi, grid)

    @property
    def is_flat(self):
        return self._is_flat

    def disc(self, c, t):
        key = (tuple(np.atleast_1d(c).tolist()), tuple(np.atleast_1d(t).tolist()))
        if key not in self._cache:
            if len(self._cache) > 192:
                self._cache.pop(next(iter(self._cache)))
            if self._is_flat:
                self._cache[key] = flat_family(c, t, self.phi, self.grid)
            else:
                self._cache[key] = glued_family(self.wedge.edge_graph, self.A_field,
                                                c, t, self.phi, self.grid, tol=self.tol)
        return self._cache[key]

    def evaluate(self, c, t, zeta):
        return self.disc(c, t).eval_at(np.asarray(zeta, dtype=complex))

    # -- flat closed-form inversion ---------------------------------------

    def _schwarz_eval(self):
        if self._S_eval is None:
            S = schwarz(self.phi, grid=self.grid)
            self._S_eval = (S.evaluator, schwarz_derivative(self.phi), S)
        return self._S_eval

    def _invert_schwarz(self, w1, newton_tol=1e-13, max_newton=60):
        """Solve S phi(zeta) = w1 for zeta in the disc (Newton + multistart)."""
        Seval, Sder, S = self._schwarz_eval()
        g = self.grid
        sub = (slice(None, None, max(1, g.n_r // 24)), slice(None, None, max(1, g.n_theta // 48)))
        cand_nodes = g.zeta[sub].ravel()
        cand_vals = S.values[sub].ravel()
        order = np.argsort(np.abs(cand_vals - w1))
        seeds = [cand_nodes[order[i]] for i in range(min(8, order.size))]
        best = None
        for seed in seeds:
            zeta = seed
            for _ in range(max_newton):
                f = Seval(np.array([zeta]))[0] - w1
                if abs(f) < newton_tol:
                    break
                d = Sder(np.array([zeta]))[0]
                if d == 0:
                    break
                step = f / d
                # damped update, kept inside the disc
                lam = 1.0
                for _ in range(30):
                    znew = zeta - lam * step
                    if abs(znew) < 1.0 and abs(Seval(np.array([znew]))[0] - w1) <= abs(f):
                        break
                    lam *= 0.5
                zeta = zeta - lam * step
                if abs(zeta) >= 1.0:
                    zeta = zeta / abs(zeta) * 0.999
            res = abs(Seval(np.array([zeta]))[0] - w1)
            if best is None or res < best[1]:
                best = (zeta, res)
        return best

    def _flat_inverse(self, w):
        w = np.asarray(w, dtype=complex)
        x = w.real
        t = x[1:] / x[0]
        zeta, res = self._invert_schwarz(w[0])
        Seval, _, _ = self._schwarz_eval()
        v = Seval(np.array([zeta]))[0].imag
        cf = w.imag - np.concatenate([[1.0], t]) * v
        return cf[1:], t, zeta, res

    def invert(self, w, tol=1e-8, max_newton=40):
        """Recover (c, t, zeta) with Ev(c, t, zeta) = w for w in W_delta.

        Seeded by the closed-form flat inverse; a damped Newton iteration
        (finite-difference Jacobian, multistart) refines the parameters for
        glued families.  Raises NotInWedge / InversionFailed.
        """
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        if not bool(np.all(self.wedge.contains_shrunk(w))) or not bool(np.all(self.wedge.contains(w))):
            raise NotInWedge(f"{w} is outside the shrunken wedge")
        c0, t0, zeta0, seed_res = self._flat_inverse(w)
        if self._is_flat:
            if seed_res > tol:
                raise InversionFailed(
                    f"flat inversion stalled at residual {seed_res:.3e}", best_residual=seed_res)
            return c0, t0, zeta0
        return self._newton_invert(w, c0, t0, zeta0, tol=tol, max_newton=max_newton)

    def _newton_invert(self, w, c0, t0, zeta0, tol, max_newton, multistart=8):
        def params_to_vec(c, t, zeta):
            return np.concatenate([c, np.log(t), [zeta.real, zeta.imag]])

        def vec_to_params(v):
            m = self.n - 1
            return v[:m], np.exp(v[m:2 * m]), complex(v[2 * m], v[2 * m + 1])

        def resid(v):
            c, t, zeta = vec_to_params(v)
            if abs(zeta) >= 1.0:
                zeta = zeta / abs(zeta) * 0.9999
            val = self.evaluate(c, t, np.array([zeta]))[:, 0]
            r = val - w
            return np.concatenate([r.real, r.imag])

        rng = np.random.default_rng(1234)
        best = (None, np.inf)
        starts = [params_to_vec(c0, t0, zeta0)]
        for _ in range(multistart - 1):
            dv = rng.normal(scale=0.02, size=2 * self.n)
            starts.append(starts[0] + dv)
        for v in starts:
            v = v.copy()
            r = resid(v)
            for _ in range(max_newton):
                nr = np.linalg.norm(r, np.inf)
                if nr < tol:
                    break
                J = np.empty((2 * self.n, 2 * self.n))
                h = 1e-7
                for i in range(2 * self.n):
                    vp = v.copy()
                    vp[i] += h
                    J[:, i] = (resid(vp) - r) / h
                try:
                    step = np.linalg.solve(J, r)
                except np.linalg.LinAlgError:
                    break
                lam = 1.0
                for _ in range(25):
                    r_new = resid(v - lam * step)
                    if np.linalg.norm(r_new, np.inf) < nr:
                        break
                    lam *= 0.5
                v = v - lam * step
                r = r_new
            nr = float(np.linalg.norm(resid(v), np.inf))
            if nr < best[1]:
                best = (v, nr)
            if nr < tol:
                c, t, zeta = vec_to_params(v)
                return c, t, zeta
        raise InversionFailed(
            f"evaluation-map inversion stalled at residual {best[1]:.3e}; "
            "the point may be outside the perturbative regime", best_residual=best[1])

    # -- boundary parametrization (edge side) ------------------------------

    def boundary_point(self, c, t, theta):
        """Boundary value z(c, t)(e^{i theta}) from the stored trace."""
        disc = self.disc(c, t)
        th = self.grid.theta
        vals = np.empty(self.n, dtype=complex)
        for j in range(self.n):
            re = np.interp(theta, th, disc.boundary[j].real, period=2 * np.pi)
            im = np.interp(theta, th, disc.boundary[j].imag, period=2 * np.pi)
            vals[j] = re + 1j * im
        return vals

    def edge_cover_defect(self, t, y_targets):
        """Max distance from edge targets (given by their y-coordinates) to
        the nearest upper-arc boundary image over the c-parameters."""
        Seval, _, S = self._schwarz_eval()
        g = self.grid
        upper = g.upper_arc_indices()
        tf = np.concatenate([[1.0], np.atleast_1d(np.asarray(t, dtype=float))])
        worst = 0.0
        details = []
        for y in np.atleast_2d(np.asarray(y_targets, dtype=float)):
            target = self.wedge.edge_point(y)
            if self._is_flat:
                theta, ok = _invert_trace(S.boundary.imag, g.theta, upper, y[0])
                if not ok:
                    worst = np.inf
                    details.append((y, np.inf))
                    continue
                v = np.interp(theta, g.theta, S.boundary.imag)
                c = y[1:] - tf[1:] * v
                pt = self.boundary_point(c, t, theta)
                d = float(np.max(np.abs(pt - target)))
            else:
                d = self._edge_newton(t, y, target)
            worst = max(worst, d)
            details.append((y, d))
        return worst, details

    def _edge_newton(self, t, y, target, tol=1e-9, max_iter=30):
        Seval, _, S = self._schwarz_eval()
        g = self.grid
        upper = g.upper_arc_indices()
        theta0, ok = _invert_trace(S.boundary.imag, g.theta, upper, y[0])
        if not ok:
            return np.inf
        tf = np.concatenate([[1.0], np.atleast_1d(np.asarray(t, dtype=float))])
        v0 = np.interp(theta0, g.theta, S.boundary.imag)
        params = np.concatenate([y[1:] - tf[1:] * v0, [theta0]])

        def r(p):
            pt = self.boundary_point(p[:-1], t, p[-1])
            return pt.imag - y

        val = r(params)
        for _ in range(max_iter):
            if np.linalg.norm(val, np.inf) < tol:
                break
            J = np.empty((self.n, self.n))
            h = 1e-6
            for i in range(self.n):
                pp = params.copy()
                pp[i] += h
                J[:, i] = (r(pp) - val) / h
            try:
                step = np.linalg.solve(J, val)
            except np.linalg.LinAlgError:
                break
            params = params - step
            val = r(params)
        pt = self.boundary_point(params[:-1], t, params[-1])
        return float(np.max(np.abs(pt - target)))

    # -- foliation diagnostics ---------------------------------------------

    def foliation_check(self, t_values, n_edge=40, n_cover=60, seed=0,
                        y1_fraction=0.5, depth_range=(0.2, 0.8)):
        """Report edge covering, sheet disjointness, and shrunken-wedge
        coverage defects for the sampled t-slices."""
        rng = np.random.default_rng(seed)
        Seval, _, S = self._schwarz_eval()
        g = self.grid
        upper = g.upper_arc_indices()
        vtrace = S.boundary.imag[upper]
        v_span = float(np.max(np.abs(vtrace)))
        y1_lim = y1_fraction * v_span
        report = {"t_values": [list(np.atleast_1d(t)) for t in t_values],
                  "y1_range": [-y1_lim, y1_lim]}

        y_targets = np.column_stack([
            rng.uniform(-y1_lim, y1_lim, size=n_edge),
            *[rng.uniform(-0.5, 0.5, size=n_edge) for _ in range(self.n - 1)]])
        cover = []
        for t in t_values:
            defect, _ = self.edge_cover_defect(t, y_targets)
            cover.append(defect)
        report["edge_cover_defect"] = max(cover)
        report["edge_cover_per_t"] = cover

        # sheet disjointness: min distance between distinct-t sheets on a
        # compact probe set away from the edge
        if len(t_values) >= 2:
            sep = np.inf
            for a in range(len(t_values)):
                for b in range(a + 1, len(t_values)):
                    sep = min(sep, self._sheet_separation(
                        t_values[a], t_values[b], rng, depth_range))
            report["sheet_separation"] = float(sep)
        else:
            report["sheet_separation"] = None

        # coverage of the shrunken wedge through inversion
        hits = 0
        worst_res = 0.0
        attempts = 0
        for _ in range(n_cover):
            c = rng.uniform(-0.3, 0.3, size=self.n - 1)
            t = np.exp(rng.uniform(np.log(0.5), np.log(2.0), size=self.n - 1))
            rr = rng.uniform(*depth_range)
            th = rng.uniform(0, 2 * np.pi)
            w = self.evaluate(c, t, np.array([rr * np.exp(1j * th)]))[:, 0]
            if not bool(np.all(self.wedge.contains_shrunk(w))):
                continue
            attempts += 1
            try:
                c2, t2, zeta2 = self.invert(w)
                res = float(np.max(np.abs(self.evaluate(c2, t2, np.array([zeta2]))[:, 0] - w)))
                worst_res = max(worst_res, res)
                hits += 1
            except (InversionFailed, NotInWedge):
                pass
        report["coverage_attempts"] = attempts
        report["coverage_success_fraction"] = hits / attempts if attempts else None
        report["coverage_worst_residual"] = worst_res
        return report

    def _sheet_separation(self, t1, t2, rng, depth_range, n_probe=40):
        t1f = np.concatenate([[1.0], np.atleast_1d(np.asarray(t1, dtype=float))])
        t2f = np.concatenate([[1.0], np.atleast_1d(np.asarray(t2, dtype=float))])
        sep = np.inf
        for _ in range(n_probe):
            c = rng.uniform(-0.3, 0.3, size=self.n - 1)
            rr = rng.uniform(*depth_range)
            th = rng.uniform(0, 2 * np.pi)
            w = self.evaluate(c, np.atleast_1d(t1), np.array([rr * np.exp(1j * th)]))[:, 0]
            if self._is_flat:
                # sheet_t2 = {x = s * t2f, y free}: closed-form x-distance
                x = w.real
                s = (x @ t2f) / (t2f @ t2f)
                s = min(s, 0.0)
                sep = min(sep, float(np.linalg.norm(x - s * t2f)))
            else:
                best = np.inf
                for _ in range(30):
                    c2 = rng.uniform(-0.3, 0.3, size=self.n - 1)
                    r2 = rng.uniform(0.05, 0.95)
                    th2 = rng.uniform(0, 2 * np.pi)
                    w2 = self.evaluate(c2, np.atleast_1d(t2),
                                       np.array([r2 * np.exp(1j * th2)]))[:, 0]
                    best = min(best, float(np.linalg.norm(w2 - w)))
                sep = min(sep, best)
        return sep


def _invert_trace(vtrace_full, theta_full, upper_idx, target):
    """Solve v(theta) = target on the upper arc by monotone interpolation
    of the trace samples; returns (theta, ok)."""
    th = theta_full[upper_idx]
    v = vtrace_full[upper_idx]
    lo, hi = float(np.min(v)), float(np.max(v))
    if not (lo <= target <= hi):
        return 0.0, False
    order = np.argsort(v)
    theta = float(np.interp(target, v[order], th[order]))
    return theta, True
