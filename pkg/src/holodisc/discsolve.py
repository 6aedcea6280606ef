r"""Fixed-point construction of pseudoholomorphic discs.

A disc z : D -> C^n is holomorphic for the structure with complex matrix A
when z_zetabar = A(z) conj(z)_zetabar.  Seeding with a holomorphic vector
function h, the Picard iteration

    z  <-  h + T( A(z) conj(z)_zetabar )

contracts whenever A is small on the range of the iterates (the map
z -> z - T A(z) conj(z)_zetabar is then a small deformation of the
identity), and its fixed point solves the equation with seed h.

The iteration differentiates the current iterate with the solver-grade
spectral rule; the reported residual is measured independently with the
finite-difference operator (see :func:`holomorphy_residual`).
"""

import numpy as np

from .diskops import GridFunction, cauchy_green, dbar_fd, dbar_spectral
from .errors import DirectionLost, GridTooCoarse, MaxIterExceeded, NoContraction

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 60


class HolomorphicSeed:
    """Vector of holomorphic functions of zeta, given by polynomial
    coefficients (index = power of zeta)."""

    def __init__(self, coefficient_lists):
        self.coeffs = [np.asarray(c, dtype=complex) for c in coefficient_lists]
        self.n = len(self.coeffs)

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        out = np.empty((self.n,) + zeta.shape, dtype=complex)
        for i, c in enumerate(self.coeffs):
            acc = np.full(zeta.shape, c[-1], dtype=complex)
            for k in range(c.size - 2, -1, -1):
                acc = acc * zeta + c[k]
            out[i] = acc
        return out

    def value_at_zero(self):
        return np.array([c[0] for c in self.coeffs])

    def derivative_at_zero(self):
        return np.array([c[1] if c.size > 1 else 0.0 for c in self.coeffs])

    @classmethod
    def linear(cls, p, v):
        """h(zeta) = p + zeta v."""
        p = np.atleast_1d(np.asarray(p, dtype=complex))
        v = np.atleast_1d(np.asarray(v, dtype=complex))
        return cls([np.array([p[i], v[i]]) for i in range(p.size)])

    @classmethod
    def coordinate(cls, n=1):
        """h(zeta) = (zeta, 0, ..., 0)."""
        rows = [np.array([0.0, 1.0])] + [np.array([0.0]) for _ in range(n - 1)]
        return cls(rows)

    def dbar_floor(self, grid, order=6):
        """Sup of the finite-difference dbar residual over the components."""
        worst = 0.0
        for i in range(self.n):
            u = GridFunction(grid, self(grid.zeta)[i])
            worst = max(worst, float(np.max(np.abs(dbar_fd(u, order=order).values))))
        return worst


class DiscMap:
    """Sampled disc D -> C^n with solver metadata."""

    def __init__(self, grid, values, boundary=None, meta=None, evaluators=None):
        self.grid = grid
        values = np.asarray(values, dtype=complex)
        if values.ndim == 2:
            values = values[None, :, :]
        self.n = values.shape[0]
        if values.shape[1:] != (grid.n_r, grid.n_theta):
            raise ValueError(f"disc values shape {values.shape} does not match the grid")
        self.values = values
        self.values.setflags(write=False)
        self.boundary = None if boundary is None else np.asarray(boundary, dtype=complex)
        if self.boundary is not None:
            self.boundary.setflags(write=False)
        self.meta = dict(meta or {})
        self.evaluators = evaluators  # optional closed forms per component

    def component(self, i):
        return GridFunction(self.grid, self.values[i],
                            boundary=None if self.boundary is None else self.boundary[i],
                            evaluator=None if self.evaluators is None else self.evaluators[i])

    def eval_at(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        out = np.empty((self.n,) + zeta.shape, dtype=complex)
        for i in range(self.n):
            out[i] = self.component(i).eval_at(zeta)
        return out

    def boundary_jump(self):
        """Largest jump between adjacent boundary samples (continuity proxy)."""
        if self.boundary is None:
            return None
        return float(np.max(np.abs(np.diff(
            np.concatenate([self.boundary, self.boundary[:, :1]], axis=1), axis=1))))


def _structure_term(A_field, z_values, conj_dzbar):
    """A(z(zeta)) conj(z)_zetabar at every node: [n, n_r, n_theta]."""
    pts = np.moveaxis(z_values, 0, -1)           # [n_r, n_theta, n]
    A = A_field(pts)                             # [n_r, n_theta, n, n]
    return np.einsum("rtij,jrt->irt", A, conj_dzbar)


def solve_disc(A_field, seed, grid, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
               deriv="spectral"):
    """Disc with  z_zetabar = A(z) conj(z)_zetabar  and seed image
    z - T A(z) conj(z)_zetabar = h.

    Raises NoContraction when the Picard step ratio stays >= 1 for three
    consecutive iterations (renormalize coordinates to shrink A first) and
    MaxIterExceeded when the budget runs out.
    """
    n = seed.n
    if A_field.n != n:
        raise ValueError("structure dimension does not match the seed")
    cg = grid.cauchy_green_op()
    h_vals = seed(grid.zeta)
    z = h_vals.copy()
    steps = []
    ratios = []
    bad_streak = 0
    u_final = np.zeros_like(z)
    scale = max(1.0, float(np.max(np.abs(h_vals))))
    for it in range(1, max_iter + 1):
        conj_dzbar = np.empty_like(z)
        for i in range(n):
            if deriv == "spectral":
                conj_dzbar[i] = dbar_spectral(np.conj(z[i]), grid)
            else:
                conj_dzbar[i] = dbar_fd(GridFunction(grid, np.conj(z[i]))).values
        u = _structure_term(A_field, z, conj_dzbar)
        z_new = np.empty_like(z)
        for i in range(n):
            z_new[i] = h_vals[i] + cg.apply(u[i])
        step = float(np.max(np.abs(z_new - z)))
        z = z_new
        u_final = u
        steps.append(step)
        if len(steps) >= 2 and steps[-2] > 0:
            r = steps[-1] / steps[-2]
            ratios.append(r)
            bad_streak = bad_streak + 1 if r >= 1.0 else 0
            if bad_streak >= 3:
                raise NoContraction(
                    f"Picard step ratio >= 1 for 3 consecutive iterations (last {r:.3f}); "
                    "the structure is too large on this range")
        if step <= max(1e-2 * tol, 5e-15 * scale):
            break
    else:
        raise MaxIterExceeded(f"no convergence after {max_iter} Picard iterations "
                              f"(last step {steps[-1]:.3e})")
    contraction = float(np.exp(np.mean(np.log(ratios)))) if ratios else 0.0
    meta = {
        "iterations": it,
        "final_step": steps[-1],
        "contraction_ratio": contraction,
        "step_history": steps,
        "seed_center": seed.value_at_zero(),
        "center_value": seed.value_at_zero() + np.array(
            [cg.center_value(u_final[i]) for i in range(n)]),
        "center_derivative": seed.derivative_at_zero() + np.array(
            [cg.center_derivative(u_final[i]) for i in range(n)]),
    }
    circle = np.exp(1j * grid.theta)
    boundary = seed(circle) + np.stack([cg.boundary_values(u_final[i]) for i in range(n)])
    disc = DiscMap(grid, z, boundary=boundary, meta=meta)
    resid = holomorphy_residual(disc, A_field)
    disc.meta["residual"] = resid
    disc.meta["solved"] = bool(resid <= tol)
    return disc


def holomorphy_residual(disc, A_field, order=6):
    """Sup over nodes of |z_zetabar - A(z) conj(z)_zetabar| (vector max
    norm), with both derivatives taken by finite differences.

    This check is independent of the solver's spectral differentiation.
    """
    grid = disc.grid
    if grid.n_r < order + 2 or grid.n_theta < 2 * order + 2:
        raise GridTooCoarse(f"grid {grid.n_r} x {grid.n_theta} too coarse for the residual stencil")
    n = disc.n
    dz = np.empty_like(disc.values)
    dzc = np.empty_like(disc.values)
    for i in range(n):
        dz[i] = dbar_fd(GridFunction(grid, disc.values[i]), order=order).values
        dzc[i] = dbar_fd(GridFunction(grid, np.conj(disc.values[i])), order=order).values
    res = dz - _structure_term(A_field, disc.values, dzc)
    return float(np.max(np.max(np.abs(res), axis=0)))


def disc_through(A_field, p, v, grid, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                 center_tol=1e-10, max_reseed=20):
    """Disc through the point p with center derivative parallel to v.

    Solves with the affine seed h = p + zeta v, then re-seeds: the seed
    constant absorbs the center drift and the seed direction absorbs the
    component of z'(0) orthogonal to v.  Raises DirectionLost when the
    correction loop stalls.
    """
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if np.max(np.abs(v)) == 0.0:
        raise ValueError("direction v must be nonzero")
    if max_reseed < 1:
        raise ValueError("max_reseed must be at least 1")
    a = p.copy()
    b = v.copy()
    vv = np.vdot(v, v)
    for attempt in range(1, max_reseed + 1):
        disc = solve_disc(A_field, HolomorphicSeed.linear(a, b), grid,
                          tol=tol, max_iter=max_iter)
        c0 = disc.meta["center_value"]
        d0 = disc.meta["center_derivative"]
        kappa = np.vdot(v, d0) / vv
        orth = d0 - kappa * v
        center_err = float(np.max(np.abs(c0 - p)))
        dir_err = float(np.max(np.abs(orth)) / max(np.max(np.abs(d0)), 1e-300))
        if center_err <= center_tol and dir_err <= tol:
            disc.meta["reseed_attempts"] = attempt
            disc.meta["center_error"] = center_err
            disc.meta["direction_error"] = dir_err
            return disc
        a = a + (p - c0)
        b = b - orth
    raise DirectionLost(
        f"center/tangent correction did not converge in {max_reseed} re-seedings "
        f"(center error {center_err:.2e}, direction error {dir_err:.2e})")
