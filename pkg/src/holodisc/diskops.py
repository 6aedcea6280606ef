r"""Integral operators on the unit disc.

The grid is a tensor polar grid: equispaced angles (so angular integrals
are trapezoidal, i.e. spectrally exact per Fourier mode) and composite
Gauss-Legendre nodes in the radius, grouped in panels.  Area quadrature
weights are w_gl * r * (2 pi / n_theta), which reproduce the disc area
exactly.

The Cauchy-Green transform

    Tf(zeta) = (1/2 pi i) \int_D f(w) dw ^ dwbar / (w - zeta)
             = -(1/pi)    \int_D f(w) / (w - zeta) dA(w)

is evaluated mode by mode.  Writing f = sum_m g_m(r) e^{i m theta} and
zeta = s e^{i phi}, the angular integral collapses by residues to

    Tf = sum_{m >= 1} -2 e^{i(m-1)phi} \int_s^1 g_m(r) (s/r)^{m-1} dr
       + sum_{m <= 0}  2 e^{i(m-1)phi} \int_0^s g_m(r) (r/s)^{1-m} dr,

so T maps mode m to mode m-1 and the whole transform reduces to radial
integrals with power-ratio weights bounded by 1.  Those are computed
against the panel-local Lagrange interpolant of g_m; the power weight is
integrated on geometrically subdivided panels so that large exponents
(thin boundary layers) stay resolved.  This also evaluates Tf exactly at
grid nodes, with no singularity to exclude; only evaluation at exterior
points falls back to a direct kernel sum, which does require staying an
exclusion radius away from the nodes.

The Schwarz integral S phi reconstructs the holomorphic function with
boundary real part phi and Im S phi(0) = 0; with phi sampled on the
angular grid it is the one-sided Fourier series c_0 + 2 sum_{k>=1} c_k
zeta^k.
"""

import threading

import numpy as np

from .errors import BadCutoff, GridTooCoarse, SingularityTooClose

DEFAULT_GL_PER_PANEL = 8
_EFOLDS_PER_SUB = 4.0
_TAIL_EFOLDS = 45.0
_SUB_GL_NODES = 12


def _gauss_legendre01(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _barycentric_weights(nodes):
    nodes = np.asarray(nodes, dtype=float)
    w = np.ones_like(nodes)
    for l in range(nodes.size):
        diff = nodes[l] - np.delete(nodes, l)
        w[l] = 1.0 / np.prod(diff)
    return w


def _lagrange_rows(nodes, bary_w, x):
    """Matrix [len(x), p] of Lagrange basis values at points x."""
    x = np.asarray(x, dtype=float)
    d = x[:, None] - nodes[None, :]
    exact = d == 0.0
    hit = exact.any(axis=1)
    if np.any(hit):
        d = np.where(exact, 1.0, d)
    terms = bary_w[None, :] / d
    rows = terms / terms.sum(axis=1, keepdims=True)
    if np.any(hit):
        rows[hit] = exact[hit].astype(float)
    return rows


def _differentiation_matrix(nodes):
    """Derivative of the Lagrange interpolant, evaluated at the nodes."""
    nodes = np.asarray(nodes, dtype=float)
    p = nodes.size
    w = _barycentric_weights(nodes)
    D = np.empty((p, p))
    for i in range(p):
        for j in range(p):
            if i != j:
                D[i, j] = (w[j] / w[i]) / (nodes[i] - nodes[j])
        D[i, i] = 0.0
        D[i, i] = -np.sum(D[i, :])
    return D


class DiscGrid:
    """Polar grid on the unit disc with composite Gauss-Legendre radii.

    Nodes are r_j e^{i theta_k} with r_j strictly inside (0, 1) and
    theta_k = 2 pi k / n_theta.  Immutable after construction.
    """

    def __init__(self, n_r, n_theta, gl_per_panel=DEFAULT_GL_PER_PANEL):
        if n_r % gl_per_panel != 0:
            raise ValueError(f"n_r = {n_r} must be a multiple of {gl_per_panel}")
        if n_r < gl_per_panel or n_theta < 8:
            raise GridTooCoarse(f"grid {n_r} x {n_theta} below the supported minimum")
        self.n_r = int(n_r)
        self.n_theta = int(n_theta)
        self.gl_per_panel = int(gl_per_panel)
        self.n_panels = n_r // gl_per_panel

        xg, wg = _gauss_legendre01(gl_per_panel)
        width = 1.0 / self.n_panels
        self.panel_bounds = np.linspace(0.0, 1.0, self.n_panels + 1)
        radii = []
        rweights = []
        for i in range(self.n_panels):
            a = self.panel_bounds[i]
            radii.append(a + width * xg)
            rweights.append(width * wg)
        self.radii = np.concatenate(radii)
        self.radial_weights = np.concatenate(rweights)
        self.theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
        self.zeta = self.radii[:, None] * np.exp(1j * self.theta)[None, :]
        self.weights = (self.radial_weights * self.radii)[:, None] * np.full(
            n_theta, 2.0 * np.pi / n_theta)[None, :]
        self._bary = _barycentric_weights(xg)
        self._panel_ref_nodes = xg
        for arr in (self.radii, self.radial_weights, self.theta, self.zeta, self.weights):
            arr.setflags(write=False)
        self._lock = threading.Lock()
        self._cg = None
        self._fd_cache = {}
        self._panel_diff = None

    # -- structural helpers ------------------------------------------------

    @property
    def modes(self):
        """Angular Fourier modes in FFT index order."""
        return np.fft.fftfreq(self.n_theta, d=1.0 / self.n_theta).astype(int)

    def panel_of(self, s):
        idx = np.minimum((np.asarray(s, dtype=float) * self.n_panels).astype(int),
                         self.n_panels - 1)
        return idx

    def panel_nodes(self, i):
        p = self.gl_per_panel
        return self.radii[i * p:(i + 1) * p]

    def upper_arc_indices(self):
        """Angular indices with theta in the closed upper half-circle."""
        return np.where(self.theta <= np.pi + 1e-12)[0]

    def lower_arc_indices(self):
        return np.where(self.theta > np.pi + 1e-12)[0]

    def area_integral(self, values):
        return np.sum(self.weights * values)

    def lp_norm(self, values, p):
        return float(np.sum(self.weights * np.abs(values) ** p) ** (1.0 / p))

    # -- cached operators ----------------------------------------------------

    def cauchy_green_op(self):
        with self._lock:
            if self._cg is None:
                self._cg = _CauchyGreenOp(self)
            return self._cg

    def fd_weights(self, order):
        with self._lock:
            if order not in self._fd_cache:
                self._fd_cache[order] = _radial_fd_weights(self.radii, order)
            return self._fd_cache[order]

    def panel_diff_matrices(self):
        with self._lock:
            if self._panel_diff is None:
                p = self.gl_per_panel
                mats = np.empty((self.n_panels, p, p))
                for i in range(self.n_panels):
                    mats[i] = _differentiation_matrix(self.panel_nodes(i))
                self._panel_diff = mats
            return self._panel_diff


_GRID_CACHE = {}
_GRID_LOCK = threading.Lock()


def disc_grid(n_r=128, n_theta=256, gl_per_panel=DEFAULT_GL_PER_PANEL):
    """Memoized grid constructor; equal parameters share one instance."""
    key = (n_r, n_theta, gl_per_panel)
    with _GRID_LOCK:
        if key not in _GRID_CACHE:
            _GRID_CACHE[key] = DiscGrid(n_r, n_theta, gl_per_panel)
        return _GRID_CACHE[key]


class GridFunction:
    """Complex samples on a DiscGrid, with an optional boundary trace and
    an optional closed-form evaluator for off-grid points."""

    def __init__(self, grid, values, boundary=None, evaluator=None):
        self.grid = grid
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.n_r, grid.n_theta):
            raise ValueError(f"values shape {values.shape} != {(grid.n_r, grid.n_theta)}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function contains non-finite values")
        self.values = values
        self.values.setflags(write=False)
        self.boundary = None if boundary is None else np.asarray(boundary, dtype=complex)
        if self.boundary is not None:
            self.boundary.setflags(write=False)
        self.evaluator = evaluator

    @classmethod
    def from_callable(cls, grid, fn, with_boundary=False):
        values = fn(grid.zeta)
        boundary = fn(np.exp(1j * grid.theta)) if with_boundary else None
        return cls(grid, values, boundary=boundary, evaluator=fn)

    def eval_at(self, zeta):
        """Values at interior points, via the evaluator when present and
        per-mode panel interpolation otherwise."""
        zeta = np.asarray(zeta, dtype=complex)
        if self.evaluator is not None:
            return np.asarray(self.evaluator(zeta), dtype=complex)
        return _interp_modes(self.grid, self.values, zeta)


class BoundaryFunction:
    """Samples phi(e^{i theta_k}) on the angular grid."""

    def __init__(self, samples, is_real=True):
        samples = np.asarray(samples)
        self.is_real = bool(is_real)
        self.samples = samples.astype(float) if is_real else samples.astype(complex)
        self.samples.setflags(write=False)
        self.n_theta = samples.size

    @classmethod
    def from_callable(cls, fn, n_theta, is_real=True):
        theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
        return cls(np.asarray(fn(theta)), is_real=is_real)

    def check_cutoff(self, tol=1e-14):
        """Validate the lower-arc cutoff constraints: real valued, range in
        [-1, 0], identically zero on the closed upper half-circle and
        strictly negative on the open lower half-circle."""
        if not self.is_real:
            raise BadCutoff("cutoff must be real-valued")
        theta = 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta
        v = self.samples
        if np.any(v > tol) or np.any(v < -1.0 - tol):
            raise BadCutoff("cutoff range must stay within [-1, 0]")
        upper = theta <= np.pi + 1e-12
        if np.any(np.abs(v[upper]) > tol):
            raise BadCutoff("cutoff must vanish on the closed upper half-circle")
        if np.any(v[~upper] >= 0.0):
            raise BadCutoff("cutoff must be strictly negative on the open lower half-circle")
        return self


def lower_arc_cutoff(n_theta, power=6):
    """Built-in cutoff: zero on the closed upper half-circle, a polynomial
    bump -(((theta-pi)(2pi-theta)) / (pi^2/4))^power on the lower one.

    The matching at theta = pi, 2pi is C^{power-1}; power >= 3 satisfies the
    C^2 requirement, the default keeps Fourier tails far below the
    tolerances used by the disc families.
    """
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    vals = np.zeros(n_theta)
    lower = theta > np.pi
    t = theta[lower]
    vals[lower] = -(((t - np.pi) * (2.0 * np.pi - t)) / (np.pi ** 2 / 4.0)) ** power
    return BoundaryFunction(vals, is_real=True).check_cutoff()


# -- anchored radial integrals -------------------------------------------------

_sub_x, _sub_w = _gauss_legendre01(_SUB_GL_NODES)


def _geometric_splits(a, b, q, reverse=False):
    """Subdivision of [a, b] so the weight ( . )^q varies by at most
    _EFOLDS_PER_SUB per piece; pieces beyond _TAIL_EFOLDS total decay are
    dropped.  With reverse=True the decay runs right-to-left."""
    if q <= 0:
        return [(a, b)]
    if a <= 0.0:
        # only meaningful for right-anchored decay; truncate near zero
        a = b * np.exp(-_TAIL_EFOLDS / q)
    total = q * np.log(b / a)
    if total <= _EFOLDS_PER_SUB:
        return [(a, b)]
    n_sub = int(np.ceil(min(total, _TAIL_EFOLDS) / _EFOLDS_PER_SUB))
    step = min(total, _TAIL_EFOLDS) / n_sub
    if not reverse:
        pts = a * np.exp(step * np.arange(n_sub + 1) / q)
        if total <= _TAIL_EFOLDS:
            pts[-1] = b
    else:
        pts = b * np.exp(-step * np.arange(n_sub, -1, -1) / q)
        if total <= _TAIL_EFOLDS:
            pts[0] = a
    return list(zip(pts[:-1], pts[1:]))


def _anchored_row(panel_nodes, bary_w, lo, hi, q, side):
    """Row vector R with  R . g = int_lo^hi interp(g)(r) * weight(r) dr,
    weight = (lo/r)^q for side='left', (r/hi)^q for side='right'."""
    if hi <= lo:
        return np.zeros(panel_nodes.size)
    if side == "left":
        pieces = _geometric_splits(lo, hi, q, reverse=False)
    else:
        pieces = _geometric_splits(lo, hi, q, reverse=True)
    a = np.array([pc[0] for pc in pieces])
    b = np.array([pc[1] for pc in pieces])
    x = (a[:, None] + (b - a)[:, None] * _sub_x[None, :]).ravel()
    w = ((b - a)[:, None] * _sub_w[None, :]).ravel()
    if q == 0:
        wt = np.ones_like(x)
    elif side == "left":
        wt = np.exp(q * (np.log(lo) - np.log(x)))
    else:
        wt = np.exp(q * (np.log(x) - np.log(hi)))
    rows = _lagrange_rows(panel_nodes, bary_w, x)
    return (w * wt) @ rows


class _CauchyGreenOp:
    """Precomputed per-mode radial tensors for one grid."""

    def __init__(self, grid):
        self.grid = grid
        P, p = grid.n_panels, grid.gl_per_panel
        modes = grid.modes
        M = modes.size
        bounds = grid.panel_bounds
        self.modes = modes
        self.plus = modes >= 1          # contributes -2 e^{i(m-1)phi} J+
        self.minus = ~self.plus         # contributes +2 e^{i(m-1)phi} J-
        phi_full = np.zeros((M, P, p))
        pev = np.zeros((M, P, p, p))
        rat_bound = np.zeros((M, P))
        rat_eval = np.zeros((M, P, p))
        panel_bw = [_barycentric_weights(grid.panel_nodes(i)) for i in range(P)]
        for k, m in enumerate(modes):
            if m >= 1:
                q, side = m - 1, "left"
            else:
                q, side = 1 - m, "right"
            for i in range(P):
                a, b = bounds[i], bounds[i + 1]
                nodes = grid.panel_nodes(i)
                bw = panel_bw[i]
                if side == "left":
                    if i == 0 and q >= 1:
                        phi_full[k, i] = 0.0  # (0/r)^q vanishes
                    else:
                        phi_full[k, i] = _anchored_row(nodes, bw, a, b, q, "left")
                    rat_bound[k, i] = (a / b) ** q if (a > 0 or q == 0) else 0.0
                    for j in range(p):
                        s = nodes[j]
                        pev[k, i, j] = _anchored_row(nodes, bw, s, b, q, "left")
                        rat_eval[k, i, j] = (s / b) ** q
                else:
                    phi_full[k, i] = _anchored_row(nodes, bw, a, b, q, "right")
                    rat_bound[k, i] = (a / b) ** q if a > 0 else 0.0
                    for j in range(p):
                        s = nodes[j]
                        pev[k, i, j] = _anchored_row(nodes, bw, a, s, q, "right")
                        rat_eval[k, i, j] = (a / s) ** q if a > 0 else 0.0
        self.phi_full = phi_full
        self.pev = pev
        self.rat_bound = rat_bound
        self.rat_eval = rat_eval

    def mode_coefficients(self, values):
        """Radial mode samples g_m(r_j), grouped by panel: [M, P, p]."""
        grid = self.grid
        ghat = np.fft.fft(values, axis=1) / grid.n_theta    # [n_r, M]
        G = ghat.reshape(grid.n_panels, grid.gl_per_panel, grid.n_theta)
        return np.moveaxis(G, 2, 0)

    def accumulators(self, G):
        """Panel-boundary accumulators for every mode: tail integrals
        R[k, i] beyond rho_i (plus modes) and mass S[k, i] below rho_i
        (minus modes)."""
        M, P, p = G.shape
        panel_int = np.einsum("mij,mij->mi", self.phi_full, G)
        R = np.zeros((M, P + 1), dtype=complex)
        for i in range(P - 1, -1, -1):
            R[:, i] = panel_int[:, i] + self.rat_bound[:, i] * R[:, i + 1]
        S = np.zeros((M, P + 1), dtype=complex)
        for i in range(P):
            S[:, i + 1] = self.rat_bound[:, i] * S[:, i] + panel_int[:, i]
        return R, S

    def apply(self, values):
        """Tf at every grid node."""
        grid = self.grid
        G = self.mode_coefficients(values)
        R, S = self.accumulators(G)
        local = np.einsum("mijl,mil->mij", self.pev, G)
        tail = np.where(self.plus[:, None, None],
                        R[:, 1:, None] * self.rat_eval,
                        S[:, :-1, None] * self.rat_eval)
        J = local + tail
        coef = np.where(self.plus, -2.0, 2.0)[:, None, None]
        out_loc = coef * J                                   # [M, P, p]
        out_modes = np.zeros((grid.n_theta, grid.n_r), dtype=complex)
        modes = self.modes
        n = grid.n_theta
        idx_of = {int(m): k for k, m in enumerate(modes)}
        flat = out_loc.reshape(modes.size, grid.n_r)
        for k, m in enumerate(modes):
            tgt = int(m) - 1
            if tgt in idx_of:
                out_modes[idx_of[tgt]] += flat[k]
        vals = np.fft.ifft(out_modes * n, axis=0).T
        return vals

    def eval_interior(self, values, zeta):
        """Tf at arbitrary strictly interior points."""
        grid = self.grid
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.ravel()
        G = self.mode_coefficients(values)
        R, S = self.accumulators(G)
        bounds = grid.panel_bounds
        p = grid.gl_per_panel
        out = np.empty(flat.size, dtype=complex)
        for ipt, z in enumerate(flat):
            s = abs(z)
            phi = np.angle(z) if s > 0 else 0.0
            i = min(int(s * grid.n_panels), grid.n_panels - 1)
            a, b = bounds[i], bounds[i + 1]
            nodes = grid.panel_nodes(i)
            bw = _barycentric_weights(nodes)
            total = 0.0 + 0.0j
            for k, m in enumerate(self.modes):
                if m >= 1:
                    q = m - 1
                    if s == 0.0:
                        J = R[k, 0] if q == 0 else 0.0
                    else:
                        row = _anchored_row(nodes, bw, s, b, q, "left")
                        J = row @ G[k, i] + ((s / b) ** q) * R[k, i + 1]
                    total += -2.0 * np.exp(1j * (m - 1) * phi) * J
                else:
                    q = 1 - m
                    if s == 0.0:
                        continue
                    row = _anchored_row(nodes, bw, a, s, q, "right")
                    J = row @ G[k, i] + ((a / s) ** q if a > 0 else 0.0) * S[k, i]
                    total += 2.0 * np.exp(1j * (m - 1) * phi) * J
            out[ipt] = total
        return out.reshape(zeta.shape)

    def boundary_values(self, values):
        """Tf on the unit circle: the outward integrals vanish at s = 1, so
        only modes m <= 0 contribute, through their full-disc mass."""
        grid = self.grid
        G = self.mode_coefficients(values)
        _, S = self.accumulators(G)
        n = grid.n_theta
        out_modes = np.zeros(n, dtype=complex)
        idx_of = {int(m): k for k, m in enumerate(self.modes)}
        for k, m in enumerate(self.modes):
            if m >= 1:
                continue
            tgt = int(m) - 1
            if tgt in idx_of:
                out_modes[idx_of[tgt]] += 2.0 * S[k, -1]
        return np.fft.ifft(out_modes * n)

    def center_value(self, values):
        """Tf(0) = -2 int_0^1 g_1(r) dr."""
        grid = self.grid
        ghat = np.fft.fft(values, axis=1) / grid.n_theta
        return -2.0 * np.sum(grid.radial_weights * ghat[:, 1 % grid.n_theta])

    def center_derivative(self, values):
        """d(Tf)/dzeta at 0 = -2 int_0^1 g_2(r) / r dr."""
        grid = self.grid
        ghat = np.fft.fft(values, axis=1) / grid.n_theta
        if grid.n_theta <= 2:
            return 0.0 + 0.0j
        return -2.0 * np.sum(grid.radial_weights * ghat[:, 2] / grid.radii)


def cauchy_green(f, eval_points=None, exclusion_radius=None):
    """Cauchy-Green transform of a grid function.

    With ``eval_points=None`` the transform is returned on the grid (as a
    GridFunction).  Otherwise values at the given complex points are
    returned: interior points use the semi-analytic mode expansion (no
    exclusion needed -- the local correction is built in); points on or
    outside the closed disc use a direct kernel sum and must stay at least
    ``exclusion_radius`` (default: one radial cell) away from the nodes.
    """
    grid = f.grid
    op = grid.cauchy_green_op()
    if eval_points is None:
        return GridFunction(grid, op.apply(f.values))
    pts = np.asarray(eval_points, dtype=complex)
    flat = pts.ravel()
    out = np.empty(flat.size, dtype=complex)
    inside = np.abs(flat) < 1.0
    if np.any(inside):
        out[inside] = op.eval_interior(f.values, flat[inside]).ravel()
    if np.any(~inside):
        excl = (1.0 / grid.n_panels) if exclusion_radius is None else float(exclusion_radius)
        nodes = grid.zeta.ravel()
        w = grid.weights.ravel()
        fv = f.values.ravel()
        for idx in np.where(~inside)[0]:
            z = flat[idx]
            d = np.abs(nodes - z)
            if d.min() < excl:
                raise SingularityTooClose(
                    f"evaluation point {z} is within {excl:.3g} of a grid node")
            out[idx] = -np.sum(w * fv / (nodes - z)) / np.pi
    return out.reshape(pts.shape)


# -- Schwarz integral ----------------------------------------------------------

def schwarz_coefficients(phi):
    """One-sided series coefficients C_k with S phi = sum_k C_k zeta^k."""
    n = phi.n_theta
    c = np.fft.fft(np.asarray(phi.samples, dtype=complex)) / n
    C = np.zeros(n, dtype=complex)
    C[0] = c[0]
    C[1:n // 2] = 2.0 * c[1:n // 2]
    return C[:n // 2]


def schwarz(phi, grid=None, eval_points=None):
    """Schwarz integral of a real boundary function.

    Returns a GridFunction when a grid is given (with an exact-real-part
    boundary trace: Re of the trace is phi itself), or point values when
    ``eval_points`` is given.  S phi is holomorphic in the disc, its real
    part extends phi, and Im S phi(0) = 0.
    """
    C = schwarz_coefficients(phi)
    K = C.size

    def series(z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, C[-1], dtype=complex)
        for k in range(K - 2, -1, -1):
            out = out * z + C[k]
        return out

    if eval_points is not None:
        return series(np.asarray(eval_points, dtype=complex))
    if grid is None:
        raise ValueError("either grid or eval_points is required")
    if grid.n_theta != phi.n_theta:
        raise ValueError("boundary function and grid have different angular sizes")
    n = grid.n_theta
    spec = np.zeros((grid.n_r, n), dtype=complex)
    powers = grid.radii[:, None] ** np.arange(K)[None, :]
    spec[:, :K] = C[None, :] * powers
    values = np.fft.ifft(spec * n, axis=1)
    bspec = np.zeros(n, dtype=complex)
    bspec[:K] = C
    btrace = np.fft.ifft(bspec * n)
    boundary = phi.samples + 1j * btrace.imag
    return GridFunction(grid, values, boundary=boundary, evaluator=series)


def schwarz_derivative(phi):
    """Callable zeta -> (S phi)'(zeta)."""
    C = schwarz_coefficients(phi)
    D = C[1:] * np.arange(1, C.size)

    def deriv(z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, D[-1], dtype=complex)
        for k in range(D.size - 2, -1, -1):
            out = out * z + D[k]
        return out

    return deriv


# -- finite differences ---------------------------------------------------------

_ANGULAR_STENCILS = {
    2: np.array([-0.5, 0.0, 0.5]),
    4: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    6: np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0,
}


def _radial_fd_weights(radii, order):
    """Local polynomial differentiation weights on the nonuniform radii.

    Returns (offsets [n_r], weights [n_r, order+1]): node i uses the window
    starting at offsets[i].
    """
    n = radii.size
    k = order + 1
    offsets = np.empty(n, dtype=int)
    weights = np.empty((n, k))
    for i in range(n):
        lo = min(max(i - order // 2, 0), n - k)
        offsets[i] = lo
        nodes = radii[lo:lo + k]
        # derivative of the Lagrange basis at radii[i]
        x = radii[i]
        bw = _barycentric_weights(nodes)
        row = np.zeros(k)
        j_eq = np.where(np.isclose(nodes, x))[0]
        if j_eq.size:
            j0 = j_eq[0]
            for j in range(k):
                if j != j0:
                    row[j] = (bw[j] / bw[j0]) / (x - nodes[j])
            row[j0] = -np.sum(row)
        else:
            terms = bw / (x - nodes)
            s = terms.sum()
            ell = terms / s
            dsum = np.sum(bw / (x - nodes) ** 2)
            for j in range(k):
                row[j] = ell[j] * (dsum / s - 1.0 / (x - nodes[j]))
            # generic formula l_j'(x) for x off the nodes
        weights[i] = row
    return offsets, weights


def dbar_fd(u, order=2):
    """Finite-difference d/dzetabar of a grid function.

    Central angular stencils and local polynomial radial stencils of the
    given order (2, 4 or 6); second-order accurate at the default.  Exact
    on polynomials in zeta, zetabar whose radial degree and angular mode
    fit inside the stencils' exactness range.
    """
    if order not in _ANGULAR_STENCILS:
        raise ValueError(f"unsupported stencil order {order}")
    grid = u.grid
    if grid.n_r < order + 2 or grid.n_theta < 2 * order + 2:
        raise GridTooCoarse(
            f"grid {grid.n_r} x {grid.n_theta} below the order-{order} stencil minimum")
    vals = u.values
    sten = _ANGULAR_STENCILS[order]
    half = order // 2
    du_dtheta = np.zeros_like(vals)
    for s, c in zip(range(-half, half + 1), sten):
        if c != 0.0:
            du_dtheta += c * np.roll(vals, -s, axis=1)
    du_dtheta /= (2.0 * np.pi / grid.n_theta)
    offsets, weights = grid.fd_weights(order)
    k = order + 1
    du_dr = np.zeros_like(vals)
    for j in range(k):
        du_dr += weights[:, j][:, None] * vals[offsets + j, :]
    phase = np.exp(1j * grid.theta)[None, :]
    out = 0.5 * phase * (du_dr + 1j * du_dtheta / grid.radii[:, None])
    return GridFunction(grid, out)


def dbar_spectral(u_values, grid):
    """Solver-grade d/dzetabar: exact per angular mode, panel-local
    polynomial differentiation in the radius."""
    uhat = np.fft.fft(u_values, axis=1)                     # [n_r, M]
    P, p = grid.n_panels, grid.gl_per_panel
    D = grid.panel_diff_matrices()
    U = uhat.reshape(P, p, grid.n_theta)
    dU = np.einsum("ijk,ikm->ijm", D, U).reshape(grid.n_r, grid.n_theta)
    m = grid.modes[None, :]
    h = dU - (m / grid.radii[:, None]) * uhat
    # u_zbar = (e^{i theta}/2)(u_r + i u_theta / r): mode m shifts to m+1
    out_modes = np.zeros_like(h)
    idx_of = {int(mm): k for k, mm in enumerate(grid.modes)}
    for k, mm in enumerate(grid.modes):
        tgt = int(mm) + 1
        if tgt in idx_of:
            out_modes[:, idx_of[tgt]] += 0.5 * h[:, k]
    return np.fft.ifft(out_modes, axis=1)


def _interp_modes(grid, values, zeta):
    """Interpolate grid samples at interior points: FFT in the angle,
    panel-local barycentric interpolation in the radius."""
    zeta = np.asarray(zeta, dtype=complex)
    flat = zeta.ravel()
    uhat = np.fft.fft(values, axis=1) / grid.n_theta        # [n_r, M]
    P, p = grid.n_panels, grid.gl_per_panel
    U = uhat.reshape(P, p, grid.n_theta)
    out = np.empty(flat.size, dtype=complex)
    modes = grid.modes
    for ipt, z in enumerate(flat):
        s = abs(z)
        if s >= 1.0 + 1e-12:
            raise ValueError(f"interpolation point {z} is outside the closed disc")
        phi = np.angle(z) if s > 0 else 0.0
        i = min(int(s * grid.n_panels), grid.n_panels - 1)
        nodes = grid.panel_nodes(i)
        bw = _barycentric_weights(nodes)
        row = _lagrange_rows(nodes, bw, np.array([s]))[0]
        mode_vals = row @ U[i]                               # [M]
        out[ipt] = np.sum(mode_vals * np.exp(1j * modes * phi))
    return out.reshape(zeta.shape)
