"""Almost-complex calculus in local coordinates.

Points of R^{2n} are identified with C^n through the interleaved packing
(x_1, y_1, ..., x_n, y_n) <-> (z_1, ..., z_n), z_j = x_j + i y_j.  The
standard structure J_st acts blockwise by [[0, -1], [1, 0]] on each
(x_j, y_j) pair, i.e. as multiplication by i.

A structure tensor J (a field of real 2n x 2n matrices with J^2 = -Id) is
encoded in these coordinates by its complex matrix A(z): the real-linear map
L = (J_st + J)^{-1} (J_st - J) is conjugate-linear exactly when J^2 = -Id,
so it is represented by an n x n complex matrix through L v = A conj(v).
A = 0 at a point iff J agrees with J_st there.

Scalar functions F are C^1 maps C^n -> C.  Their (0,1) part with respect to
a structure with complex matrix A is expanded in the basis

    alpha = dz - A dzbar,      alphabar = dzbar - conj(A) dz,

with coefficient row vector (F_zbar (I - conj(A) A)^{-1}
+ F_z (I - A conj(A))^{-1} A).  These coefficients vanish simultaneously
with the simpler residual row F_zbar + F_z A, which is the quantity the
other modules consume.
"""

import numpy as np

from .errors import (
    GradientUnavailable,
    NormTooLarge,
    NotAlmostComplex,
    SingularStructure,
    SingularTransform,
)

DEFAULT_STRUCTURE_TOL = 1e-10
DEFAULT_FD_STEP = 1e-6

# Recommended working bound on ||A|| before renormalizing coordinates at the
# point of interest: the machinery needs ||A|| < 1, and contraction margins
# degrade well before that.  0.5 is a practical default, not a sharp value.
DEFAULT_WORKING_BOUND = 0.5

_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def standard_structure(n):
    """Block-diagonal matrix of J_st on R^{2n}."""
    J = np.zeros((2 * n, 2 * n))
    for j in range(n):
        J[2 * j:2 * j + 2, 2 * j:2 * j + 2] = _J2
    return J


def complex_to_real(z):
    """Pack (..., n) complex into (..., 2n) real interleaved coordinates."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def real_to_complex(x):
    """Inverse of :func:`complex_to_real`."""
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def real_linear_parts(M):
    """Split a real-linear map of R^{2n} into complex-linear and
    conjugate-linear parts.

    Returns complex n x n matrices (P, Q) with  M v = P v + Q conj(v)
    for every v in C^n.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    Jst = standard_structure(n)
    lin = 0.5 * (M - Jst @ M @ Jst)   # commutes with J_st
    conj = 0.5 * (M + Jst @ M @ Jst)  # anti-commutes with J_st
    basis = np.eye(n, dtype=complex)
    P = np.empty((n, n), dtype=complex)
    Q = np.empty((n, n), dtype=complex)
    for j in range(n):
        e = complex_to_real(basis[j])
        P[:, j] = real_to_complex(lin @ e)
        Q[:, j] = real_to_complex(conj @ e)
    return P, Q


def conjugate_linear_matrix(A):
    """Real 2n x 2n representation of v -> A conj(v)."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    L = np.empty((2 * n, 2 * n))
    basis = np.eye(n, dtype=complex)
    for j in range(n):
        L[:, 2 * j] = complex_to_real(A @ basis[j])
        L[:, 2 * j + 1] = complex_to_real(A @ (-1j * basis[j]))
    return L


class StructureTensorField:
    """Field of real 2n x 2n matrices J(z) with J(z)^2 = -Id.

    ``matrix_fn`` maps a real point of shape (2n,) to the matrix.  The field
    is immutable and safe to share between threads.
    """

    def __init__(self, n, matrix_fn, normalized_at_origin=False, name="structure"):
        self.n = int(n)
        self._fn = matrix_fn
        self.normalized_at_origin = bool(normalized_at_origin)
        self.name = name

    def __call__(self, point):
        point = np.asarray(point, dtype=float)
        J = np.asarray(self._fn(point), dtype=float)
        if J.shape != (2 * self.n, 2 * self.n):
            raise ValueError(f"structure matrix has shape {J.shape}, expected {(2*self.n, 2*self.n)}")
        return J

    def check_square(self, point, tol=DEFAULT_STRUCTURE_TOL):
        """Raise NotAlmostComplex unless J(point)^2 = -Id within tol."""
        J = self(point)
        defect = np.linalg.norm(J @ J + np.eye(2 * self.n), ord=2)
        if defect > tol:
            raise NotAlmostComplex(
                f"{self.name}: ||J^2 + Id|| = {defect:.3e} exceeds {tol:.1e} at {point}")
        return J

    def check_normalized(self, tol=DEFAULT_STRUCTURE_TOL):
        """When flagged normalized at the origin, verify J(0) = J_st."""
        if not self.normalized_at_origin:
            return self
        J0 = self(np.zeros(2 * self.n))
        defect = np.linalg.norm(J0 - standard_structure(self.n), ord=2)
        if defect > tol:
            raise NotAlmostComplex(
                f"{self.name}: flagged normalized but ||J(0) - J_st|| = {defect:.3e}")
        return self

    @classmethod
    def constant(cls, J, name="constant structure"):
        J = np.asarray(J, dtype=float)
        n = J.shape[0] // 2
        return cls(n, lambda p, _J=J: _J, name=name)

    @classmethod
    def standard(cls, n):
        return cls.constant(standard_structure(n), name="standard structure")


class ComplexMatrixField:
    """Field of n x n complex matrices A(z) encoding a structure tensor.

    ``matrix_fn`` maps complex points of shape (..., n) to (..., n, n).
    Contraction arguments elsewhere require the operator norm of A to stay
    below 1 on the working domain.
    """

    def __init__(self, n, matrix_fn, name="A"):
        self.n = int(n)
        self._fn = matrix_fn
        self.name = name

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        A = np.asarray(self._fn(z), dtype=complex)
        want = z.shape[:-1] + (self.n, self.n)
        if A.shape != want:
            raise ValueError(f"{self.name}: matrix field returned shape {A.shape}, expected {want}")
        return A

    def norm_at(self, z):
        return np.linalg.norm(self(z), ord=2, axis=(-2, -1))

    def check_contractive(self, z, bound=1.0):
        nrm = float(np.max(self.norm_at(z)))
        if nrm >= bound:
            raise NormTooLarge(f"{self.name}: ||A|| = {nrm:.4f} >= {bound} on the working set")
        return nrm

    @classmethod
    def constant(cls, A0, name="constant A"):
        A0 = np.atleast_2d(np.asarray(A0, dtype=complex))
        n = A0.shape[0]

        def fn(z, _A=A0):
            z = np.asarray(z, dtype=complex)
            out = np.broadcast_to(_A, z.shape[:-1] + (n, n))
            return np.array(out)

        return cls(n, fn, name=name)

    @classmethod
    def zero(cls, n):
        return cls.constant(np.zeros((n, n), dtype=complex), name="A=0")

    @classmethod
    def linear(cls, B, name="linear A"):
        """A(z)_{ij} = sum_k B[i, j, k] z_k."""
        B = np.asarray(B, dtype=complex)
        n = B.shape[0]

        def fn(z, _B=B):
            z = np.asarray(z, dtype=complex)
            return np.einsum("ijk,...k->...ij", _B, z)

        return cls(n, fn, name=name)

    @classmethod
    def from_entries(cls, n, entries, name="A"):
        """Build from a dict (i, j) -> PolyCZ (zero for missing entries)."""
        table = {k: v for k, v in entries.items()}

        def fn(z):
            z = np.asarray(z, dtype=complex)
            out = np.zeros(z.shape[:-1] + (n, n), dtype=complex)
            for (i, j), poly in table.items():
                out[..., i, j] = poly(z)
            return out

        return cls(n, fn, name=name)


class PolyCZ:
    """Polynomial in z and conj(z) on C^n.

    Terms are (coefficient, z-exponents, zbar-exponents) with exponent
    tuples of length n.  Supports evaluation on (..., n) arrays and exact
    differentiation with respect to z_j and conj(z)_j.
    """

    def __init__(self, n, terms=()):
        self.n = int(n)
        self.terms = [(complex(c), tuple(a), tuple(b)) for c, a, b in terms if c != 0]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape[:-1], dtype=complex)
        zb = np.conj(z)
        for c, a, b in self.terms:
            term = np.full(z.shape[:-1], c, dtype=complex)
            for j, p in enumerate(a):
                if p:
                    term = term * z[..., j] ** p
            for j, p in enumerate(b):
                if p:
                    term = term * zb[..., j] ** p
            out += term
        return out

    def diff_z(self, j):
        terms = []
        for c, a, b in self.terms:
            if a[j] > 0:
                a2 = list(a)
                a2[j] -= 1
                terms.append((c * a[j], tuple(a2), b))
        return PolyCZ(self.n, terms)

    def diff_zbar(self, j):
        terms = []
        for c, a, b in self.terms:
            if b[j] > 0:
                b2 = list(b)
                b2[j] -= 1
                terms.append((c * b[j], a, tuple(b2)))
        return PolyCZ(self.n, terms)

    @classmethod
    def monomial(cls, n, coeff, zexp=None, zbexp=None):
        zexp = tuple(zexp) if zexp is not None else (0,) * n
        zbexp = tuple(zbexp) if zbexp is not None else (0,) * n
        return cls(n, [(coeff, zexp, zbexp)])

    @classmethod
    def coordinate(cls, n, j):
        e = [0] * n
        e[j] = 1
        return cls(n, [(1.0, tuple(e), (0,) * n)])


class ScalarField:
    """Complex scalar function on C^n with optional analytic gradients.

    ``fn`` maps (..., n) complex arrays to (...,) complex values.  When
    ``grad_z``/``grad_zbar`` are absent, gradients fall back to central
    finite differences with a relative step (second-order accurate).
    """

    def __init__(self, n, fn, grad_z=None, grad_zbar=None,
                 fd_step=DEFAULT_FD_STEP, is_real=False, name="F"):
        self.n = int(n)
        self._fn = fn
        self._grad_z = grad_z
        self._grad_zbar = grad_zbar
        self.fd_step = float(fd_step)
        self.is_real = bool(is_real)
        self.name = name

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        vals = np.asarray(self._fn(z), dtype=complex)
        if vals.shape != z.shape[:-1]:
            raise ValueError(f"{self.name}: evaluator returned shape {vals.shape}, expected {z.shape[:-1]}")
        return vals

    @property
    def has_analytic_gradients(self):
        return self._grad_z is not None and self._grad_zbar is not None

    def gradients(self, z, step=None):
        """Row vectors (F_z, F_zbar), each of shape (..., n)."""
        z = np.asarray(z, dtype=complex)
        if self.has_analytic_gradients:
            gz = np.asarray(self._grad_z(z), dtype=complex)
            gzb = np.asarray(self._grad_zbar(z), dtype=complex)
            return gz, gzb
        return self.fd_gradients(z, step=step)

    def fd_gradients(self, z, step=None):
        """Central finite-difference gradients in the real coordinates."""
        z = np.asarray(z, dtype=complex)
        h0 = self.fd_step if step is None else float(step)
        gz = np.empty(z.shape, dtype=complex)
        gzb = np.empty(z.shape, dtype=complex)
        for j in range(self.n):
            scale = np.maximum(1.0, np.abs(z[..., j]))
            h = h0 * scale
            for part, delta in (("x", h), ("y", 1j * h)):
                zp = z.copy()
                zm = z.copy()
                zp[..., j] += delta
                zm[..., j] -= delta
                d = (self(zp) - self(zm)) / (2.0 * h)
                if part == "x":
                    fx = d
                else:
                    fy = d
            gz[..., j] = 0.5 * (fx - 1j * fy)
            gzb[..., j] = 0.5 * (fx + 1j * fy)
        if not (np.all(np.isfinite(gz)) and np.all(np.isfinite(gzb))):
            raise GradientUnavailable(f"{self.name}: non-finite finite-difference gradients")
        return gz, gzb

    @classmethod
    def from_poly(cls, poly, is_real=False, name="poly"):
        n = poly.n
        dz = [poly.diff_z(j) for j in range(n)]
        dzb = [poly.diff_zbar(j) for j in range(n)]

        def grad_z(z):
            return np.stack([d(z) for d in dz], axis=-1)

        def grad_zbar(z):
            return np.stack([d(z) for d in dzb], axis=-1)

        return cls(n, poly, grad_z=grad_z, grad_zbar=grad_zbar, is_real=is_real, name=name)


class CotangentDecomposition:
    """Coefficients of a 1-form in the basis alpha = dz - A dzbar,
    alphabar = dzbar - conj(A) dz.

    ``holo`` and ``antiholo`` are complex row vectors of length n;
    ``residual_row`` carries the simplified residual F_zbar + F_z A.
    """

    def __init__(self, holo, antiholo, A, residual_row=None):
        self.holo = np.asarray(holo, dtype=complex)
        self.antiholo = np.asarray(antiholo, dtype=complex)
        self.A = np.asarray(A, dtype=complex)
        self.residual_row = (np.asarray(residual_row, dtype=complex)
                             if residual_row is not None else None)

    def reconstruct(self):
        """Expand back into (dz coefficients, dzbar coefficients)."""
        a, b = self.holo, self.antiholo
        Abar = np.conj(self.A)
        dz = a - b @ Abar
        dzbar = b - a @ self.A
        return dz, dzbar


def complex_matrix_from_structure(J_field, point, tol=DEFAULT_STRUCTURE_TOL,
                                  cond_bound=1e12):
    """Complex matrix A at a point, from L = (J_st + J)^{-1}(J_st - J).

    Verifies J^2 = -Id and the conjugate-linearity of L; raises
    SingularStructure when J_st + J is numerically singular.
    """
    point = np.asarray(point, dtype=float)
    J = J_field.check_square(point, tol=tol)
    n = J_field.n
    Jst = standard_structure(n)
    S = Jst + J
    if np.linalg.cond(S) > cond_bound:
        raise SingularStructure(
            f"J_st + J is singular at {point}; normalize coordinates first")
    L = np.linalg.solve(S, Jst - J)
    P, A = real_linear_parts(L)
    lin_defect = np.linalg.norm(P, ord=2)
    if lin_defect > max(tol, 1e-12) * max(1.0, np.linalg.norm(A, ord=2)) * 100:
        raise NotAlmostComplex(
            f"L has a complex-linear part of norm {lin_defect:.3e}; structure is inconsistent")
    return A


def structure_from_complex_matrix(A_field, z, tol=DEFAULT_STRUCTURE_TOL):
    """Real 2n x 2n structure matrix at z from its complex matrix.

    Inverts the correspondence: with L v = A conj(v), the structure is
    J = J_st (Id - L)(Id + L)^{-1}, which squares to -Id exactly because L
    anti-commutes with J_st.
    """
    A = A_field(np.asarray(z, dtype=complex))
    nrm = np.linalg.norm(A, ord=2)
    if nrm >= 1.0:
        raise NormTooLarge(f"||A(z)|| = {nrm:.4f} >= 1")
    n = A_field.n
    L = conjugate_linear_matrix(A)
    I = np.eye(2 * n)
    J = standard_structure(n) @ (I - L) @ np.linalg.inv(I + L)
    return J


def structure_field_from_complex_matrix(A_field, name=None):
    """Lift a complex-matrix field to the structure tensor field it encodes."""
    def fn(point):
        return structure_from_complex_matrix(A_field, real_to_complex(point))
    return StructureTensorField(A_field.n, fn,
                                normalized_at_origin=False,
                                name=name or f"structure of {A_field.name}")


def transform_complex_matrix(A, t_z, t_zbar):
    """Complex matrix in new coordinates t with derivative blocks t_z, t_zbar.

    A' = (t_z A + t_zbar)(conj(t_zbar) A + conj(t_z))^{-1}; the conjugate
    blocks are the z/zbar derivatives of conj(t).
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    t_z = np.atleast_2d(np.asarray(t_z, dtype=complex))
    t_zbar = np.atleast_2d(np.asarray(t_zbar, dtype=complex))
    num = t_z @ A + t_zbar
    den = np.conj(t_z) + np.conj(t_zbar) @ A
    if np.linalg.cond(den) > 1e12:
        raise SingularTransform("denominator matrix of the transformation rule is singular")
    return num @ np.linalg.inv(den)


def compose_linear_changes(P1, Q1, P2, Q2):
    """Derivative blocks of t(s(z)) for linear changes s = P1 z + Q1 zbar,
    t = P2 w + Q2 wbar."""
    P1, Q1, P2, Q2 = (np.atleast_2d(np.asarray(M, dtype=complex)) for M in (P1, Q1, P2, Q2))
    return P2 @ P1 + Q2 @ np.conj(Q1), P2 @ Q1 + Q2 @ np.conj(P1)


def dbar_scalar(F, A_field, z, step=None):
    """(0,1) part of dF at z in the alphabar basis, with the simplified
    residual row F_zbar + F_z A attached.

    Requires ||A(z)|| < 1 so that I - conj(A) A is invertible.
    """
    z = np.asarray(z, dtype=complex)
    A = A_field(z)
    nrm = np.linalg.norm(np.atleast_2d(A), ord=2)
    if nrm >= 1.0:
        raise NormTooLarge(f"||A(z)|| = {nrm:.4f} >= 1 at z = {z}")
    Fz, Fzb = F.gradients(z, step=step)
    if not (np.all(np.isfinite(Fz)) and np.all(np.isfinite(Fzb))):
        raise GradientUnavailable(f"{F.name}: gradients are not finite at {z}")
    n = F.n
    I = np.eye(n)
    Abar = np.conj(A)
    antiholo = Fzb @ np.linalg.inv(I - Abar @ A) + Fz @ np.linalg.inv(I - A @ Abar) @ A
    holo = (Fz + Fzb @ Abar) @ np.linalg.inv(I - A @ Abar)
    residual = Fzb + Fz @ A
    return CotangentDecomposition(holo, antiholo, A, residual_row=residual)


def normalize_at_point(J_field, p, tol=DEFAULT_STRUCTURE_TOL):
    """Linear change of coordinates C with C J(p) C^{-1} = J_st.

    Built from a real basis (u_1, J u_1, ..., u_n, J u_n) chosen greedily
    for conditioning; the pushed-forward structure at the image of p is
    standard, equivalently its complex matrix vanishes there.
    """
    p = np.asarray(p, dtype=float)
    J = J_field.check_square(p, tol=tol)
    dim = 2 * J_field.n
    cols = []
    for _ in range(J_field.n):
        best = None
        for k in range(dim):
            e = np.zeros(dim)
            e[k] = 1.0
            r = e.copy()
            for c in cols:
                r -= (r @ c) * c
            if best is None or np.linalg.norm(r) > np.linalg.norm(best):
                best = r
        u = best / np.linalg.norm(best)
        v = J @ u
        for vec in (u, v):
            w = vec.copy()
            for c in cols:
                w -= (w @ c) * c
            cols.append(w / np.linalg.norm(w))
    B = np.empty((dim, dim))
    # re-derive the exact (u, Ju) pairs: orthonormalization above only
    # guided the choice; the basis itself must pair u with J u exactly
    picked = []
    for j in range(J_field.n):
        u = cols[2 * j]
        picked.append(u)
        picked.append(J @ u)
    for k, b in enumerate(picked):
        B[:, k] = b
    C = np.linalg.inv(B)
    return C


def pushforward_structure(J_field, C, name=None):
    """Structure field of the image coordinates w = C x (linear change)."""
    C = np.asarray(C, dtype=float)
    Cinv = np.linalg.inv(C)

    def fn(point):
        return C @ J_field(Cinv @ np.asarray(point, dtype=float)) @ Cinv

    return StructureTensorField(J_field.n, fn, name=name or f"pushforward of {J_field.name}")


def structure_lambda(lam):
    """One-dimensional catalog structure [[0, -lam], [1/lam, 0]]."""
    lam = float(lam)
    J = np.array([[0.0, -lam], [1.0 / lam, 0.0]])
    return StructureTensorField.constant(J, name=f"lambda structure ({lam})")
