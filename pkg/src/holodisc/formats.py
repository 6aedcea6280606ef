"""Text and CSV formats for fields, grids, discs, and run inputs.

All floats are written with repr (shortest round-trip) so that identical
runs produce byte-identical files.

Grid-function CSV: header ``n_r,n_theta``, then one row ``j,k,re,im`` per
node.  Disc CSV: header ``n,n_r,n_theta``, rows ``j,k,re_1,im_1,...``.
Boundary CSV: header ``n_theta``, rows ``k,value``.  Points CSV: rows
``re,im``.

Matrix-field files define one polynomial per entry::

    n 2
    A 1 1  0.1 0.0
    A 1 2  0.0 -0.5 z1 zbar2^2 + 0.25 0.0 z2

Each term is two decimal floats (real and imaginary part of the
coefficient) followed by monomial factors ``z<k>`` / ``zbar<k>`` with an
optional ``^power``; terms are joined with ``+``.  Wedge files carry
``n``, ``delta``, and either ``model true`` or per-coordinate ``graph j:``
polynomials in ``y<k>`` with the same term syntax (real coefficients, one
float).
"""

import numpy as np

from .accal import ComplexMatrixField, PolyCZ
from .errors import InputParseError
from .wedgefam import EdgeGraph, WedgeDomain


def _fmt(x):
    return repr(float(x))


# -- CSV ---------------------------------------------------------------------

def write_grid_function(path, gf):
    grid = gf.grid
    lines = [f"{grid.n_r},{grid.n_theta}"]
    for j in range(grid.n_r):
        for k in range(grid.n_theta):
            v = gf.values[j, k]
            lines.append(f"{j},{k},{_fmt(v.real)},{_fmt(v.imag)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid_function(path, grid_factory):
    """Read a grid-function CSV; grid_factory(n_r, n_theta) supplies the grid."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise InputParseError("empty grid-function file", line=1)
    try:
        n_r, n_theta = (int(x) for x in lines[0].split(","))
    except ValueError as exc:
        raise InputParseError(f"bad header: {exc}", line=1)
    values = np.zeros((n_r, n_theta), dtype=complex)
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise InputParseError("expected j,k,re,im", line=ln)
        try:
            j, k = int(parts[0]), int(parts[1])
            values[j, k] = float(parts[2]) + 1j * float(parts[3])
        except (ValueError, IndexError) as exc:
            raise InputParseError(str(exc), line=ln)
    from .diskops import GridFunction
    return GridFunction(grid_factory(n_r, n_theta), values)


def write_disc(path, disc):
    grid = disc.grid
    lines = [f"{disc.n},{grid.n_r},{grid.n_theta}"]
    for j in range(grid.n_r):
        for k in range(grid.n_theta):
            row = [str(j), str(k)]
            for i in range(disc.n):
                v = disc.values[i, j, k]
                row += [_fmt(v.real), _fmt(v.imag)]
            lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_disc(path, grid_factory):
    with open(path) as fh:
        lines = fh.read().splitlines()
    try:
        n, n_r, n_theta = (int(x) for x in lines[0].split(","))
    except (ValueError, IndexError) as exc:
        raise InputParseError(f"bad disc header: {exc}", line=1)
    values = np.zeros((n, n_r, n_theta), dtype=complex)
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2 + 2 * n:
            raise InputParseError(f"expected j,k and {n} complex pairs", line=ln)
        j, k = int(parts[0]), int(parts[1])
        for i in range(n):
            values[i, j, k] = float(parts[2 + 2 * i]) + 1j * float(parts[3 + 2 * i])
    from .discsolve import DiscMap
    return DiscMap(grid_factory(n_r, n_theta), values)


def write_boundary(path, bf):
    lines = [str(bf.n_theta)]
    for k in range(bf.n_theta):
        lines.append(f"{k},{_fmt(np.real(bf.samples[k]))}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_boundary(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    try:
        n_theta = int(lines[0])
    except (ValueError, IndexError):
        raise InputParseError("bad boundary header", line=1)
    samples = np.zeros(n_theta)
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        try:
            samples[int(parts[0])] = float(parts[1])
        except (ValueError, IndexError) as exc:
            raise InputParseError(str(exc), line=ln)
    from .diskops import BoundaryFunction
    return BoundaryFunction(samples)


def write_points(path, pts):
    with open(path, "w") as fh:
        for z in np.asarray(pts, dtype=complex).ravel():
            fh.write(f"{_fmt(z.real)},{_fmt(z.imag)}\n")


def read_points(path):
    pts = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split(",")
            try:
                pts.append(float(parts[0]) + 1j * float(parts[1]))
            except (ValueError, IndexError) as exc:
                raise InputParseError(str(exc), line=ln)
    return np.array(pts)


# -- polynomial term grammar ---------------------------------------------------

def _parse_terms(text, n, varname, complex_coeff, line_no, allow_conjugate=True):
    """Parse ``c [factors] + c [factors] + ...`` into monomial tuples."""
    terms = []
    for chunk in text.split("+"):
        tokens = chunk.split()
        if not tokens:
            raise InputParseError("empty term", line=line_no)
        try:
            if complex_coeff:
                coeff = complex(float(tokens[0]), float(tokens[1]))
                factors = tokens[2:]
            else:
                coeff = float(tokens[0])
                factors = tokens[1:]
        except (ValueError, IndexError):
            raise InputParseError(
                f"term must start with {'two floats' if complex_coeff else 'a float'}",
                line=line_no)
        zexp = [0] * n
        zbexp = [0] * n
        for f in factors:
            base, _, pw = f.partition("^")
            try:
                power = int(pw) if pw else 1
            except ValueError:
                raise InputParseError(f"bad power in factor {f!r}", line=line_no)
            if base.startswith("zbar"):
                if not allow_conjugate:
                    raise InputParseError(f"conjugate factor {f!r} not allowed here",
                                          line=line_no)
                idx, target = base[4:], zbexp
            elif base.startswith(varname):
                idx, target = base[len(varname):], zexp
            else:
                raise InputParseError(f"unknown factor {f!r}", line=line_no)
            try:
                pos = int(idx) - 1
            except ValueError:
                raise InputParseError(f"bad index in factor {f!r}", line=line_no)
            if not (0 <= pos < n):
                raise InputParseError(f"index out of range in factor {f!r}", line=line_no)
            target[pos] += power
        terms.append((coeff, tuple(zexp), tuple(zbexp)))
    return terms


def _strip(lines):
    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield ln, line


def parse_matrix_field(text):
    """Matrix-field file -> ComplexMatrixField (see module docstring)."""
    n = None
    entries = {}
    for ln, line in _strip(text.splitlines()):
        tokens = line.split(None, 1)
        key = tokens[0].lower()
        if key == "n":
            try:
                n = int(tokens[1])
            except (ValueError, IndexError):
                raise InputParseError("bad dimension line", line=ln)
        elif key == "a":
            if n is None:
                raise InputParseError("dimension line 'n <int>' must come first", line=ln)
            rest = tokens[1].split(None, 2)
            try:
                i, j = int(rest[0]) - 1, int(rest[1]) - 1
            except (ValueError, IndexError):
                raise InputParseError("entry line needs 'A <i> <j> <terms>'", line=ln)
            if not (0 <= i < n and 0 <= j < n):
                raise InputParseError("matrix indices out of range", line=ln)
            if len(rest) < 3:
                raise InputParseError("entry line has no terms", line=ln)
            terms = _parse_terms(rest[2], n, "z", complex_coeff=True, line_no=ln)
            entries[(i, j)] = PolyCZ(n, terms)
        else:
            raise InputParseError(f"unknown directive {key!r}", line=ln)
    if n is None:
        raise InputParseError("missing dimension line 'n <int>'", line=1)
    return ComplexMatrixField.from_entries(n, entries, name="A from file")


def parse_matrix_field_inline(spec, n=1):
    """Inline forms for the command line: ``const 0.3 [0.1]`` (constant
    scalar block) and ``linear 0.1`` (A = coeff * z_1 in the top-left
    entry); anything else is treated as a file path."""
    tokens = spec.split()
    if tokens and tokens[0] == "const":
        re = float(tokens[1])
        im = float(tokens[2]) if len(tokens) > 2 else 0.0
        return ComplexMatrixField.constant(np.eye(n, dtype=complex) * complex(re, im),
                                           name=f"const {complex(re, im)}")
    if tokens and tokens[0] == "linear":
        coeff = complex(float(tokens[1]), float(tokens[2]) if len(tokens) > 2 else 0.0)
        entries = {(0, 0): PolyCZ.monomial(n, coeff, zexp=tuple(
            1 if i == 0 else 0 for i in range(n)))}
        return ComplexMatrixField.from_entries(n, entries, name=f"linear {coeff}")
    with open(spec) as fh:
        return parse_matrix_field(fh.read())


def parse_wedge(text):
    """Wedge file -> WedgeDomain."""
    n = None
    delta = 0.1
    model = False
    graph_lines = {}
    for ln, line in _strip(text.splitlines()):
        tokens = line.split(None, 1)
        key = tokens[0].lower()
        if key == "n":
            n = int(tokens[1])
        elif key == "delta":
            delta = float(tokens[1])
        elif key == "model":
            model = tokens[1].strip().lower() in ("true", "1", "yes")
        elif key == "graph":
            if n is None:
                raise InputParseError("dimension line 'n <int>' must come first", line=ln)
            head, _, rest = tokens[1].partition(":")
            try:
                j = int(head) - 1
            except ValueError:
                raise InputParseError("graph line needs 'graph <j>: <terms>'", line=ln)
            if not (0 <= j < n):
                raise InputParseError("graph index out of range", line=ln)
            graph_lines[j] = _parse_terms(rest, n, "y", complex_coeff=False,
                                          line_no=ln, allow_conjugate=False)
        else:
            raise InputParseError(f"unknown directive {key!r}", line=ln)
    if n is None:
        raise InputParseError("missing dimension line 'n <int>'", line=1)
    if model or not graph_lines:
        return WedgeDomain.standard(n, delta=delta)
    comps = [graph_lines.get(j, []) for j in range(n)]
    try:
        graph = EdgeGraph(n, [[(c, z) for c, z, _ in comp] for comp in comps])
    except ValueError as exc:
        raise InputParseError(str(exc), line=1)
    return WedgeDomain.from_graph(graph, delta=delta)


def parse_test_function(text, wedge):
    """Test-function file: ``name branch_power`` or ``name perturbed`` with
    an optional ``eps`` line."""
    from .fatou import bounded_perturbed, branch_power
    name = None
    eps = 0.1
    for ln, line in _strip(text.splitlines()):
        tokens = line.split()
        key = tokens[0].lower()
        if key == "name":
            name = tokens[1]
        elif key == "eps":
            eps = float(tokens[1])
        else:
            raise InputParseError(f"unknown directive {key!r}", line=ln)
    if name in ("branch_power", "branch-power"):
        return branch_power(wedge)
    if name in ("perturbed", "exp_plus_zbar"):
        return bounded_perturbed(wedge, eps=eps)
    raise InputParseError(f"unknown test function {name!r}", line=1)


def parse_curve(text, wedge):
    """Curve file -> AdmissibleCurve (type ray / tangent)."""
    from .fatou import AdmissibleCurve
    fields = {}
    for ln, line in _strip(text.splitlines()):
        tokens = line.split()
        fields[tokens[0].lower()] = tokens[1:]
    ctype = (fields.get("type") or ["ray"])[0]

    def vec(name):
        vals = [float(x) for x in fields[name]]
        if len(vals) != 2 * wedge.n:
            raise InputParseError(f"{name} needs {2 * wedge.n} reals")
        arr = np.array(vals)
        return arr[0::2] + 1j * arr[1::2]

    base = AdmissibleCurve.ray(wedge, vec("vertex"), vec("direction"))
    if ctype == "ray":
        return base
    if ctype == "tangent":
        power = float(fields.get("power", ["1.5"])[0])
        mag = float(fields.get("magnitude", ["0.05"])[0])
        return AdmissibleCurve.tangent_perturbation(base, vec("perp"),
                                                    power=power, magnitude=mag)
    raise InputParseError(f"unknown curve type {ctype!r}", line=1)


def parse_seed(spec, n=None):
    """Seed spec: ``zeta`` or ';'-separated components, each a whitespace
    list of coefficients parsed as python complex literals."""
    from .discsolve import HolomorphicSeed
    spec = spec.strip()
    if spec == "zeta":
        return HolomorphicSeed.coordinate(n=n or 1)
    comps = []
    for part in spec.split(";"):
        coeffs = []
        for tok in part.split():
            try:
                coeffs.append(complex(tok))
            except ValueError:
                raise InputParseError(f"bad coefficient {tok!r} in seed spec")
        comps.append(np.array(coeffs if coeffs else [0.0], dtype=complex))
    return HolomorphicSeed(comps)
