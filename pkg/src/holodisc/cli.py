"""Command-line front end.

Subcommands: cg, schwarz, solve-disc, family, foliation, holder, lindelof,
fatou, acceptance.  Outputs are CSV for fields and discs and canonical
JSON for reports; report-producing commands also render figures next to
their output (disable with --no-figures).  Exit codes: 0 all checks pass,
1 a numeric check failed, 2 usage or input-parse error.

All randomness flows from the --seed flag (recorded in every payload); the
worker count (--threads or HOLODISC_THREADS) never changes numbers, only
wall time.
"""

import argparse
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import acceptance as acc
from . import formats, report as rpt
from .accal import ComplexMatrixField
from .diskops import disc_grid, lower_arc_cutoff, cauchy_green, schwarz
from .discsolve import solve_disc
from .errors import ConfigError, HolodiscError, InputParseError
from .fatou import (
    chirka_lindelof_compare,
    holder_bound_check,
    ray_family_limits,
    restrict_to_disc,
)
from .report import RunReport
from .wedgefam import DiscFamily, flat_family, glued_family


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; echoes into every payload."""

    command: str
    inputs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = 1
    figures: bool = True
    verbose: bool = False

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def validate(self):
        for key in ("tol",):
            if key in self.params and not self.params[key] > 0:
                raise ConfigError(f"parameter {key} must be positive, got {self.params[key]}")
        for key in ("n_r", "n_theta"):
            if key in self.params and self.params[key] < 8:
                raise ConfigError(f"parameter {key} below the stencil minimum (8)")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        return self


def _parse_grid(spec):
    try:
        n_r, n_theta = (int(x) for x in spec.lower().split("x"))
    except ValueError:
        raise ConfigError(f"grid must look like 128x256, got {spec!r}")
    return n_r, n_theta


def _parse_vector(spec):
    spec = spec.strip()
    if not spec:
        return np.array([])
    return np.array([float(x) for x in spec.replace(",", " ").split()])


def _figpath(outpath, suffix):
    p = Path(outpath)
    return str(p.with_name(p.stem + "_" + suffix + ".png"))


def _read_wedge(path):
    with open(path) as fh:
        return formats.parse_wedge(fh.read())


def _read_F(path, wedge):
    with open(path) as fh:
        return formats.parse_test_function(fh.read(), wedge)


# -- scenario handlers -----------------------------------------------------------


def run_cg(cfg):
    rep = RunReport(cfg.to_dict())
    n_r, n_theta = cfg.params["n_r"], cfg.params["n_theta"]
    f = formats.read_grid_function(cfg.inputs["input"], disc_grid)
    if "points" in cfg.inputs:
        pts = formats.read_points(cfg.inputs["points"])
        vals = cauchy_green(f, eval_points=pts,
                            exclusion_radius=cfg.params.get("exclusion"))
        formats.write_points(cfg.outputs["out"], vals)
        rep.record("cauchy-green-points", {"n_points": int(pts.size),
                                           "max_abs": float(np.max(np.abs(vals)))})
    else:
        out = cauchy_green(f)
        formats.write_grid_function(cfg.outputs["out"], out)
        rep.record("cauchy-green-grid", {"grid": [n_r, n_theta],
                                         "max_abs": float(np.max(np.abs(out.values)))})
    return rep


def run_schwarz(cfg):
    rep = RunReport(cfg.to_dict())
    phi = formats.read_boundary(cfg.inputs["phi"])
    grid = disc_grid(cfg.params["n_r"], phi.n_theta)
    out = schwarz(phi, grid=grid)
    formats.write_grid_function(cfg.outputs["out"], out)
    rep.record("schwarz", {"max_abs": float(np.max(np.abs(out.values))),
                           "imag_at_zero": float(
                               schwarz(phi, eval_points=np.array([0.0]))[0].imag)})
    return rep


def run_solve_disc(cfg):
    rep = RunReport(cfg.to_dict())
    seed_fn = formats.parse_seed(cfg.params["seed_spec"])
    A = formats.parse_matrix_field_inline(cfg.params["A_spec"], n=seed_fn.n)
    grid = disc_grid(cfg.params["n_r"], cfg.params["n_theta"])
    disc = solve_disc(A, seed_fn, grid, tol=cfg.params["tol"])
    formats.write_disc(cfg.outputs["out"], disc)
    rep.record("solve-disc", {
        "iterations": disc.meta["iterations"],
        "residual": disc.meta["residual"],
        "contraction_ratio": disc.meta["contraction_ratio"],
    }, passed=disc.meta["solved"])
    return rep


def run_family(cfg):
    rep = RunReport(cfg.to_dict())
    wedge = _read_wedge(cfg.inputs["wedge"])
    grid = disc_grid(cfg.params["n_r"], cfg.params["n_theta"])
    phi = lower_arc_cutoff(grid.n_theta)
    c = _parse_vector(cfg.params["c"])
    t = _parse_vector(cfg.params["t"])
    A = None
    if "A" in cfg.params and cfg.params["A"]:
        A = formats.parse_matrix_field_inline(cfg.params["A"], n=wedge.n)
    if wedge.model and A is None:
        disc = flat_family(c, t, phi, grid)
        payload = {"family": "flat"}
        passed = True
    else:
        disc = glued_family(wedge.edge_graph, A, c, t, phi, grid,
                            tol=cfg.params["tol"])
        payload = {"family": "glued",
                   "boundary_residual": disc.meta["boundary_residual"],
                   "interior_residual": disc.meta["interior_residual"],
                   "iterations": disc.meta["iterations"]}
        passed = disc.meta["boundary_residual"] < 1e-6
    formats.write_disc(cfg.outputs["out"], disc)
    rep.record("family", payload, passed=passed)
    return rep


def run_foliation(cfg):
    rep = RunReport(cfg.to_dict())
    wedge = _read_wedge(cfg.inputs["wedge"])
    grid = disc_grid(cfg.params["n_r"], cfg.params["n_theta"])
    fam = DiscFamily(wedge, lower_arc_cutoff(grid.n_theta), grid)
    t_values = [_parse_vector(part) for part in cfg.params["t_grid"].split(";") if part.strip()]
    fol = fam.foliation_check(t_values, n_edge=cfg.params["samples"],
                              n_cover=cfg.params["cover"], seed=cfg.seed)
    passed = fol["edge_cover_defect"] < cfg.params["tol"] and \
        (fol["coverage_success_fraction"] in (None, 1.0))
    rep.record("foliation", fol, passed=passed)
    rpt.write_json(cfg.outputs["report"], rep.payload())
    if cfg.figures:
        rpt.foliation_figure(_figpath(cfg.outputs["report"], "defects"), fol)
    return rep


def run_holder(cfg):
    rep = RunReport(cfg.to_dict())
    disc = formats.read_disc(cfg.inputs["disc"], disc_grid)
    wedge = _read_wedge(cfg.inputs["wedge"]) if "wedge" in cfg.inputs else None
    if wedge is None:
        from .wedgefam import WedgeDomain
        wedge = WedgeDomain.standard(disc.n)
    F = _read_F(cfg.inputs["F"], wedge)
    A = ComplexMatrixField.zero(disc.n)
    restr = restrict_to_disc(F, disc, A)
    holder = holder_bound_check(restr, p_exp=cfg.params["p"], seed=cfg.seed)
    payload = {"c_hat": holder.c_hat, "fitted_exponent": holder.fitted_exponent,
               "per_rho": {str(k): v for k, v in holder.per_rho.items()},
               "quotient_ratio": holder.quotient_ratio,
               "dbar_bound_ok": restr.dbar_bound_ok}
    passed = np.isfinite(holder.c_hat) and holder.quotient_ok and restr.dbar_bound_ok
    rep.record("holder", payload, passed=passed)
    rpt.write_json(cfg.outputs["out"], rep.payload())
    if cfg.figures:
        rpt.holder_figure(_figpath(cfg.outputs["out"], "constants"), [holder])
    return rep


def run_lindelof(cfg):
    rep = RunReport(cfg.to_dict())
    wedge = _read_wedge(cfg.inputs["wedge"]) if "wedge" in cfg.inputs else None
    if wedge is None:
        from .wedgefam import WedgeDomain
        wedge = WedgeDomain.standard(2)
    F = _read_F(cfg.inputs["F"], wedge)
    with open(cfg.inputs["curve1"]) as fh:
        g1 = formats.parse_curve(fh.read(), wedge)
    with open(cfg.inputs["curve2"]) as fh:
        g2 = formats.parse_curve(fh.read(), wedge)
    out = chirka_lindelof_compare(F, g1, g2, p_exp=cfg.params["p"])
    payload = {"decay_exponent": out.decay_exponent,
               "tangency_exponent": out.tangency_exponent,
               "final_difference": out.final_difference,
               "zeta2_exponent": out.zeta2_exponent}
    rep.record("lindelof", payload, passed=out.passed)
    rpt.write_json(cfg.outputs["out"], rep.payload())
    if cfg.figures:
        rpt.lindelof_figure(_figpath(cfg.outputs["out"], "decay"), out)
    return rep


def run_fatou(cfg):
    rep = RunReport(cfg.to_dict())
    wedge = _read_wedge(cfg.inputs["wedge"])
    F = _read_F(cfg.inputs["F"], wedge)
    rng = np.random.default_rng(cfg.seed)
    box = cfg.params["edge_box"]
    y = rng.uniform(-box, box, size=(cfg.params["edge_samples"], wedge.n))
    verdicts, summary = ray_family_limits(
        F, y, n_directions=cfg.params["dirs"], threads=cfg.threads,
        seed=cfg.seed)
    points = [{
        "coords": v.y.tolist(),
        "verdict": v.verdict,
        "limit": None if v.limit is None else {"re": v.limit.real, "im": v.limit.imag},
        "error_bar": v.error_bar,
        "per_direction": v.per_direction,
    } for v in verdicts]
    payload = {"summary": summary, "points": points,
               "note": "fraction over a finite sample; not a measure-theoretic claim"}
    rep.record("fatou", {"summary": summary}, passed=True)
    rpt.write_json(cfg.outputs["out"], {"config": cfg.to_dict(), **payload})
    if cfg.figures:
        rpt.fatou_figure(_figpath(cfg.outputs["out"], "verdicts"), verdicts, summary)
    return rep


def run_acceptance(cfg):
    collect = {}
    report = acc.acceptance_suite(seed=cfg.seed, threads=cfg.threads, collect=collect)
    report.config.update(cfg.to_dict())
    for line in report.console_lines():
        print(line)
    rpt.write_json(cfg.outputs["out"], report.payload())
    if cfg.figures:
        figdir = Path(cfg.outputs.get("figdir") or Path(cfg.outputs["out"]).parent)
        figdir.mkdir(parents=True, exist_ok=True)
        rpt.acceptance_figure(str(figdir / "acceptance_criteria.png"),
                              report.flags, report.timings)
        if "6-holder-estimate" in collect:
            rpt.holder_figure(str(figdir / "acceptance_holder.png"),
                              collect["6-holder-estimate"])
        if "7-chirka-lindelof" in collect:
            rpt.lindelof_figure(str(figdir / "acceptance_lindelof.png"),
                                collect["7-chirka-lindelof"])
        if "8-scaling-montel" in collect:
            rpt.montel_figure(str(figdir / "acceptance_montel.png"),
                              collect["8-scaling-montel"])
        if "9-fatou-statistic" in collect:
            verdicts, summary = collect["9-fatou-statistic"]
            rpt.fatou_figure(str(figdir / "acceptance_fatou.png"), verdicts, summary)
    return report


SCENARIOS = {
    "cg": run_cg,
    "schwarz": run_schwarz,
    "solve-disc": run_solve_disc,
    "family": run_family,
    "foliation": run_foliation,
    "holder": run_holder,
    "lindelof": run_lindelof,
    "fatou": run_fatou,
    "acceptance": run_acceptance,
}


def run(cfg):
    """Dispatch a validated RunConfig to its scenario."""
    cfg.validate()
    if cfg.command not in SCENARIOS:
        raise ConfigError(f"unknown scenario {cfg.command!r}")
    return SCENARIOS[cfg.command](cfg)


def build_parser():
    p = argparse.ArgumentParser(prog="holodisc",
                                description="disc operators, pseudoholomorphic solvers, "
                                            "and boundary-limit experiments on wedges")
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("HOLODISC_THREADS", "1")))
    p.add_argument("--config", help="key-value defaults file; explicit flags win")
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    p._holodisc_subparsers = {}

    def add(name, **kw):
        sp = sub.add_parser(name, **kw)
        sp.add_argument("--grid", default="128x256")
        p._holodisc_subparsers[name] = sp
        return sp

    sp = add("cg", help="Cauchy-Green transform of a sampled function")
    sp.add_argument("--input", required=True)
    sp.add_argument("--points")
    sp.add_argument("--exclusion", type=float)
    sp.add_argument("--out", required=True)

    sp = add("schwarz", help="Schwarz integral of boundary data")
    sp.add_argument("--phi", required=True)
    sp.add_argument("--out", required=True)

    sp = add("solve-disc", help="pseudoholomorphic disc from a holomorphic seed")
    sp.add_argument("--A", required=True, dest="A_spec")
    sp.add_argument("--seed", default="zeta", dest="seed_spec",
                    help="holomorphic seed spec (default: zeta); the global "
                         "--seed before the subcommand is the sampling seed")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--out", required=True)

    sp = add("family", help="disc of the flat or glued family")
    sp.add_argument("--wedge", required=True)
    sp.add_argument("--A", default="", dest="A_spec")
    sp.add_argument("--c", default="")
    sp.add_argument("--t", default="")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--out", required=True)

    sp = add("foliation", help="edge cover / disjointness / coverage report")
    sp.add_argument("--wedge", required=True)
    sp.add_argument("--t-grid", required=True, dest="t_grid")
    sp.add_argument("--samples", type=int, default=40)
    sp.add_argument("--cover", type=int, default=30)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--report", required=True)
    sp.add_argument("--no-figures", action="store_true")

    sp = add("holder", help="interior estimate on a disc restriction")
    sp.add_argument("--disc", required=True)
    sp.add_argument("--F", required=True)
    sp.add_argument("--wedge")
    sp.add_argument("--p", type=float, default=4.0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--no-figures", action="store_true")

    sp = add("lindelof", help="tangent-curve limit comparison")
    sp.add_argument("--F", required=True)
    sp.add_argument("--wedge")
    sp.add_argument("--curve1", required=True)
    sp.add_argument("--curve2", required=True)
    sp.add_argument("--p", type=float, default=4.0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--no-figures", action="store_true")

    sp = add("fatou", help="non-tangential verdicts over an edge sample")
    sp.add_argument("--wedge", required=True)
    sp.add_argument("--F", required=True)
    sp.add_argument("--edge-samples", type=int, default=10000, dest="edge_samples")
    sp.add_argument("--edge-box", type=float, default=1.0, dest="edge_box")
    sp.add_argument("--dirs", type=int, default=16)
    sp.add_argument("--out", required=True)
    sp.add_argument("--no-figures", action="store_true")

    sp = sub.add_parser("acceptance", help="run the full acceptance battery")
    sp.add_argument("--out", default="acceptance_summary.json")
    sp.add_argument("--figdir")
    sp.add_argument("--no-figures", action="store_true")
    p._holodisc_subparsers["acceptance"] = sp
    return p


def apply_config_file(parser, args):
    """Overlay key-value defaults from --config: an entry applies only when
    the corresponding flag was left at its parser default (explicit flags
    win).  Lines are ``<dest> <value>``; # starts a comment."""
    if not args.config:
        return args
    sp = parser._holodisc_subparsers.get(args.command)
    try:
        with open(args.config) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"config file: {exc}")
    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise InputParseError("config lines are '<key> <value>'", line=ln)
        key, value = parts[0].replace("-", "_"), parts[1].strip()
        default = parser.get_default(key)
        if default is None and sp is not None:
            default = sp.get_default(key)
        if not hasattr(args, key):
            raise ConfigError(f"config file names unknown key {key!r} (line {ln})")
        current = getattr(args, key)
        if current == default:
            if isinstance(default, bool):
                setattr(args, key, value.lower() in ("1", "true", "yes"))
            elif isinstance(default, int):
                setattr(args, key, int(value))
            elif isinstance(default, float):
                setattr(args, key, float(value))
            else:
                setattr(args, key, value)
    return args


def config_from_args(args):
    inputs, params, outputs = {}, {}, {}
    if hasattr(args, "grid"):
        params["n_r"], params["n_theta"] = _parse_grid(args.grid)
    for key in ("input", "points", "phi", "wedge", "disc", "F", "curve1", "curve2"):
        val = getattr(args, key, None)
        if val:
            inputs[key] = val
    for key in ("tol", "A_spec", "seed_spec", "c", "t", "t_grid", "samples",
                "cover", "p", "edge_samples", "edge_box", "dirs", "exclusion"):
        val = getattr(args, key, None)
        if val is None:
            continue
        if key == "A_spec" and args.command != "solve-disc":
            params["A"] = val
        else:
            params[key] = val
    for key in ("out", "report", "figdir"):
        val = getattr(args, key, None)
        if val:
            outputs[key] = val
    return RunConfig(command=args.command, inputs=inputs, params=params,
                     outputs=outputs, seed=args.seed, threads=args.threads,
                     figures=not getattr(args, "no_figures", False),
                     verbose=args.verbose)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = apply_config_file(parser, args)
        cfg = config_from_args(args)
        report = run(cfg)
    except (ConfigError, InputParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HolodiscError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1
    if args.verbose:
        for line in report.console_lines():
            print(line)
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
