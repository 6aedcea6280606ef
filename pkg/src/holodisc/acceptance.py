"""Acceptance battery: ten pinned criteria covering the whole pipeline.

Each criterion returns (payload, passed) with every tolerance fixed here;
the suite runs the first nine twice (with 1 and N worker threads) and the
tenth criterion compares the two canonical JSON payloads byte for byte.
"""

import time

import numpy as np

from .accal import ComplexMatrixField
from .diskops import GridFunction, cauchy_green, dbar_fd, disc_grid, lower_arc_cutoff
from .discsolve import HolomorphicSeed, solve_disc
from .fatou import (
    AdmissibleCurve,
    bounded_perturbed,
    branch_power,
    chirka_lindelof_compare,
    holder_bound_check,
    ray_family_limits,
    restrict_to_disc,
    scaling_montel,
)
from .report import RunReport, dumps
from .wedgefam import (
    DiscFamily,
    EdgeGraph,
    WedgeDomain,
    build_cone,
    flat_family,
    glued_family,
)

SUITE_SEED = 20240 + 505


def criterion_cauchy_green(seed, threads):
    """dbar_fd(T f) recovers f for f = 1 and f = conj(w)^2 + 1; the sup
    error is below 1e-3 on the 256 x 256 grid and shrinks at the nominal
    stencil order under 128 -> 256 refinement."""
    tests = {"constant": lambda z: np.ones_like(z),
             "conj_square": lambda z: np.conj(z) ** 2 + 1.0}
    errs = {}
    for name, fn in tests.items():
        pair = []
        for m in (128, 256):
            g = disc_grid(m, m)
            f = GridFunction(g, fn(g.zeta))
            out = dbar_fd(cauchy_green(f), order=2)
            pair.append(float(np.max(np.abs(out.values - f.values))))
        errs[name] = {"err_128": pair[0], "err_256": pair[1],
                      "slope": float(np.log2(pair[0] / pair[1]))}
    passed = all(e["err_256"] < 1e-3 and abs(e["slope"] - 2.0) <= 0.3
                 for e in errs.values())
    return {"errors": errs, "tolerance": 1e-3, "order": 2}, passed


def criterion_closed_form_disc(seed, threads):
    """Constant A = 0.3 with seed zeta: the solved disc matches
    zeta + 0.3 conj(zeta) to 1e-8 within 30 Picard iterations and the
    measured contraction ratio stays below 0.9."""
    g = disc_grid(128, 256)
    disc = solve_disc(ComplexMatrixField.constant([[0.3]]),
                      HolomorphicSeed.coordinate(n=1), g, tol=1e-8)
    expected = g.zeta + 0.3 * np.conj(g.zeta)
    err = float(np.max(np.abs(disc.values[0] - expected)))
    payload = {"sup_error": err, "iterations": disc.meta["iterations"],
               "contraction_ratio": disc.meta["contraction_ratio"],
               "residual": disc.meta["residual"]}
    passed = err < 1e-8 and disc.meta["iterations"] <= 30 \
        and disc.meta["contraction_ratio"] < 0.9
    return payload, passed


def criterion_variable_disc(seed, threads):
    """A(z) = 0.1 z in one variable: holomorphy residual below 1e-6 on the
    128 x 256 grid."""
    g = disc_grid(128, 256)
    A = ComplexMatrixField.linear(np.array([[[0.1]]], dtype=complex))
    disc = solve_disc(A, HolomorphicSeed.coordinate(n=1), g, tol=1e-8)
    payload = {"residual": disc.meta["residual"],
               "iterations": disc.meta["iterations"]}
    return payload, disc.meta["residual"] < 1e-6


def criterion_flat_family(seed, threads):
    """Flat family: exact gluing on the upper arc (|x_j| < 1e-10), negative
    real parts inside, and a 100-sample evaluation-map round trip with
    parameter error below 1e-8."""
    g = disc_grid(128, 256)
    phi = lower_arc_cutoff(g.n_theta)
    disc = flat_family([0.0], [1.0], phi, g)
    upper = g.upper_arc_indices()
    flatness = float(np.max(np.abs(disc.boundary[:, upper].real)))
    interior_max = float(np.max(disc.values.real))
    fam = DiscFamily.model(2, g, phi=phi)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        c = rng.uniform(-1.0, 1.0, size=1)
        t = np.exp(rng.uniform(np.log(0.5), np.log(2.0), size=1))
        zeta = rng.uniform(0.05, 0.9) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        w = fam.evaluate(c, t, np.array([zeta]))[:, 0]
        c2, t2, z2 = fam.invert(w)
        worst = max(worst, float(np.max(np.abs(c2 - c))),
                    float(np.max(np.abs(t2 - t))), abs(z2 - zeta))
    payload = {"upper_arc_flatness": flatness, "interior_max_x": interior_max,
               "round_trip_error": worst}
    passed = flatness < 1e-10 and interior_max < 0.0 and worst < 1e-8
    return payload, passed


def criterion_glued_family(seed, threads):
    """Quadratic edge graph h(y) = eps |y|^2: gluing residual < 1e-6,
    interior residual < 1e-8, and first-order distance to the flat family
    stable (within a factor 2) across eps in {0.01, 0.05}."""
    g = disc_grid(256, 512)
    phi = lower_arc_cutoff(g.n_theta)
    out = {}
    ratios = {}
    for eps in (0.01, 0.05):
        disc = glued_family(EdgeGraph.quadratic_iso(2, eps), None, [0.1], [1.0], phi, g)
        out[str(eps)] = {"boundary_residual": disc.meta["boundary_residual"],
                         "interior_residual": disc.meta["interior_residual"],
                         "flat_distance": disc.meta["flat_distance"],
                         "iterations": disc.meta["iterations"]}
        ratios[eps] = disc.meta["flat_distance"] / eps
    c_ratio = ratios[0.05] / ratios[0.01]
    main = out["0.05"]
    payload = {"runs": out, "distance_ratio": float(c_ratio)}
    passed = main["boundary_residual"] < 1e-6 and main["interior_residual"] < 1e-8 \
        and 0.5 < c_ratio < 2.0
    return payload, passed


def criterion_holder(seed, threads):
    """Restriction of exp(z_1) + 0.1 conj(z_1) to 20 family discs: the
    empirical interior constant stays finite and within a factor 2 across
    64 -> 128 refinement, and the rescaled constants depend only on the
    radius quotient (within 2x across rho in {0.2, 0.5, 1})."""
    W = WedgeDomain.standard(2)
    F = bounded_perturbed(W)
    A0 = ComplexMatrixField.zero(2)
    rng = np.random.default_rng(seed + 1)
    params = [(rng.uniform(-0.5, 0.5, 1), np.exp(rng.uniform(np.log(0.7), np.log(1.5), 1)))
              for _ in range(20)]
    chats = {}
    quotient_ok = True
    reports = []
    for m in (64, 128):
        g = disc_grid(m, 2 * m)
        phi = lower_arc_cutoff(g.n_theta)
        worst = 0.0
        for c, t in params:
            disc = flat_family(c, t, phi, g)
            restr = restrict_to_disc(F, disc, A0)
            rep = holder_bound_check(restr, p_exp=4.0, radius=0.5, seed=seed)
            worst = max(worst, rep.c_hat)
            quotient_ok = quotient_ok and rep.quotient_ok
            if m == 128:
                reports.append(rep)
        chats[str(m)] = worst
    stability = chats["128"] / chats["64"]
    payload = {"c_hat": chats, "stability_ratio": float(stability),
               "quotient_ok": quotient_ok,
               "per_rho_example": {str(k): v for k, v in reports[0].per_rho.items()}}
    passed = np.isfinite(chats["128"]) and 0.5 < stability < 2.0 and quotient_ok
    return payload, passed, reports


def criterion_lindelof(seed, threads):
    """Two tangent admissible curves at the origin: the difference of F
    along them vanishes with fitted exponent >= 0.4 (= 1 - 2/4 - 0.1)."""
    W = WedgeDomain.standard(2)
    F = branch_power(W)
    d = np.array([-1.0, -1.0]) / np.sqrt(2) + 0j
    g1 = AdmissibleCurve.ray(W, np.zeros(2, dtype=complex), d)
    g2 = AdmissibleCurve.tangent_perturbation(g1, np.array([-1.0, -0.3]) + 0j,
                                              power=1.5, magnitude=0.05)
    rep = chirka_lindelof_compare(F, g1, g2, p_exp=4.0)
    payload = {"decay_exponent": rep.decay_exponent,
               "tangency_exponent": rep.tangency_exponent,
               "final_difference": rep.final_difference,
               "zeta2_exponent": rep.zeta2_exponent}
    passed = rep.passed and rep.decay_exponent >= 0.4
    return payload, passed, rep


def criterion_montel(seed, threads):
    """Scaling sequences: the measured dbar residual of F(z/k) scales
    linearly in 1/k (log-log slope within 20% of 1, on the function with a
    genuine dbar part), and the greedy subsequence limit of the bounded
    holomorphic branch has discrete residual at the finite-difference
    floor."""
    W = WedgeDomain.standard(2)
    cone = build_cone(np.zeros(2, dtype=complex),
                      np.array([-1.0, -1.0]) / np.sqrt(2) + 0j, np.deg2rad(25.0), W)
    rep_slope = scaling_montel(bounded_perturbed(W), cone, np.geomspace(1.0, 0.02, 12))
    ks = np.unique(np.geomspace(1, 200, 60).astype(int))
    rep_floor = scaling_montel(branch_power(W), cone, 1.0 / ks)
    payload = {
        "slope": rep_slope.residual_slope,
        "slope_ok": rep_slope.slope_ok,
        "equicontinuity_bounded": rep_slope.equicontinuity_bounded,
        "kept_scales": rep_floor.kept_scales,
        "candidate_residual": rep_floor.candidate_residual,
        "fd_floor": rep_floor.fd_floor,
        "candidate_at_floor": rep_floor.candidate_at_floor,
    }
    passed = rep_slope.slope_ok and rep_slope.equicontinuity_bounded \
        and rep_floor.candidate_at_floor and not rep_floor.no_convergent_subsequence
    return payload, passed, rep_slope


def criterion_fatou(seed, threads, n_samples=10000, n_slice=100, n_dirs=16):
    """The boundary-limit statistic for the bounded holomorphic branch:
    non-tangential verdicts at >= 99% of edge samples off the slice
    y_1 = 0, NONE exactly on the sampled slice points, and all
    non-tangential limits within 1e-3 of the closed form."""
    W = WedgeDomain.standard(2)
    F = branch_power(W)
    rng = np.random.default_rng(seed)
    y_bulk = rng.uniform(-1.0, 1.0, size=(n_samples - n_slice, 2))
    y_slice = np.column_stack([np.zeros(n_slice),
                               np.linspace(-1.0, 1.0, n_slice)])
    y = np.vstack([y_bulk, y_slice])
    verdicts, summary = ray_family_limits(F, y, n_directions=n_dirs,
                                          agree_tol=1e-4, threads=threads,
                                          cross_rays=10, cross_sample=50, seed=seed)
    bulk = verdicts[:len(y_bulk)]
    slice_v = verdicts[len(y_bulk):]
    nt_bulk = sum(1 for v in bulk if v.verdict == "NONTANGENTIAL")
    frac = nt_bulk / len(bulk)
    slice_all_none = all(v.verdict == "NONE" for v in slice_v)
    oracle_errs = np.array([v.oracle_error for v in bulk
                            if np.isfinite(v.oracle_error)])
    worst_oracle = float(oracle_errs.max()) if oracle_errs.size else np.inf
    payload = {
        "fraction_nontangential_off_slice": frac,
        "slice_all_none": slice_all_none,
        "worst_oracle_error": worst_oracle,
        "counts": summary["counts"],
        "cross_validation_ok": summary["cross_validation_ok"],
        "n_directions": n_dirs,
    }
    passed = frac >= 0.99 and slice_all_none and worst_oracle < 1e-3 \
        and bool(summary["cross_validation_ok"])
    return payload, passed, (verdicts, summary)


CRITERIA = [
    ("1-cauchy-green-inversion", criterion_cauchy_green),
    ("2-closed-form-disc", criterion_closed_form_disc),
    ("3-variable-structure-disc", criterion_variable_disc),
    ("4-flat-family", criterion_flat_family),
    ("5-glued-family", criterion_glued_family),
    ("6-holder-estimate", criterion_holder),
    ("7-chirka-lindelof", criterion_lindelof),
    ("8-scaling-montel", criterion_montel),
    ("9-fatou-statistic", criterion_fatou),
]

RUNTIME_LIMITS = {
    "1-cauchy-green-inversion": 120.0,
    "2-closed-form-disc": 10.0,
    "3-variable-structure-disc": 60.0,
    "4-flat-family": 30.0,
    "5-glued-family": 120.0,
    "6-holder-estimate": 120.0,
    "7-chirka-lindelof": 60.0,
    "8-scaling-montel": 60.0,
    "9-fatou-statistic": 300.0,
}


def run_core(seed=SUITE_SEED, threads=1, collect=None):
    """Run criteria 1-9; returns (results dict, flags dict, timings dict).

    Flags carry the numeric checks only (deterministic); wall-time limits
    are enforced by the suite on top of them, alongside the timings.
    ``collect`` (when a dict) receives rich side objects for figures."""
    results = {}
    flags = {}
    timings = {}
    for name, fn in CRITERIA:
        t0 = time.perf_counter()
        out = fn(seed, threads)
        if len(out) == 2:
            (payload, passed), extra = out, None
        else:
            payload, passed, extra = out
        results[name] = payload
        flags[name] = bool(passed)
        timings[name] = time.perf_counter() - t0
        if collect is not None and extra is not None:
            collect[name] = extra
    return results, flags, timings


def acceptance_suite(seed=SUITE_SEED, threads=4, collect=None):
    """Full suite: the core twice (1 and N threads) plus the determinism
    criterion comparing the two payloads byte for byte.

    Wall-time limits are enforced against the single-thread pass and
    reported next to the timings (console/exit status); they stay out of
    the JSON payload, which must be bit-identical across reruns.
    """
    results_1, flags_1, timings_1 = run_core(seed=seed, threads=1, collect=collect)
    results_n, flags_n, timings_n = run_core(seed=seed, threads=max(2, threads))
    bytes_1 = dumps({"results": results_1, "flags": flags_1})
    bytes_n = dumps({"results": results_n, "flags": flags_n})
    identical = bytes_1 == bytes_n
    report = RunReport(config={"seed": seed, "threads": threads,
                               "suite": "acceptance"})
    runtime_ok = {}
    for name in results_1:
        runtime_ok[name] = timings_1[name] <= RUNTIME_LIMITS[name]
        report.record(name, results_1[name], flags_1[name],
                      elapsed=timings_1[name])
    report.record("10-determinism",
                  {"identical": identical, "threads_compared": [1, max(2, threads)]},
                  identical, elapsed=sum(timings_n.values()))
    report.runtime_ok = runtime_ok
    return report
