"""Acceptance battery: every criterion at its pinned tolerance.

Runs the full suite (core twice, single- and multi-threaded, plus the
byte-level determinism comparison) and asserts each criterion's flag,
printing one pass/fail line per criterion.
"""

import numpy as np
import pytest

from holodisc.acceptance import (
    CRITERIA,
    RUNTIME_LIMITS,
    SUITE_SEED,
    acceptance_suite,
)


@pytest.fixture(scope="module")
def suite_report():
    return acceptance_suite(seed=SUITE_SEED, threads=3)


def test_print_criterion_lines(suite_report):
    print()
    for line in suite_report.console_lines():
        print(line)


@pytest.mark.parametrize("name", [name for name, _ in CRITERIA] + ["10-determinism"])
def test_criterion(suite_report, name):
    payload = suite_report.results[name]
    passed = suite_report.flags[name]
    tag = "PASS" if passed else "FAIL"
    print(f"[{tag}] {name}: {payload}")
    assert passed, f"criterion {name} failed: {payload}"


def test_runtime_limits(suite_report):
    for name, ok in suite_report.runtime_ok.items():
        t = suite_report.timings[name]
        print(f"[{'PASS' if ok else 'FAIL'}] runtime {name}: "
              f"{t:.2f} s (limit {RUNTIME_LIMITS[name]:.0f} s)")
        assert ok, f"{name} exceeded its runtime limit: {t:.1f} s"


def test_specific_tolerances(suite_report):
    r = suite_report.results
    assert r["1-cauchy-green-inversion"]["errors"]["constant"]["err_256"] < 1e-3
    assert r["1-cauchy-green-inversion"]["errors"]["conj_square"]["err_256"] < 1e-3
    assert r["2-closed-form-disc"]["sup_error"] < 1e-8
    assert r["2-closed-form-disc"]["iterations"] <= 30
    assert r["2-closed-form-disc"]["contraction_ratio"] < 0.9
    assert r["3-variable-structure-disc"]["residual"] < 1e-6
    assert r["4-flat-family"]["upper_arc_flatness"] < 1e-10
    assert r["4-flat-family"]["interior_max_x"] < 0.0
    assert r["4-flat-family"]["round_trip_error"] < 1e-8
    assert r["5-glued-family"]["runs"]["0.05"]["boundary_residual"] < 1e-6
    assert r["5-glued-family"]["runs"]["0.05"]["interior_residual"] < 1e-8
    assert 0.5 < r["5-glued-family"]["distance_ratio"] < 2.0
    assert np.isfinite(r["6-holder-estimate"]["c_hat"]["128"])
    assert 0.5 < r["6-holder-estimate"]["stability_ratio"] < 2.0
    assert r["6-holder-estimate"]["quotient_ok"]
    assert r["7-chirka-lindelof"]["decay_exponent"] >= 0.4
    assert abs(r["8-scaling-montel"]["slope"] - 1.0) <= 0.2
    assert r["8-scaling-montel"]["candidate_at_floor"]
    assert r["9-fatou-statistic"]["fraction_nontangential_off_slice"] >= 0.99
    assert r["9-fatou-statistic"]["slice_all_none"]
    assert r["9-fatou-statistic"]["worst_oracle_error"] < 1e-3
    assert r["10-determinism"]["identical"]
