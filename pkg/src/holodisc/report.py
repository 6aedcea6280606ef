"""Run reports: deterministic JSON payloads and rendered figures.

The JSON payload of a run is fully determined by the configuration and
seed: floats are emitted with repr, keys are sorted, and wall-clock
timings live outside the payload (in the in-memory report and the
console), so reruns hash identically.  Report-producing commands also
render matplotlib figures next to their delimited output; figures are
presentation only and never feed back into numbers.
"""

import hashlib
import json
import time

import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def canonical(obj):
    """Recursively convert numpy scalars/arrays and complex numbers into
    plain JSON-serializable python objects."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [canonical(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, (np.complexfloating, complex)):
        c = complex(obj)
        if not (np.isfinite(c.real) and np.isfinite(c.imag)):
            return None
        return {"re": c.real, "im": c.imag}
    return obj


def dumps(payload):
    return json.dumps(canonical(payload), sort_keys=True, separators=(",", ":"))


def payload_hash(payload):
    return hashlib.sha256(dumps(payload).encode()).hexdigest()


def write_json(path, payload):
    text = dumps(payload)
    with open(path, "w") as fh:
        fh.write(text + "\n")
    return text


class RunReport:
    """Config echo, per-step results, timings, and pass/fail flags."""

    def __init__(self, config):
        self.config = dict(config)
        self.results = {}
        self.timings = {}
        self.flags = {}
        self.runtime_ok = {}  # wall-time limits: console/exit only, never payload
        self._t0 = time.perf_counter()

    def record(self, name, payload, passed=None, elapsed=None):
        self.results[name] = payload
        if passed is not None:
            self.flags[name] = bool(passed)
        self.timings[name] = float(elapsed if elapsed is not None else
                                   time.perf_counter() - self._t0)
        self._t0 = time.perf_counter()

    @property
    def all_passed(self):
        flags_ok = all(self.flags.values()) if self.flags else True
        return flags_ok and all(self.runtime_ok.values())

    def payload(self):
        """Deterministic part: config echo + results + flags (no timings)."""
        return {"config": self.config, "results": self.results, "flags": self.flags}

    def console_lines(self):
        lines = []
        for name in self.results:
            if name in self.flags:
                ok = self.flags[name] and self.runtime_ok.get(name, True)
                tag = "PASS" if ok else "FAIL"
                note = "" if self.runtime_ok.get(name, True) else "  [runtime limit exceeded]"
                lines.append(f"[{tag}] {name}  ({self.timings.get(name, 0.0):.2f} s){note}")
            else:
                lines.append(f"[done] {name}  ({self.timings.get(name, 0.0):.2f} s)")
        return lines


def _save(fig, path):
    fig.savefig(path, dpi=130, bbox_inches="tight", metadata={"Software": "holodisc"})
    plt.close(fig)
    return str(path)


def fatou_figure(path, verdicts, summary):
    """Edge map of the per-point verdicts plus the oracle-error histogram."""
    colors = {"NONTANGENTIAL": "#2166ac", "DIRECTIONAL": "#f4a582", "NONE": "#b2182b"}
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax = axes[0]
    for verdict, color in colors.items():
        ys = np.array([v.y for v in verdicts if v.verdict == verdict])
        if ys.size:
            y2 = ys[:, 1] if ys.shape[1] > 1 else np.zeros(len(ys))
            ax.scatter(ys[:, 0], y2, s=4, color=color, label=verdict, linewidths=0)
    ax.set_xlabel("$y_1$")
    ax.set_ylabel("$y_2$")
    ax.set_title(f"verdicts ({summary['fraction_nontangential']:.3f} non-tangential)")
    ax.legend(loc="upper right", fontsize=7)
    ax = axes[1]
    errs = np.array([v.oracle_error for v in verdicts if np.isfinite(v.oracle_error)])
    if errs.size:
        ax.hist(np.log10(np.maximum(errs, 1e-17)), bins=40, color="#4393c3")
        ax.set_xlabel("log10 |limit - oracle|")
    else:
        ax.text(0.5, 0.5, "no oracle", ha="center")
    ax.set_ylabel("count")
    return _save(fig, path)


def holder_figure(path, reports):
    """Empirical constants across rho and discs."""
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for idx, rep in enumerate(reports):
        rhos = sorted(rep.per_rho)
        ax.plot(rhos, [rep.per_rho[r] for r in rhos], "o-", lw=0.8, ms=3, alpha=0.7,
                label=f"disc {idx}" if len(reports) <= 6 else None)
    ax.set_xlabel(r"$\rho$")
    ax.set_ylabel(r"empirical constant")
    ax.set_title("interior estimate: rescaled constants")
    if len(reports) <= 6:
        ax.legend(fontsize=7)
    return _save(fig, path)


def lindelof_figure(path, report):
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    mask = report.differences > 0
    ax.loglog(report.one_minus_t[mask], report.differences[mask], "ko-", ms=3, lw=0.8,
              label="|F(curve1) - F(curve2)|")
    ref = report.differences[mask][0] * (report.one_minus_t[mask]
                                         / report.one_minus_t[mask][0]) ** 0.5
    ax.loglog(report.one_minus_t[mask], ref, "r--", lw=0.8, label="slope 1/2")
    ax.set_xlabel("1 - t")
    ax.set_ylabel("difference")
    ax.set_title(f"tangent-curve comparison (fit {report.decay_exponent:.2f})")
    ax.legend(fontsize=7)
    return _save(fig, path)


def montel_figure(path, report):
    fig, axes = plt.subplots(1, 2, figsize=(8.6, 3.4))
    ax = axes[0]
    mask = report.residuals > 0
    ax.loglog(report.scales[mask], report.residuals[mask], "ko-", ms=3, lw=0.8)
    ax.loglog(report.scales, report.scales * (report.residuals[mask].max()
                                              / report.scales[mask].max() if mask.any() else 1.0),
              "r--", lw=0.8, label="slope 1")
    ax.set_xlabel("scale")
    ax.set_ylabel("dbar residual")
    ax.set_title(f"scaling residuals (fit {report.residual_slope:.2f})")
    ax.legend(fontsize=7)
    ax = axes[1]
    ax.semilogy(report.scales, np.maximum(report.equicontinuity, 1e-18), "o-", ms=3, lw=0.8)
    ax.set_xlabel("scale")
    ax.set_ylabel("mesh oscillation")
    ax.set_title("equicontinuity moduli")
    return _save(fig, path)


def foliation_figure(path, report):
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    labels = ["edge cover", "sheet separation", "coverage residual"]
    vals = [max(report["edge_cover_defect"], 1e-18),
            max(report["sheet_separation"] or 0.0, 1e-18),
            max(report["coverage_worst_residual"], 1e-18)]
    ax.bar(labels, vals, color=["#4393c3", "#92c5de", "#2166ac"])
    ax.set_yscale("log")
    ax.set_ylabel("magnitude")
    ax.set_title("foliation diagnostics")
    return _save(fig, path)


def acceptance_figure(path, flags, timings):
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    names = list(flags)
    vals = [timings.get(n, 0.0) for n in names]
    colors = ["#2166ac" if flags[n] else "#b2182b" for n in names]
    ax.barh(range(len(names)), vals, color=colors)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=7)
    ax.set_xlabel("seconds")
    ax.set_title("acceptance criteria (blue = pass)")
    return _save(fig, path)
