"""Experiment orchestration: tuning, trace CSVs, the method bench, invariant checks.

Outputs are deterministic given the config: instances are seeded, tuning is
an exhaustive grid sweep, and no timestamps are written, so re-running a
config reproduces every file byte for byte.  Every output embeds the
sha256 hash of the canonical config JSON for provenance.
"""

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import BaselineConfig, agd_run, gd_run, lc_run, sdp_run
from .core import (CouplingSearchError, HasdConfig, HasdState, run,
                   search_call_bound, step, step_t0, tolerance)
from .geometry import (LpGeometry, lp_norm, lp_sq_hessian, lp_sq_hessian_split,
                       steepest_step, subproblem_value)
from .objectives import (LogSumExpAffine, Quadratic, SmoothnessUnavailable,
                         SymmetricSoftmax, load_instance,
                         make_logsumexp_instance, smoothness_bound,
                         solve_reference)

# the 31-point tuning ladder {1, 2, 5} x 10^{-10..-1} plus 1.0
STEPSIZE_GRID = tuple(c * 10.0 ** e for e in range(-10, 0)
                      for c in (1.0, 2.0, 5.0)) + (1.0,)

BENCH_MU_VALUES = (0.0, 1e-6, 1e-4, 1e-2)
BENCH_METHODS = ("hasd", "gd", "agd", "lc")
_ALL_METHODS = ("hasd", "gd", "agd", "lc", "sd_p")
_OBJECTIVES = ("logsumexp", "softmax", "quadratic")

TRACE_COLUMNS = ("iter", "f", "gap", "grad_l2", "grad_dual", "rho", "theta",
                 "zeta", "search_calls", "A", "B", "G_running")


@dataclass
class ExperimentConfig:
    """Everything one experiment needs; hashable to a provenance id."""

    objective: str = "logsumexp"
    n: int = 200
    d: int = 50
    mu: float = 0.0
    alpha: float = 1.0
    seed: int = 0
    methods: tuple = BENCH_METHODS
    p: float = math.inf
    iters: int = 130
    grid: tuple = STEPSIZE_GRID
    stepsize: float | None = None
    out_dir: str = "results"
    check_invariants: bool = False
    ref_path: str | None = None
    instance_path: str | None = None

    def __post_init__(self):
        self.methods = tuple(self.methods)
        self.grid = tuple(float(g) for g in self.grid)
        if self.objective not in _OBJECTIVES:
            raise ValueError("objective must be one of %r" % (_OBJECTIVES,))
        bad = [m for m in self.methods if m not in _ALL_METHODS]
        if bad or not self.methods:
            raise ValueError("unknown methods %r (choose from %r)" % (bad, _ALL_METHODS))
        if not self.grid or any(g <= 0 for g in self.grid):
            raise ValueError("stepsize grid must be nonempty and positive")
        if self.iters < 1:
            raise ValueError("iteration budget must be at least 1")
        if not (self.p >= 2.0):
            raise ValueError("p must be at least 2")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")

    def to_dict(self) -> dict:
        """Canonical document for hashing; excludes out_dir, which names
        where results land but is no part of what the experiment is."""
        return {
            "objective": self.objective, "n": self.n, "d": self.d,
            "mu": self.mu, "alpha": self.alpha, "seed": self.seed,
            "methods": list(self.methods),
            "p": "inf" if math.isinf(self.p) else self.p,
            "iters": self.iters, "grid": list(self.grid),
            "stepsize": self.stepsize,
            "check_invariants": self.check_invariants,
            "ref_path": self.ref_path, "instance_path": self.instance_path,
        }


def config_hash(doc: dict) -> str:
    """sha256 over the canonical (sorted, compact) JSON encoding."""
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def make_objective(cfg: ExperimentConfig, mu: float | None = None):
    """Build (or load) the objective an experiment runs on."""
    mu = cfg.mu if mu is None else mu
    if cfg.instance_path:
        obj = load_instance(cfg.instance_path)
    elif cfg.objective == "logsumexp":
        obj = make_logsumexp_instance(cfg.n, cfg.d, mu, cfg.seed)
    elif cfg.objective == "softmax":
        obj = SymmetricSoftmax(cfg.d, alpha=cfg.alpha)
    else:
        rng = np.random.default_rng(cfg.seed)
        obj = Quadratic(rng.uniform(0.5, 4.0, cfg.d),
                        center=rng.standard_normal(cfg.d))
    if cfg.ref_path:
        attach_reference(obj, cfg.ref_path)
    return obj


def attach_reference(obj, path):
    """Attach a stored (x_star, f_star) pair from a JSON file."""
    with open(path) as fh:
        doc = json.load(fh)
    if "ref_optimum" in doc:
        doc = doc["ref_optimum"]
    x = np.asarray(doc["x"], dtype=float)
    if x.shape != (obj.dim,):
        raise ValueError("reference optimum in %s has dimension %d, expected %d"
                         % (path, x.size, obj.dim))
    obj.reference_optimum = (x, float(doc["f"]))


def default_x0(obj):
    """Canonical start: all-ones for the symmetric objective (whose optimum
    sits at the origin), the origin otherwise."""
    if isinstance(obj, SymmetricSoftmax):
        return np.ones(obj.dim)
    return np.zeros(obj.dim)


def run_method(method: str, obj, x0, geom: LpGeometry, L: float, iters: int,
               stepsize: float):
    """One report for one method.

    Stepsize semantics: gd and agd take the grid value as their literal
    stepsize alpha (their natural knob).  hasd and lc have no absolute
    stepsize; for them the grid value is a multiplicative scale on the
    theory coupling 1/L (hasd scales the steepest step, lc scales the
    alpha = 1/(2L) that drives both of its sequences).  sd_p takes alpha
    literally like gd.
    """
    if method == "hasd":
        cfg = HasdConfig(L=L, geom=geom, max_iters=iters, step_scale=stepsize)
        return run(obj, x0, cfg)
    alpha = stepsize / (2.0 * L) if method == "lc" else stepsize
    bcfg = BaselineConfig(method, alpha, iters, geom=geom)
    runner = {"gd": gd_run, "agd": agd_run, "lc": lc_run, "sd_p": sdp_run}
    return runner[method](obj, x0, bcfg)


def tune_method(method: str, obj, x0, geom: LpGeometry, L: float, iters: int,
                grid) -> tuple[float, bool, dict]:
    """Sweep the grid, pick the stepsize with the smallest final value.

    Returns (best, all_divergent, final_values).  Divergent runs (non-finite
    final value, or a failed coupling search) rank as +inf; ties break
    toward the smaller stepsize.  If every point diverges the smallest grid
    point is returned with a warning.
    """
    finals = {}
    for s in grid:
        with np.errstate(all="ignore"):
            try:
                rep = run_method(method, obj, x0, geom, L, iters, s)
                f = float(rep.final_f)
            except CouplingSearchError:
                f = math.inf
        finals[s] = f if math.isfinite(f) else math.inf
    all_divergent = all(not math.isfinite(v) for v in finals.values())
    if all_divergent:
        warnings.warn("every stepsize diverged for %s; falling back to the "
                      "smallest grid point" % method, RuntimeWarning)
    best = min(grid, key=lambda s: (finals[s], s))
    return float(best), all_divergent, finals


def _fmt(v) -> str:
    return "" if v is None else "%.17g" % float(v)


def write_trace_csv(path, traces, cfg_hash: str, gaps=None):
    """Write one run's rows in the stable trace schema (17 significant digits)."""
    lines = ["# config_hash=%s" % cfg_hash, ",".join(TRACE_COLUMNS)]
    for i, tr in enumerate(traces):
        gap = tr.gap if gaps is None else gaps[i]
        lines.append(",".join([
            str(tr.iter), _fmt(tr.f), _fmt(gap), _fmt(tr.grad_l2),
            _fmt(tr.grad_dual), _fmt(tr.rho), _fmt(tr.theta), _fmt(tr.zeta),
            "" if tr.search_calls is None else str(tr.search_calls),
            _fmt(tr.A), _fmt(tr.B), _fmt(tr.G_running)]))
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError("failed writing trace CSV %s: %s" % (path, exc)) from exc


def _reference_value(obj, mu: float, x0, geom, L, iters, tuned, reports):
    """Reference value used for the gap column of one (instance, mu) block.

    Attached or analytically solvable references are exact.  Otherwise
    (weakly regularized instances can be unbounded below) the reference is
    the best value seen by any method, including extended runs of the two
    accelerated methods at 4x the budget, minus a small positive margin.
    """
    if obj.reference_optimum is not None:
        return float(obj.reference_optimum[1]), "attached"
    if mu > 0:
        try:
            return float(solve_reference(obj)[1]), "exact"
        except (RuntimeError, SmoothnessUnavailable):
            pass
    best = min(min(tr.f for tr in rep.traces) for rep in reports.values())
    for m in ("hasd", "agd"):
        if m in reports:
            try:
                with np.errstate(all="ignore"):
                    ext = run_method(m, obj, x0, geom, L, 4 * iters, tuned[m])
                ext_best = min(tr.f for tr in ext.traces)
                if math.isfinite(ext_best):
                    best = min(best, ext_best)
            except CouplingSearchError:
                pass
    return best - 1e-9 * (1.0 + abs(best)), "best_found"


def run_experiment(cfg: ExperimentConfig, mu_values=None,
                   tune_first: bool = False) -> dict:
    """Run each configured method on each mu, writing one CSV per (method,
    mu), a plot-data file of log10(gap) vs iteration, and summary.json.

    Without tuning, hasd runs at scale 1 and baselines at 1/L.  Returns the
    summary dict (also written to disk).
    """
    if mu_values is None:
        mu_values = [cfg.mu]
    if len(mu_values) > 1 and cfg.objective != "logsumexp":
        raise ValueError("a mu sweep needs the logsumexp objective")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = cfg.to_dict()
    doc["mu_values"] = [float(m) for m in mu_values]
    doc["tuned"] = bool(tune_first)
    h = config_hash(doc)
    geom = LpGeometry(cfg.p)
    summary = {"config": doc, "config_hash": h, "mus": {}}
    plot_lines = ["# config_hash=%s" % h, "mu,method,iter,log10_gap"]
    invariant_failures = 0

    for mu in mu_values:
        obj = make_objective(cfg, mu=mu)
        L = smoothness_bound(obj, geom)
        x0 = default_x0(obj)
        tuned, reports, block = {}, {}, {"L": L, "methods": {}}
        for m in cfg.methods:
            if tune_first:
                best, all_div, _ = tune_method(m, obj, x0, geom, L,
                                               cfg.iters, cfg.grid)
            elif cfg.stepsize is not None:
                best, all_div = float(cfg.stepsize), False
            else:
                best = 1.0 if m in ("hasd", "lc") else 1.0 / L
                all_div = False
            tuned[m] = best
            with np.errstate(all="ignore"):
                reports[m] = run_method(m, obj, x0, geom, L, cfg.iters, best)
            if all_div:
                block["methods"][m] = {"all_divergent": True}
        f_ref, ref_kind = _reference_value(obj, mu, x0, geom, L, cfg.iters,
                                           tuned, reports)
        block["f_ref"] = f_ref
        block["ref_kind"] = ref_kind
        for m in cfg.methods:
            rep = reports[m]
            gaps = [tr.f - f_ref for tr in rep.traces]
            name = "%s_mu%g.csv" % (m, mu)
            write_trace_csv(out / name, rep.traces, h, gaps=gaps)
            for tr, gap in zip(rep.traces, gaps):
                plot_lines.append("%g,%s,%d,%s"
                                  % (mu, m, tr.iter,
                                     _fmt(math.log10(max(gap, 1e-300)))))
            entry = block["methods"].setdefault(m, {})
            entry.update({"stepsize": tuned[m], "final_f": rep.final_f,
                          "final_gap": gaps[-1], "iters": rep.iters,
                          "grad_calls": rep.grad_calls, "csv": name})
            if rep.G_mean is not None:
                entry["G_mean"] = rep.G_mean
            if cfg.check_invariants and rep.invariants is not None:
                entry["invariant_failures"] = rep.invariants
                invariant_failures += sum(rep.invariants.values())
        summary["mus"]["%g" % mu] = block

    if cfg.check_invariants:
        summary["invariant_failures_total"] = invariant_failures
    try:
        (out / "plot_data.csv").write_text("\n".join(plot_lines) + "\n")
        (out / "summary.json").write_text(
            json.dumps(summary, indent=1, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError("failed writing experiment outputs under %s: %s"
                      % (out, exc)) from exc
    return summary


def run_bench(n: int = 200, d: int = 50, iters: int = 130, seed: int = 0,
              out_dir: str = "bench", p: float = math.inf,
              mu_values=BENCH_MU_VALUES, methods=BENCH_METHODS,
              grid=STEPSIZE_GRID) -> dict:
    """The full comparison matrix: tuned stepsizes, all mu values.

    The default budget of 130 iterations keeps every method in the regime
    the comparison is about (all four marching toward a distant or
    unbounded optimum on an equal footing); far larger budgets let
    momentum methods enter a local fast phase on the strongly regularized
    instances, which measures something else.
    """
    cfg = ExperimentConfig(objective="logsumexp", n=n, d=d, seed=seed,
                           methods=tuple(methods), p=p, iters=iters,
                           grid=tuple(grid), out_dir=out_dir)
    return run_experiment(cfg, mu_values=list(mu_values), tune_first=True)


# --------------------------------------------------------------------------
# invariant checking
# --------------------------------------------------------------------------

@dataclass
class CheckRow:
    """Aggregate outcome of one named check across the matrix."""

    name: str
    tol: float
    samples: int = 0
    failures: int = 0
    skipped: int = 0
    worst: float = 0.0

    def record(self, violation: float):
        self.samples += 1
        self.worst = max(self.worst, violation)
        if violation > self.tol:
            self.failures += 1

    def skip(self):
        self.skipped += 1


@dataclass
class InvariantReport:
    rows: list = field(default_factory=list)
    cells: int = 0
    median_search_calls: float | None = None

    @property
    def ok(self) -> bool:
        return all(r.failures == 0 for r in self.rows)

    def row(self, name: str) -> CheckRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def render(self) -> str:
        head = "%-22s %8s %8s %8s %12s %10s  %s" % (
            "check", "samples", "failed", "skipped", "worst", "tol", "status")
        out = [head, "-" * len(head)]
        for r in self.rows:
            status = "FAIL" if r.failures else ("skip" if r.samples == 0 else "ok")
            out.append("%-22s %8d %8d %8d %12.3e %10.1e  %s" % (
                r.name, r.samples, r.failures, r.skipped, r.worst, r.tol, status))
        med = ("n/a" if self.median_search_calls is None
               else "%g" % self.median_search_calls)
        out.append("cells: %d   median search calls: %s   overall: %s"
                   % (self.cells, med, "PASS" if self.ok else "FAIL"))
        return "\n".join(out)


_REL = 1e-8

_CHECKS = (
    ("window", _REL), ("recurrence", _REL), ("progress", _REL),
    ("potential", _REL), ("growth", _REL), ("gain_range", 1e-10),
    ("search_economy", 0.0), ("search_median", 20.0),
    ("psi_at_opt", _REL), ("v_distance", _REL), ("gap_model_bound", _REL),
    ("grad_conversion", _REL), ("certificate", _REL), ("min_grad_cubic", _REL),
    ("holder", _REL), ("step_optimality", 1e-8), ("step_beats_probes", 1e-10),
    ("hessian_fd", 1e-5), ("hessian_psd_split", 1e-10),
    ("hessian_witness", _REL),
)


def default_invariant_matrix(seeds=(0, 1)):
    """(objective, x0) cells: a quadratic, the symmetric smooth max, and a
    strongly regularized random instance per seed, all with references."""
    cells = []
    for seed in seeds:
        rng = np.random.default_rng(1000 + seed)
        quad = Quadratic(rng.uniform(0.5, 4.0, 6), center=rng.standard_normal(6))
        soft = SymmetricSoftmax(8, alpha=0.5)
        lse = make_logsumexp_instance(24, 8, 1e-2, seed=seed,
                                      declare_smoothness=True)
        solve_reference(lse)
        cells.append((quad, quad.center + 1.5 * rng.standard_normal(6)))
        cells.append((soft, rng.standard_normal(8)))
        cells.append((lse, rng.standard_normal(8)))
    return cells


def _check_hasd_cell(obj, geom: LpGeometry, L: float, x0, iters: int,
                     report: InvariantReport, search_counts: list):
    """Run one instrumented optimization, checking every invariant against
    the live state after each accepted iteration."""
    cfg = HasdConfig(L=L, geom=geom, max_iters=iters)
    ref = obj.reference_optimum
    x_star, f_star, R = None, None, None
    if ref is not None:
        x_star = np.asarray(ref[0], dtype=float)
        f_star = float(ref[1])
        R = float(np.linalg.norm(np.asarray(x0, dtype=float) - x_star))
    d = obj.dim
    gain_cap = d ** (0.5 - (0.0 if math.isinf(geom.p) else 1.0 / geom.p))
    call_cap = None
    if R is not None and R > 0:
        call_cap = 2.0 * search_call_bound(geom.p, d, cfg.L, cfg.eps, R)

    state = HasdState(x0)
    prev_A = 0.0
    min_dual_sq = math.inf

    def check_row(tr):
        nonlocal prev_A, min_dual_sq
        if tr.grad_dual is not None:
            min_dual_sq = min(min_dual_sq, tr.grad_dual ** 2)
        if tr.converged or tr.A is None or tr.rho is None:
            return
        r = tr.grad_l2 ** 2 / tr.grad_dual ** 2
        report.row("window").record(max(0.5 - tr.rho / r, tr.rho / r - 2.0, 0.0))
        a = tr.A - prev_A
        report.row("recurrence").record(
            abs(18.0 * cfg.L * tr.rho * a * a - tr.A) / tr.A)
        scale = max(abs(tr.progress_inner), tr.progress_model,
                    tr.progress_dual, 1e-30)
        report.row("progress").record(
            max(tr.progress_model - tr.progress_inner,
                tr.progress_dual - tr.progress_model, 0.0) / scale)
        report.row("potential").record(
            (tr.potential_lhs - tr.potential_rhs)
            / max(abs(tr.potential_rhs), 1e-12))
        report.row("growth").record(tr.growth_rhs - tr.growth_lhs)
        report.row("gain_range").record(
            max(1.0 - tr.G_running, tr.G_running - gain_cap, 0.0))
        if tr.iter >= 2:  # rows produced by an actual coupling search
            search_counts.append(tr.search_calls)
            if call_cap is None:
                report.row("search_economy").skip()
            else:
                report.row("search_economy").record(
                    max(0.0, tr.search_calls - call_cap))
        if ref is None:
            for name in ("psi_at_opt", "v_distance", "gap_model_bound",
                         "grad_conversion"):
                report.row(name).skip()
        else:
            gap = tr.f - f_star
            psi_bound = 0.5 * R * R + tr.A * f_star
            report.row("psi_at_opt").record(
                (state.psi(x_star) - psi_bound) / max(abs(psi_bound), 1.0))
            report.row("v_distance").record(
                (float(np.linalg.norm(state.v - x_star)) - R) / max(R, 1e-30))
            model_bound = R * R / (2.0 * tr.A)
            report.row("gap_model_bound").record(
                (gap - model_bound) / max(model_bound, 1e-30))
            conv = 2.0 * cfg.L * max(gap, 0.0)
            report.row("grad_conversion").record(
                (tr.grad_dual ** 2 - conv) / max(tr.grad_dual ** 2, conv, 1e-20))
        prev_A = tr.A

    state, tr = step_t0(state, obj, cfg)
    if tr is None:
        return
    check_row(tr)
    while not tr.converged and tr.grad_dual > cfg.grad_tol and state.t < iters:
        state, tr = step(state, obj, cfg)
        check_row(tr)

    T = state.t
    if ref is None or T == 0:
        report.row("certificate").skip()
        report.row("min_grad_cubic").skip()
        return
    G = state.G_sum / T
    gap_T = obj.value(state.x) - f_star
    cert = 324.0 * cfg.L * R * R / (G * G * T * T)
    report.row("certificate").record((gap_T - cert) / cert)
    cubic = 8748.0 * cfg.L ** 2 * R * R / (G * G * T ** 3)
    if math.isfinite(min_dual_sq):
        report.row("min_grad_cubic").record((min_dual_sq - cubic) / cubic)


def _check_geometry(geom: LpGeometry, report: InvariantReport, seed: int):
    """Sampled checks of the norm toolbox in one geometry."""
    rng = np.random.default_rng(5000 + seed)
    p = geom.p
    for _ in range(20):
        d = int(rng.integers(2, 7))
        u = rng.standard_normal(d) * 10.0 ** rng.uniform(-2, 2)
        v = rng.standard_normal(d) * 10.0 ** rng.uniform(-2, 2)
        holder = lp_norm(u, p) * lp_norm(v, geom.p_dual)
        report.row("holder").record((abs(float(u @ v)) - holder)
                                    / max(holder, 1e-30))
        g = rng.standard_normal(d)
        y = rng.standard_normal(d)
        L = 10.0 ** rng.uniform(-1, 1)
        x = steepest_step(y, g, L, geom)
        delta = x - y
        base = subproblem_value(y, g, L, geom, x)
        if math.isinf(p):
            worst = 0.0
            for _ in range(40):
                cand = delta * (1.0 + 1e-4 * rng.standard_normal(d))
                worst = max(worst, base - subproblem_value(y, g, L, geom, y + cand))
            report.row("step_beats_probes").record(worst / max(abs(base), 1e-12))
        else:
            nd = lp_norm(delta, p)
            resid = g + 2.0 * L * nd ** (2.0 - p) * np.sign(delta) * np.abs(delta) ** (p - 1.0)
            report.row("step_optimality").record(
                float(np.max(np.abs(resid))) / max(float(np.max(np.abs(g))), 1e-30))
    if not math.isinf(p) and p <= 4.0:
        for d in (2, 5, 10):
            for _ in range(5):
                z = rng.standard_normal(d)
                z[np.abs(z) < 0.2] += 0.5
                H = lp_sq_hessian(z, p)
                fd = _fd_hessian_of_norm_sq(z, p)
                report.row("hessian_fd").record(float(np.max(np.abs(H - fd))))
                M1, M2 = lp_sq_hessian_split(z, p)
                lo = min(float(np.linalg.eigvalsh(M1)[0]),
                         float(np.linalg.eigvalsh(M2)[0]))
                report.row("hessian_psd_split").record(max(0.0, -lo))
                ratio = lp_norm(H @ z, p) / lp_norm(z, p)
                bound = 2.0 / d ** ((p - 2.0) / 2.0)
                report.row("hessian_witness").record((bound - ratio) / bound)


def _fd_hessian_of_norm_sq(z, p, h=1e-4):
    d = z.size
    H = np.zeros((d, d))
    f = lambda w: lp_norm(w, p) ** 2
    for i in range(d):
        for j in range(d):
            zz = z.copy()
            zz[i] += h; zz[j] += h; fpp = f(zz)
            zz = z.copy(); zz[i] += h; zz[j] -= h; fpm = f(zz)
            zz = z.copy(); zz[i] -= h; zz[j] += h; fmp = f(zz)
            zz = z.copy(); zz[i] -= h; zz[j] -= h; fmm = f(zz)
            H[i, j] = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
    return H


def check_invariants(cells=None, p_values=(2.0, 3.0, 4.0, math.inf),
                     iters: int = 40, l_scale: float = 1.0,
                     seeds=(0, 1)) -> InvariantReport:
    """Run every invariant over the (p x objective x seed) matrix.

    l_scale multiplies the smoothness constant handed to the optimizer
    (values below 1 deliberately violate the declared smoothness, which the
    progress check must catch).  Returns a report whose .ok drives the
    process exit code.
    """
    report = InvariantReport(rows=[CheckRow(name, tol) for name, tol in _CHECKS])
    if cells is None:
        cells = default_invariant_matrix(seeds)
    search_counts = []
    for k, p in enumerate(p_values):
        geom = LpGeometry(p)
        _check_geometry(geom, report, seed=k)
        for obj, x0 in cells:
            L = smoothness_bound(obj, geom) * l_scale
            _check_hasd_cell(obj, geom, L, np.asarray(x0, dtype=float),
                             iters, report, search_counts)
            report.cells += 1
    if search_counts:
        report.median_search_calls = float(np.median(search_counts))
        report.row("search_median").record(report.median_search_calls)
    return report
