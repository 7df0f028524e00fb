"""Experiment harness: configuration, Monte Carlo with replicate-keyed
streams, bound-verification campaigns, and figure-data regeneration.

Every experiment derives the stream of replicate r from
(master_seed, r), so estimates are bit-identical for any worker count
and any scheduling order.
"""

import concurrent.futures
import configparser
import csv
import json
import math
from dataclasses import dataclass, field, replace

import mpmath as mp
import numpy as np

from . import bounds as bc
from . import meanfield as mf
from .branching import (agresti_duration_bounds, extinction_prob,
                        gw_extinct_by, lindvall_max_bound)
from .coupling import (simulate_coupled, step_coupled_maximal, tv_exact,
                       step_divergence_bound, _poisson_pmf_truncated)
from .exact import (PrecisionConfig, SubstochasticSystem, build_q_float,
                    expected_duration, expected_size)
from .model import ModelParams, kernel_row, simulate_count
from .rng import replicate_rng

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated command parameters plus seed and output location."""

    n: int = 100
    p: float | None = None
    c: float | None = None
    i0: int = 1
    lam: float = 1.0
    replicates: int = 10 ** 4
    master_seed: int = 20260823
    workers: int = 1
    digits: int = 400
    out: str | None = None
    max_steps: int = 10 ** 6
    c_list: tuple = (0.9, 1.0, 1.1, 1.3)
    i0_max: int = 50

    def __post_init__(self):
        if self.p is not None and self.c is not None:
            raise ValueError("give either p or c = n*p, not both")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if self.workers < 1:
            raise ValueError("need at least one worker")

    def model(self) -> ModelParams:
        if self.p is not None:
            return ModelParams(self.n, self.p)
        if self.c is not None:
            return ModelParams.from_intensity(self.n, self.c)
        raise ValueError("one of p or c must be set")

    @classmethod
    def from_file(cls, path: str, **overrides) -> "ExperimentConfig":
        """Load a key-value config file; keyword overrides win."""
        parser = configparser.ConfigParser()
        with open(path) as fh:
            parser.read_file(fh)
        sec = parser["experiment"] if parser.has_section("experiment") \
            else parser[parser.default_section]
        kwargs = {}
        for key in ("n", "i0", "replicates", "master_seed", "workers",
                    "digits", "max_steps", "i0_max"):
            if key in sec:
                kwargs[key] = sec.getint(key)
        for key in ("p", "c", "lam"):
            if key in sec:
                kwargs[key] = sec.getfloat(key)
        if "out" in sec:
            kwargs["out"] = sec.get("out")
        if "c_list" in sec:
            kwargs["c_list"] = tuple(
                float(v) for v in sec.get("c_list").split(","))
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)


@dataclass(frozen=True)
class EstimateWithCI:
    """Monte Carlo point estimate with its standard error."""

    point: float
    stderr: float
    replicates: int
    level: float = 0.99

    @classmethod
    def from_samples(cls, samples: np.ndarray,
                     level: float = 0.99) -> "EstimateWithCI":
        x = np.asarray(samples, dtype=float)
        k = len(x)
        sd = x.std(ddof=1) if k > 1 else 0.0
        return cls(float(x.mean()), float(sd / math.sqrt(k)), k, level)

    def interval(self) -> tuple[float, float]:
        from scipy.stats import norm
        z = norm.ppf(0.5 + self.level / 2.0)
        return self.point - z * self.stderr, self.point + z * self.stderr


def _trajectory_chunk(args):
    n, p, i0, seed, lo, hi, max_steps = args
    params = ModelParams(n, p)
    out = np.empty((hi - lo, 4), dtype=np.int64)
    for r in range(lo, hi):
        t = simulate_count(params, i0, replicate_rng(seed, r), max_steps)
        out[r - lo] = (t.duration, t.size, t.max, int(t.truncated))
    return lo, out


def run_trajectories(params: ModelParams, i0: int, replicates: int,
                     master_seed: int, workers: int = 1,
                     max_steps: int = 10 ** 6) -> np.ndarray:
    """Simulate; returns an array of (T, S, max, truncated) rows.

    Row r always comes from the stream keyed (master_seed, r),
    regardless of how the chunks are scheduled.
    """
    chunk = max(1, math.ceil(replicates / max(workers * 4, 1)))
    tasks = [(params.n, params.p, i0, master_seed, lo,
              min(lo + chunk, replicates), max_steps)
             for lo in range(0, replicates, chunk)]
    out = np.empty((replicates, 4), dtype=np.int64)
    if workers == 1:
        for task in tasks:
            lo, block = _trajectory_chunk(task)
            out[lo: lo + len(block)] = block
    else:
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            for lo, block in pool.map(_trajectory_chunk, tasks):
                out[lo: lo + len(block)] = block
    return out


def mc_size_pmf(stats: np.ndarray, j_max: int) -> np.ndarray:
    """Empirical pmf of the total size over 0..j_max (non-truncated rows)."""
    ok = stats[:, 3] == 0
    sizes = stats[ok, 1]
    return np.bincount(np.clip(sizes, 0, j_max), minlength=j_max + 1) \
        / ok.sum()


def survival_fraction(params: ModelParams, i0: int, replicates: int,
                      master_seed: int, m: int,
                      workers: int = 1) -> EstimateWithCI:
    """Monte Carlo estimate of P(T > m)."""
    stats = run_trajectories(params, i0, replicates, master_seed,
                             workers, max_steps=m + 1)
    return EstimateWithCI.from_samples(stats[:, 0] > m)


def reach_fraction(params: ModelParams, i0: int, j_level: int,
                   replicates: int, master_seed: int,
                   workers: int = 1) -> EstimateWithCI:
    """Monte Carlo estimate of P(max_k X_k >= j_level)."""
    stats = run_trajectories(params, i0, replicates, master_seed, workers)
    return EstimateWithCI.from_samples(stats[:, 2] >= j_level)


def first_passage_fraction(params: ModelParams, i0: int, j_level: int,
                           replicates: int, master_seed: int,
                           max_steps: int = 1000) -> EstimateWithCI:
    """Monte Carlo estimate of P(hit [j_level, n] before 0 | X_0 = i0).

    Runs all replicates in vectorized lockstep and freezes each one as
    soon as it is decided.  Unlike full-absorption simulation this stays
    cheap in the supercritical regime, where surviving paths settle into
    a quasi-equilibrium and would otherwise run for an astronomical
    number of steps.  Raises if any replicate is still undecided at the
    cap (hovering strictly between 0 and the level).
    """
    rng = replicate_rng(master_seed, 0)
    n = params.n
    logq = math.log1p(-params.p)
    x = np.full(replicates, i0, dtype=np.int64)
    reached = np.zeros(replicates, dtype=bool)
    for _ in range(max_steps):
        active = (x > 0) & ~reached
        if not active.any():
            break
        xa = x[active]
        s = -np.expm1(xa * logq)
        xa = rng.binomial(n - xa, s)
        reached[np.flatnonzero(active)[xa >= j_level]] = True
        x[active] = xa
    else:
        undecided = int(((x > 0) & ~reached).sum())
        if undecided:
            raise ArithmeticError(
                f"{undecided} replicates undecided after {max_steps} steps")
    return EstimateWithCI.from_samples(reached)


def simulate_scaled_chain(params: ModelParams, x0_count: int, steps: int,
                          replicates: int, master_seed: int) -> np.ndarray:
    """Replicated paths of X_k/n; shape (replicates, steps + 1).

    All replicates advance in lockstep from one auxiliary stream keyed
    to the experiment; suited to the distribution-level checks where
    only the ensemble law matters.
    """
    rng = replicate_rng(master_seed, 0)
    x = np.full(replicates, x0_count, dtype=np.int64)
    path = np.empty((replicates, steps + 1))
    path[:, 0] = x / params.n
    logq = math.log1p(-params.p)
    for k in range(steps):
        s = -np.expm1(x * logq)
        x = rng.binomial(params.n - x, s)
        path[:, k + 1] = x / params.n
    return path


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def cmd_simulate(config: ExperimentConfig) -> dict:
    """Trajectory statistics CSV plus a summary with CIs."""
    params = config.model()
    stats = run_trajectories(params, config.i0, config.replicates,
                             config.master_seed, config.workers,
                             config.max_steps)
    ok = stats[:, 3] == 0
    summary = {
        "duration": EstimateWithCI.from_samples(stats[ok, 0]),
        "size": EstimateWithCI.from_samples(stats[ok, 1]),
        "max": EstimateWithCI.from_samples(stats[ok, 2]),
        "truncated": int((~ok).sum()),
    }
    if config.out:
        rows = [[r, *stats[r]] for r in range(len(stats))]
        for name in ("duration", "size", "max"):
            est = summary[name]
            rows.append([f"summary_{name}", est.point, est.stderr,
                         est.replicates, ""])
        rows.append(["summary_truncated", summary["truncated"], "", "", ""])
        write_csv(config.out, ["replicate", "T", "S", "max", "truncated"],
                  rows)
    return summary


def cmd_exact(config: ExperimentConfig) -> dict:
    """Expected duration and size vectors at the configured precision."""
    params = config.model()
    system = SubstochasticSystem(params, PrecisionConfig(config.digits))
    et = expected_duration(system)
    es = expected_size(system)
    if config.out:
        rows = [[i + 1, mp.nstr(et[i], config.digits),
                 mp.nstr(es[i], config.digits)]
                for i in range(params.n - 1)]
        write_csv(config.out, ["i", "expected_duration", "expected_size"],
                  rows)
    return {"expected_duration": et, "expected_size": es,
            "digits": config.digits}


def figure_curves(n: int, c_list, i0_max: int, digits: int) -> dict:
    """E(T | X_0 = i0) curves, one per intensity, i0 = 1..i0_max."""
    curves = {}
    i0_max = min(i0_max, n - 1)
    for c in c_list:
        params = ModelParams.from_intensity(n, c)
        system = SubstochasticSystem(params, PrecisionConfig(digits))
        et = expected_duration(system)
        curves[c] = [float(et[i0 - 1]) for i0 in range(1, i0_max + 1)]
    return curves


def check_figure_shape(curves: dict, n: int) -> list[str]:
    """Shape assertions on the duration curves; returns failure messages.

    The subcritical curve must grow in i0, and at larger intensities
    the curve must flatten: the relative spread over i0 >= 2 must
    shrink as c grows through the transition.
    """
    problems = []
    cs = sorted(curves)
    lowest = curves[cs[0]]
    # growth check stops at half range: for very large i0 the avalanche
    # burns through the network quickly and the curve bends down again
    half = lowest[: max(2, len(lowest) // 2)]
    if any(b < a for a, b in zip(half, half[1:])):
        problems.append(f"curve c={cs[0]} is not nondecreasing in i0")

    def spread(vals):
        tail = vals[1:]
        return (max(tail) - min(tail)) / max(tail)

    if spread(curves[cs[-1]]) >= spread(curves[cs[0]]):
        problems.append(
            f"flattening failed: spread at c={cs[-1]} is not below c={cs[0]}")
    return problems


def cmd_figure(config: ExperimentConfig) -> dict:
    """Regenerate the duration-vs-seed-size figure data."""
    curves = figure_curves(config.n, config.c_list, config.i0_max,
                           config.digits)
    problems = check_figure_shape(curves, config.n)
    if config.out:
        rows = [[c, i0, val]
                for c in config.c_list
                for i0, val in enumerate(curves[c], start=1)]
        write_csv(config.out, ["c", "i0", "expected_duration"], rows)
    if problems:
        raise AssertionError("; ".join(problems))
    return curves


def _drift_reports(params: ModelParams) -> list[bc.BoundReport]:
    """Exact one-step supermartingale and heterogeneity drift checks."""
    n, c = params.n, params.c
    j = np.arange(n + 1, dtype=float)
    worst_mean, worst_het = -math.inf, -math.inf
    for i in range(1, n):
        row = kernel_row(params, i)
        worst_mean = max(worst_mean, float(row @ j) - c * i)
        worst_het = max(worst_het,
                        float(row @ (j * (n - j))) - c * i * (n - i))
    reports = [
        bc.BoundReport("supermartingale_drift", {"n": n, "p": params.p},
                       upper=0.0, reference_value=worst_mean,
                       reference_error=1e-9 * n * c).judge(),
        bc.BoundReport("heterogeneity_drift", {"n": n, "p": params.p},
                       upper=0.0, reference_value=worst_het,
                       reference_error=1e-9 * n * n * c).judge(),
    ]
    return reports


def _float_survival(params: ModelParams, m_max: int) -> np.ndarray:
    """P(T > m | X_0 = i) for m = 0..m_max, shape (m_max+1, n-1), float64."""
    q = build_q_float(params)
    v = np.ones(params.n - 1)
    out = [v]
    for _ in range(m_max):
        v = q @ v
        out.append(v)
    return np.array(out)


def verify_campaign(n_grid=(50, 100, 200), c_grid=(0.5, 1.0, 1.5, 2.0),
                    i0_grid=(1, 2)) -> list[bc.BoundReport]:
    """Run every applicable bound against exact comparators on a grid."""
    reports = []
    for c in c_grid:
        for i0 in i0_grid:
            for m in (1, 3, 5, 10):
                lo, hi = agresti_duration_bounds(c, i0, m)
                reports.append(bc.BoundReport(
                    "agresti_sandwich", {"c": c, "i0": i0, "m": m},
                    lower=lo, upper=hi,
                    reference_value=gw_extinct_by(c, i0, m),
                    reference_error=1e-12).judge())
    for n in n_grid:
        for c in c_grid:
            params = ModelParams.from_intensity(n, c)
            reports.extend(_drift_reports(params))
            surv = _float_survival(params, 10)
            q = build_q_float(params)
            eye = np.eye(n - 1)
            et = np.linalg.solve(eye - q, np.ones(n - 1))
            es = np.linalg.solve(eye - q, np.arange(1.0, n))
            for i0 in i0_grid:
                eh0 = i0 * (n - i0)
                for k in (1, 3, 5):
                    exact_mean = float(
                        kernel_power_mean(params, i0, k))
                    reports.append(bc.BoundReport(
                        "mean_decay", {"n": n, "c": c, "i0": i0, "k": k},
                        upper=bc.mean_decay_bound(params, eh0, k),
                        reference_value=exact_mean,
                        reference_error=1e-9).judge())
                    naive, refined = bc.survival_bounds(params, eh0, k)
                    reports.append(bc.BoundReport(
                        "survival_naive", {"n": n, "c": c, "i0": i0, "k": k},
                        upper=naive, reference_value=float(surv[k][i0 - 1]),
                        reference_error=1e-9).judge())
                    if refined <= 1.0:
                        reports.append(bc.BoundReport(
                            "survival_refined",
                            {"n": n, "c": c, "i0": i0, "k": k},
                            upper=refined,
                            reference_value=float(surv[k][i0 - 1]),
                            reference_error=1e-9).judge())
                if c < 1.0:
                    lo, hi = bc.size_bounds_single(
                        params, float(i0), float(i0 * i0), c)
                    reports.append(bc.BoundReport(
                        "size_sandwich", {"n": n, "c": c, "i0": i0},
                        lower=lo, upper=hi,
                        reference_value=float(es[i0 - 1]),
                        reference_error=1e-8).judge())
                for m in (1, 3, 5):
                    rep = bc.duration_bounds_single(params, i0, m)
                    rep.reference_value = 1.0 - float(surv[m][i0 - 1])
                    rep.reference_error = 1e-8
                    reports.append(rep.judge())
                if c <= 1.0:
                    for m in (max(5, i0 + 1), 10, 15):
                        tail = reach_probability_float(params, m + 1)
                        ref = float(tail[i0 - 1]) if i0 <= m else 1.0
                        if c == 1.0:
                            rep = bc.maxima_bounds(params, i0, m)
                            rep.reference_value = ref
                            rep.reference_error = 1e-8
                            reports.append(rep.judge())
                        else:
                            reports.append(bc.BoundReport(
                                "lindvall_max",
                                {"n": n, "c": c, "i0": i0, "m": m},
                                upper=lindvall_max_bound(c, i0, m + 1),
                                reference_value=ref,
                                reference_error=1e-8,
                                note="asymptotic bound checked at finite n"
                            ).judge())
    return reports


def kernel_power_mean(params: ModelParams, i0: int, k: int) -> float:
    """Exact E(X_k | X_0 = i0) by iterating the kernel on the identity."""
    n = params.n
    v = np.arange(n + 1, dtype=float)  # E(X_k | X_{k} = j) = j at depth 0
    for _ in range(k):
        w = np.empty(n + 1)
        w[0] = 0.0
        w[n] = 0.0
        for i in range(1, n):
            row = kernel_row(params, i)
            w[i] = float(row @ v)
        v = w
    return v[i0]


def reach_probability_float(params: ModelParams, j_level: int) -> np.ndarray:
    """float64 P(max >= j_level | X_0 = i), i = 1..j_level-1."""
    n = params.n
    if j_level > n:
        return np.zeros(max(j_level - 1, 0))
    rows = [kernel_row(params, i) for i in range(1, j_level)]
    q = np.array([r[1: j_level] for r in rows])
    b = np.array([r[j_level:].sum() for r in rows])
    return np.linalg.solve(np.eye(j_level - 1) - q, b)


def cmd_verify(config: ExperimentConfig) -> dict:
    """Bound-verification campaign; nonzero exit iff a report is violated."""
    reports = verify_campaign()
    counts = {bc.HOLDS: 0, bc.VIOLATED: 0, bc.INCONCLUSIVE: 0}
    for rep in reports:
        counts[rep.satisfied] += 1
    bundle = {"schema_version": SCHEMA_VERSION,
              "counts": counts,
              "reports": [r.to_dict() for r in reports]}
    if config.out:
        with open(config.out, "w") as fh:
            json.dump(bundle, fh, indent=1)
    return bundle


def cmd_deterministic(config: ExperimentConfig) -> dict:
    """Mean-field tables and (for lam > 1) the contraction parameters."""
    lam = config.lam
    psi0 = min(max(config.i0 / config.n, 1e-9), 1.0 - 1e-9)
    path = mf.iterate_mean_field(lam, psi0)
    model = mf.FluctuationModel.from_initial(lam, psi0, len(path.psi) - 1)
    rows = [[k, path.psi[k], path.phi[k], path.branching_factor[k],
             model.variances[k]] for k in range(len(path.psi))]
    out = {"limit": mf.mean_field_limit(lam, psi0), "rows": rows}
    if lam > 1.0:
        si = mf.stability_interval(lam)
        out["stability"] = {"a": si.a, "b": si.b, "eps": si.eps,
                            "rho": si.rho, "gamma": si.gamma}
    if config.out:
        write_csv(config.out, ["k", "psi", "phi", "branching_factor",
                               "innovation_variance"], rows)
    return out


def cmd_couple(config: ExperimentConfig) -> dict:
    """Monotone-coupling campaign: dominance, sizes, divergence rates."""
    params = config.model()
    c = params.c
    viol = 0
    sx, sz = [], []
    for r in range(config.replicates):
        path = simulate_coupled(params, c, config.i0,
                                replicate_rng(config.master_seed, r))
        if not path.dominated:
            viol += 1
        if not path.truncated:
            sx.append(int(path.x_seq.sum()))
            sz.append(int(path.z_seq.sum()))
    i = max(config.i0, 1)
    diverged = 0
    rng = replicate_rng(config.master_seed, config.replicates + 1)
    probes = min(config.replicates, 10 ** 5)
    for _ in range(probes):
        _, _, dv = step_coupled_maximal(params, i, rng)
        diverged += dv
    tv = tv_exact(kernel_row(params, i), _poisson_pmf_truncated(c * i))
    return {
        "dominance_violations": viol,
        "size_x": EstimateWithCI.from_samples(np.array(sx)),
        "size_z": EstimateWithCI.from_samples(np.array(sz)),
        "divergence_rate": EstimateWithCI.from_samples(
            np.concatenate([np.ones(diverged), np.zeros(probes - diverged)])),
        "divergence_tv": tv,
        "divergence_envelope": step_divergence_bound(c, i, params.n),
    }
