"""Conditioning on boundary survival.

The conditioned law at finite horizon T is realized by rejection: keep the
paths that never dip below the boundary up to T. On top of that sit the
finite-T transform identity check, the survival-ratio estimates q_h, and the
plateau/divergence analysis of the time integral Phi with the explosion-time
law it induces.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from . import parallel
from .crossing import (
    CrossingScenario,
    MonteCarloEstimate,
    first_violations,
    max_deficits,
    probability_estimate,
    sample_violation_times,
)
from .levy import TransienceReport, classify_transience, tail_eval
from .paths import PathBatch, first_big_jumps
from .rng import RngStream

__all__ = [
    "ConditionedSample",
    "sample_conditioned",
    "DoobBinRow",
    "DoobReport",
    "doob_identity_check",
    "QhPoint",
    "QhReport",
    "qh_estimate",
    "ExplosionReport",
    "phi_infinity_and_explosion",
]


@dataclass(frozen=True)
class ConditionedSample:
    """Accepted paths (one flat batch), attempt count, acceptance estimate."""

    batch: PathBatch
    n_attempts: int
    acceptance: MonteCarloEstimate
    partial: bool
    horizon_t: float

    @property
    def n_accepted(self) -> int:
        return self.batch.n_paths


def _concat_batches(batches: Sequence[PathBatch]) -> PathBatch:
    if not batches:
        raise ValueError("nothing to concatenate")
    first = batches[0]
    times = np.concatenate([b.times for b in batches])
    sizes = np.concatenate([b.sizes for b in batches])
    counts = np.concatenate([np.diff(b.offsets) for b in batches])
    offsets = np.concatenate(([0], np.cumsum(counts)))
    return PathBatch(
        horizon=first.horizon,
        times=times,
        sizes=sizes,
        offsets=offsets,
        drift_slope=first.drift_slope,
        cutoff=first.cutoff,
        truncation=first.truncation,
    )


def _select_paths(batch: PathBatch, keep: np.ndarray) -> PathBatch:
    idx = np.nonzero(keep)[0]
    counts = np.diff(batch.offsets)[idx]
    pieces_t = [batch.times[batch.offsets[i] : batch.offsets[i + 1]] for i in idx]
    pieces_s = [batch.sizes[batch.offsets[i] : batch.offsets[i + 1]] for i in idx]
    times = np.concatenate(pieces_t) if pieces_t else np.empty(0)
    sizes = np.concatenate(pieces_s) if pieces_s else np.empty(0)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    return PathBatch(
        horizon=batch.horizon,
        times=times,
        sizes=sizes,
        offsets=offsets.astype(np.int64),
        drift_slope=batch.drift_slope,
        cutoff=batch.cutoff,
        truncation=batch.truncation,
    )


def sample_conditioned(
    scenario: CrossingScenario,
    t_cond: float,
    n_accept: int,
    max_attempts: int,
    rng: RngStream,
    workers: int = 1,
) -> ConditionedSample:
    """Rejection sampling of paths surviving above the boundary up to t_cond.

    Chunks are consumed in index order until the acceptance target is met, so
    the accepted set is a pure function of (seed, targets) for any worker
    count. Exhausting max_attempts returns a partial sample with the flag set.
    """
    if scenario.shift is not None:
        raise ValueError("conditioning applies to the unshifted scenario")
    if not 0.0 < t_cond <= scenario.horizon:
        raise ValueError("t_cond must lie in (0, horizon]")
    if n_accept <= 0 or max_attempts <= 0:
        raise ValueError("need positive targets")
    g = scenario.effective_boundary()

    def worker(stream: RngStream, count: int) -> Tuple[PathBatch, int]:
        batch = scenario.sample(count, stream)
        sigma = first_violations(batch, g)
        keep = sigma > t_cond
        return _select_paths(batch, keep), int(count)

    accepted: list = []
    n_attempts = 0
    n_acc = 0
    next_k = 0
    wave = max(1, workers)
    while n_acc < n_accept and n_attempts < max_attempts:
        todo = min(max_attempts - n_attempts, wave * parallel.CHUNK)
        plan = parallel.plan_chunks(todo, first_index=next_k)
        next_k = plan[-1][0] + 1
        for piece, count in parallel.run_ordered(worker, plan, rng, workers):
            # chunks past the one that reaches the target are discarded so the
            # accepted set never depends on how many were run speculatively
            if n_acc >= n_accept:
                break
            accepted.append(piece)
            n_attempts += count
            n_acc += piece.n_paths
    batch = _concat_batches(accepted)
    if n_acc > n_accept:
        # trim the tail of the last chunk, keeping acceptance order
        keep = np.zeros(batch.n_paths, dtype=bool)
        keep[:n_accept] = True
        batch = _select_paths(batch, keep)
        n_acc = n_accept
    acceptance = probability_estimate(
        float(sum(p.n_paths for p in accepted)), max(n_attempts, 1), rng.fingerprint()
    )
    return ConditionedSample(
        batch=batch,
        n_attempts=n_attempts,
        acceptance=acceptance,
        partial=n_acc < n_accept,
        horizon_t=float(t_cond),
    )


@dataclass(frozen=True)
class DoobBinRow:
    bin_lo: float
    bin_hi: float
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    z: float
    occupied: bool
    edge_spread: float  # rhs recomputed at bin edges, relative spread


@dataclass(frozen=True)
class DoobReport:
    rows: tuple
    h: float
    t_cond: float
    p_o_t: MonteCarloEstimate
    mass_in_bins: float
    n: int

    @property
    def occupied_rows(self) -> tuple:
        return tuple(r for r in self.rows if r.occupied)

    def fraction_within(self, z_max: float = 3.0) -> float:
        occ = self.occupied_rows
        if not occ:
            return float("nan")
        return float(np.mean([abs(r.z) < z_max for r in occ]))


def doob_identity_check(
    scenario: CrossingScenario,
    h: float,
    t_cond: float,
    bin_edges: Sequence[float],
    n: int,
    rng: RngStream,
    workers: int = 1,
) -> DoobReport:
    """Finite-horizon transform identity, bin by bin.

    lhs: P(X_h in bin | survival to T), from conditioned samples.
    rhs: P(shifted survival for T-h at the bin center) * P(X_h in bin and
    survival to h) / P(survival to T), three independent unconditioned runs.
    The identity is exact for the simulated process; z-scores beyond binning
    error indicate a bug, and the rhs is recomputed at both bin edges so the
    binning error itself is visible (``edge_spread``).
    """
    if not 0.0 < h < t_cond <= scenario.horizon:
        raise ValueError("need 0 < h < T <= horizon")
    edges = np.asarray(sorted(float(e) for e in bin_edges))
    if edges.size < 2:
        raise ValueError("need at least two bin edges")
    g_h = float(scenario.boundary.g(h))
    if edges[0] < g_h:
        raise ValueError("bins must start at or above g(h); below them both sides vanish")
    sc_t = replace(scenario, horizon=t_cond)

    # estimator 1: conditioned sample -> lhs histogram (n attempts)
    cond = sample_conditioned(
        sc_t, t_cond, n_accept=n, max_attempts=n, rng=rng.child("lhs"), workers=workers
    )
    x_h_cond = cond.batch.values_at(h)
    n_acc = cond.n_accepted

    # estimator 2: unconditioned run at horizon h -> joint law at h and survival to h
    sc_h = replace(scenario, horizon=h)

    def worker_joint(stream: RngStream, count: int):
        batch = sc_h.sample(count, stream)
        sigma = first_violations(batch, sc_h.effective_boundary())
        return batch.values_at(h)[np.isinf(sigma)]

    joint_vals = np.concatenate(
        parallel.run_ordered(worker_joint, parallel.plan_chunks(n), rng.child("joint"), workers)
    )

    # estimator 3: plain survival probability to T
    sigma_t = sample_violation_times(sc_t, n, rng.child("pot"), workers)
    p_t = probability_estimate(float(np.sum(np.isinf(sigma_t))), n, rng.fingerprint())

    # estimator 4: shifted survivals for every bin point from one deficit sample.
    # A path survives the boundary g(. + h) - y up to T - h exactly when its
    # max deficit sup(g(s + h) - X_s) stays below y, so every y is priced on
    # the same draws; the boundary's clamp corner is seeded explicitly.
    sc_shift = replace(scenario, horizon=t_cond - h)
    g = scenario.boundary.g

    def fn_shift(s):
        return g(np.asarray(s, dtype=float) + h)

    corner = scenario.boundary.f0 - h

    def worker_shift(stream: RngStream, count: int):
        batch = sc_shift.sample(count, stream)
        seeds = (corner,) if corner > 0.0 else ()
        return max_deficits(batch, fn_shift, seed_points=seeds)

    deficits = np.concatenate(
        parallel.run_ordered(worker_shift, parallel.plan_chunks(n), rng.child("shift"), workers)
    )

    def shifted_survival(y: float) -> Tuple[float, float]:
        if y <= g_h:
            return 1.0, 0.0
        est = probability_estimate(float(np.sum(deficits < y)), n)
        return est.value, est.std_error

    centers = np.sqrt(edges[:-1] * edges[1:])  # geometric centers for log bins
    rows = []
    mass = 0.0
    for j in range(centers.size):
        lo_e, hi_e, c = float(edges[j]), float(edges[j + 1]), float(centers[j])
        lhs_hits = float(np.sum((x_h_cond >= lo_e) & (x_h_cond < hi_e)))
        lhs = lhs_hits / max(n_acc, 1)
        lhs_se = float(np.sqrt(max(lhs * (1.0 - lhs), 0.0) / max(n_acc, 1)))
        joint_hits = float(np.sum((joint_vals >= lo_e) & (joint_vals < hi_e)))
        joint_p = joint_hits / n
        joint_se = float(np.sqrt(max(joint_p * (1.0 - joint_p), 0.0) / n))
        q_vals = {
            "c": shifted_survival(c),
            "lo": shifted_survival(lo_e),
            "hi": shifted_survival(hi_e),
        }
        q_c, q_c_se = q_vals["c"]
        rhs = q_c * joint_p / p_t.value if p_t.value > 0 else float("nan")
        # first-order error propagation across the three independent factors
        if p_t.value > 0 and joint_p > 0 and q_c > 0:
            rel = np.sqrt(
                (q_c_se / q_c) ** 2
                + (joint_se / joint_p) ** 2
                + (p_t.std_error / p_t.value) ** 2
            )
            rhs_se = rhs * float(rel)
        else:
            rhs_se = joint_se / p_t.value if p_t.value > 0 else float("nan")
        occupied = (lhs_hits + joint_hits) > 0
        # Score-style z: under the identity the lhs count is Binomial(n_acc,
        # rhs), so use the null variance, not the empirical one. With a few
        # dozen accepted paths a zero-count bin would otherwise report se 0
        # and an arbitrarily large z for a perfectly ordinary outcome.
        p0 = min(max(rhs, 0.0), 1.0) if np.isfinite(rhs) else 0.0
        lhs_var_null = p0 * (1.0 - p0) / max(n_acc, 1)
        denom = float(np.sqrt(lhs_var_null + rhs_se**2)) if np.isfinite(rhs_se) else 0.0
        z = (lhs - rhs) / denom if occupied and denom > 0 else 0.0
        edge_lo = q_vals["lo"][0] * joint_p / p_t.value if p_t.value > 0 else float("nan")
        edge_hi = q_vals["hi"][0] * joint_p / p_t.value if p_t.value > 0 else float("nan")
        spread = abs(edge_lo - edge_hi) / rhs if occupied and rhs and np.isfinite(rhs) else 0.0
        mass += lhs
        rows.append(
            DoobBinRow(
                bin_lo=lo_e, bin_hi=hi_e, lhs=lhs, lhs_se=lhs_se,
                rhs=float(rhs), rhs_se=float(rhs_se), z=float(z),
                occupied=bool(occupied), edge_spread=float(spread),
            )
        )
    return DoobReport(
        rows=tuple(rows), h=float(h), t_cond=float(t_cond),
        p_o_t=p_t, mass_in_bins=float(mass), n=n,
    )


@dataclass(frozen=True)
class QhPoint:
    t_cond: float
    numerator: MonteCarloEstimate
    denominator: MonteCarloEstimate
    ratio: float
    ratio_se: float
    flagged_infinite: bool


@dataclass(frozen=True)
class QhReport:
    y: float
    h: float
    points: tuple

    @property
    def ratios(self) -> np.ndarray:
        return np.array([p.ratio for p in self.points])

    def cauchy_gaps(self) -> list:
        """Successive differences with their combined 3-sigma allowances."""
        out = []
        for a, b in zip(self.points[:-1], self.points[1:]):
            gap = abs(b.ratio - a.ratio)
            allow = 3.0 * float(np.hypot(a.ratio_se, b.ratio_se))
            out.append((gap, allow))
        return out


def qh_estimate(
    scenario: CrossingScenario,
    h: float,
    y: float,
    t_schedule: Sequence[float],
    n: int,
    rng: RngStream,
    workers: int = 1,
) -> QhReport:
    """Ratio P(shifted survival to T-h) / P(survival to T) along a T schedule.

    The shifted numerators for every T reuse one coupled sample (one sigma per
    path serves all horizons), and likewise the denominators, so the schedule
    trend is monotone-noise-free; numerator and denominator streams stay
    independent for a clean ratio standard error.
    """
    if h <= 0.0 or y <= float(scenario.boundary.g(h)):
        raise ValueError("need h > 0 and y > g(h)")
    ts = sorted(float(t) for t in t_schedule)
    if not ts or ts[-1] > scenario.horizon:
        raise ValueError("schedule must be nonempty and within the horizon")
    shifted = scenario.with_shift(y, h)
    sig_num = sample_violation_times(shifted, n, rng.child("num"), workers)
    sig_den = sample_violation_times(scenario, n, rng.child("den"), workers)
    points = []
    for t in ts:
        num = probability_estimate(float(np.sum(sig_num > t - h)), n)
        den = probability_estimate(float(np.sum(sig_den > t)), n)
        if den.value == 0.0:
            points.append(
                QhPoint(t_cond=t, numerator=num, denominator=den,
                        ratio=float("inf"), ratio_se=float("inf"), flagged_infinite=True)
            )
            continue
        ratio = num.value / den.value
        if num.value > 0:
            rel = np.hypot(num.std_error / num.value, den.std_error / den.value)
            ratio_se = ratio * float(rel)
        else:
            ratio_se = num.std_error / den.value
        points.append(
            QhPoint(t_cond=t, numerator=num, denominator=den,
                    ratio=float(ratio), ratio_se=float(ratio_se), flagged_infinite=False)
        )
    return QhReport(y=float(y), h=float(h), points=tuple(points))


@dataclass(frozen=True)
class ExplosionReport:
    verdict: str  # "Converged" or "Divergent"
    phi_infinity: Optional[float]
    phi_grid: tuple  # (t, phi) pairs on the doubling grid
    increments: tuple  # relative increments per doubling
    criterion: TransienceReport
    consistent: bool
    cdf_grid: tuple  # (s, F) pairs, transient case only
    n: int

    def cdf(self, s) -> np.ndarray:
        if not self.cdf_grid:
            raise ValueError("explosion CDF only exists in the transient case")
        ts, fs = np.array(self.cdf_grid).T
        return np.interp(np.asarray(s, dtype=float), ts, fs, left=0.0, right=1.0)

    def sample_explosion_times(self, rng: RngStream, n: int) -> np.ndarray:
        """Inverse-CDF draws of the explosion time."""
        if not self.cdf_grid:
            raise ValueError("explosion CDF only exists in the transient case")
        ts, fs = np.array(self.cdf_grid).T
        u = rng.generator().random(n)
        return np.interp(u, fs, ts)


def phi_infinity_and_explosion(
    scenario: CrossingScenario,
    n: int,
    rng: RngStream,
    plateau_tol: float = 0.01,
    t_start: float = 2.5,
    workers: int = 1,
    cdf_points: int = 129,
) -> ExplosionReport:
    """Plateau-or-diverge analysis of Phi with the explosion-time law.

    Phi is tracked on a doubling grid inside the scenario horizon; it counts
    as converged when the relative increment stays below plateau_tol for two
    consecutive doublings. The verdict must agree with the integral criterion
    verdict; the report carries both plus the consistency flag. In the
    transient case the explosion-time CDF is Phi(s)/Phi(inf) on a fine grid.
    """
    grid = [t_start]
    while grid[-1] * 2.0 <= scenario.horizon:
        grid.append(grid[-1] * 2.0)
    if len(grid) < 3:
        raise ValueError("horizon too short for a doubling plateau analysis")
    sigma = sample_violation_times(scenario, n, rng.child("sigma"), workers)
    phis = [float(np.mean(np.minimum(sigma, t))) for t in grid]
    increments = []
    verdict = "Divergent"
    for k in range(1, len(grid)):
        inc = (phis[k] - phis[k - 1]) / phis[k]
        increments.append(float(inc))
        if k >= 2 and increments[-1] < plateau_tol and increments[-2] < plateau_tol:
            verdict = "Converged"
    phi_inf = float(np.mean(np.minimum(sigma, grid[-1]))) if verdict == "Converged" else None
    criterion = classify_transience(scenario.model, scenario.boundary)
    consistent = (verdict == "Converged") == criterion.is_transient
    cdf_grid = ()
    if verdict == "Converged":
        s_grid = np.geomspace(grid[0] / 8.0, grid[-1], cdf_points)
        s_grid = np.unique(np.concatenate(([0.0], s_grid)))
        f_vals = np.array([np.mean(np.minimum(sigma, s)) for s in s_grid]) / phi_inf
        cdf_grid = tuple((float(s), float(f)) for s, f in zip(s_grid, f_vals))
    return ExplosionReport(
        verdict=verdict,
        phi_infinity=phi_inf,
        phi_grid=tuple((float(t), float(p)) for t, p in zip(grid, phis)),
        increments=tuple(increments),
        criterion=criterion,
        consistent=bool(consistent),
        cdf_grid=cdf_grid,
        n=n,
    )


def conditioned_tail_fraction(
    cond: ConditionedSample,
    h: float,
    threshold: float,
) -> MonteCarloEstimate:
    """Fraction of conditioned paths with X_h at or above a threshold."""
    vals = cond.batch.values_at(h)
    if vals.size == 0:
        raise ValueError("no accepted paths")
    hits = float(np.sum(vals >= threshold))
    return probability_estimate(hits, vals.size)


def big_jump_after(
    cond: ConditionedSample,
    threshold: float,
    h: float,
) -> MonteCarloEstimate:
    """Fraction of conditioned paths whose first jump above threshold is after h."""
    t_big, _ = first_big_jumps(cond.batch, threshold)
    if t_big.size == 0:
        raise ValueError("no accepted paths")
    hits = float(np.sum(t_big > h))
    return probability_estimate(hits, t_big.size)
