"""Boundary-crossing machinery.

A sampled path is piecewise linear between jumps, and the boundary g is
nondecreasing, so the first time the path dips below g can be bracketed by
interval certificates and resolved by bisection: no grid, no missed dips
wider than the tolerance. Everything downstream (survival probabilities,
their time integral, the ratio diagnostics) is built on one coupled sample
of first-violation times.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from . import parallel
from .levy import BoundaryPair, SubordinatorModel, shifted_boundary, tail_eval
from .levy import _quad  # shared quadrature wrapper
from .paths import PathBatch, SamplePath, sample_batch
from .rng import RngStream

__all__ = [
    "CrossingScenario",
    "MonteCarloEstimate",
    "first_violations",
    "violation_time",
    "sample_violation_times",
    "CrossingRow",
    "CrossingCurve",
    "estimate_crossing",
    "DiagnosticRow",
    "DiagnosticsTable",
    "asymptotic_diagnostics",
]

NO_VIOLATION = float("inf")


@dataclass(frozen=True)
class CrossingScenario:
    """A model, a boundary, optional (y, h) shift, and simulation settings."""

    model: SubordinatorModel
    boundary: BoundaryPair
    cutoff: float
    horizon: float
    shift: Optional[Tuple[float, float]] = None  # (y, h)
    truncation: Optional[float] = None

    def __post_init__(self) -> None:
        if self.cutoff <= 0.0:
            raise ValueError("cutoff must be positive")
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        if self.shift is not None:
            y, h = self.shift
            if h <= 0.0:
                raise ValueError("shift needs h > 0")
            if y <= float(self.boundary.g(h)):
                raise ValueError("shift needs y > g(h); smaller y degenerates the event")

    def effective_boundary(self) -> Callable:
        if self.shift is None:
            return self.boundary.g
        y, h = self.shift
        return shifted_boundary(self.boundary, y, h)

    def with_shift(self, y: float, h: float) -> "CrossingScenario":
        return CrossingScenario(
            model=self.model,
            boundary=self.boundary,
            cutoff=self.cutoff,
            horizon=self.horizon,
            shift=(y, h),
            truncation=self.truncation,
        )

    def sample(self, n: int, rng: RngStream) -> PathBatch:
        return sample_batch(
            self.model, self.horizon, self.cutoff, n, rng, truncation=self.truncation
        )


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    std_error: float
    n: int
    fingerprint: str = ""

    def __post_init__(self) -> None:
        if self.std_error < 0.0 or self.n <= 0:
            raise ValueError("bad estimate fields")


def probability_estimate(hits: float, n: int, fingerprint: str = "") -> MonteCarloEstimate:
    p = hits / n
    if not 0.0 <= p <= 1.0:
        raise ValueError("probability estimate outside [0, 1]")
    se = float(np.sqrt(p * (1.0 - p) / n))
    return MonteCarloEstimate(value=float(p), std_error=se, n=n, fingerprint=fingerprint)


def _interval_arrays(batch: PathBatch):
    """Flat interval decomposition of a batch.

    Path i with jumps at tau_1..tau_k becomes intervals
    [0,tau_1), [tau_1,tau_2), ..., [tau_k, horizon]; the value at each
    interval start is the post-jump value. Per-path cumulative sums are
    rebuilt path by path: a single flat cumsum would leak rounding error
    from one path's huge jumps into every later path of the batch.
    """
    off = np.asarray(batch.offsets, dtype=np.int64)
    n = batch.n_paths
    counts = np.diff(off)
    m = int(batch.times.size) + n
    off2 = off + np.arange(n + 1, dtype=np.int64)
    lead = off2[:-1]
    mask = np.ones(m, dtype=bool)
    mask[lead] = False
    lo = np.zeros(m)
    lo[mask] = batch.times
    hi = np.empty(m)
    if m > 1:
        hi[:-1] = lo[1:]
    hi[off2[1:] - 1] = batch.horizon
    percum = np.zeros(m)
    for i in range(n):
        a, b = int(off[i]), int(off[i + 1])
        if b > a:
            percum[lead[i] + 1 : lead[i] + 1 + (b - a)] = np.cumsum(batch.sizes[a:b])
    xlo = batch.drift_slope * lo + percum
    pid = np.repeat(np.arange(n), counts + 1)
    return pid, lo, hi, xlo


def first_violations(
    batch: PathBatch,
    g: Callable,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> np.ndarray:
    """First time each path falls strictly below g, inf when it never does.

    Certificate pass per iteration: an interval is safe when its starting
    value already clears g at the right end, violated at its start when the
    starting value is below g there, and ambiguous otherwise. Ambiguous
    intervals are halved until narrower than ``tol``, where a midpoint and a
    left-limit check settle them. Requires g nondecreasing; dips narrower
    than ``tol`` may be missed, anything wider cannot.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    q_pid, q_lo, q_hi, q_x = _interval_arrays(batch)
    slope = batch.drift_slope
    cand = np.full(batch.n_paths, NO_VIOLATION)
    for _ in range(max_iter):
        if q_pid.size == 0:
            return cand
        keep = q_lo < cand[q_pid]
        if not np.all(keep):
            q_pid, q_lo, q_hi, q_x = q_pid[keep], q_lo[keep], q_hi[keep], q_x[keep]
            if q_pid.size == 0:
                return cand
        g_lo = np.asarray(g(q_lo), dtype=float)
        viol = q_x < g_lo
        if np.any(viol):
            np.minimum.at(cand, q_pid[viol], q_lo[viol])
        g_hi = np.asarray(g(q_hi), dtype=float)
        amb = ~viol & (q_x < g_hi)
        width = q_hi - q_lo
        term = amb & (width < tol)
        if np.any(term):
            t_lo, t_hi, t_x, t_pid = q_lo[term], q_hi[term], q_x[term], q_pid[term]
            mid = 0.5 * (t_lo + t_hi)
            hit_mid = t_x + slope * (mid - t_lo) < np.asarray(g(mid), dtype=float)
            if np.any(hit_mid):
                np.minimum.at(cand, t_pid[hit_mid], mid[hit_mid])
            # left-limit check at the right end for the rest
            rest = ~hit_mid
            if np.any(rest):
                x_end = t_x[rest] + slope * (t_hi[rest] - t_lo[rest])
                hit_end = x_end < np.asarray(g(t_hi[rest]), dtype=float)
                if np.any(hit_end):
                    np.minimum.at(cand, t_pid[rest][hit_end], t_hi[rest][hit_end])
        split = amb & ~term
        if not np.any(split):
            q_pid = q_pid[:0]
            continue
        s_pid, s_lo, s_hi, s_x = q_pid[split], q_lo[split], q_hi[split], q_x[split]
        mid = 0.5 * (s_lo + s_hi)
        x_mid = s_x + slope * (mid - s_lo)
        q_pid = np.concatenate((s_pid, s_pid))
        q_lo = np.concatenate((s_lo, mid))
        q_hi = np.concatenate((mid, s_hi))
        q_x = np.concatenate((s_x, x_mid))
    raise RuntimeError("violation refinement did not converge (max_iter too small for tol)")


def max_deficits(
    batch: PathBatch,
    fn: Callable,
    tol: float = 1e-9,
    seed_points: Sequence[float] = (),
    max_iter: int = 200,
) -> np.ndarray:
    """Per-path supremum of fn(s) - X_s over [0, horizon], fn nondecreasing.

    Branch and bound: an interval's deficit is at most fn(right end) minus the
    value at its left end; intervals that cannot beat the incumbent by more
    than ``tol`` are pruned, the rest are halved with midpoint evaluations.
    A path survives the boundary fn - y exactly when the returned supremum is
    below y, so one call prices every shift level y at once. ``seed_points``
    forces pointwise evaluations (pass known jump locations of fn; otherwise
    a jump riding inside a sub-tol interval can hide its upper branch).
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    q_pid, q_lo, q_hi, q_x = _interval_arrays(batch)
    slope = batch.drift_slope
    best = np.full(batch.n_paths, -np.inf)
    np.maximum.at(best, q_pid, np.asarray(fn(q_lo), dtype=float) - q_x)
    for s in seed_points:
        if 0.0 <= s <= batch.horizon:
            best = np.maximum(best, float(fn(s)) - batch.values_at(s))
    # the prune slack needs a relative part: at deficit scale D an absolute
    # tolerance below ulp(D) would never trigger
    width_floor = 1e-12 * max(batch.horizon, 1.0)
    for _ in range(max_iter):
        if q_pid.size == 0:
            return best
        upper = np.asarray(fn(q_hi), dtype=float) - q_x
        incumbent = best[q_pid]
        keep = upper > incumbent + tol + 1e-12 * np.abs(incumbent)
        q_pid, q_lo, q_hi, q_x = q_pid[keep], q_lo[keep], q_hi[keep], q_x[keep]
        if q_pid.size == 0:
            return best
        mid = 0.5 * (q_lo + q_hi)
        x_mid = q_x + slope * (mid - q_lo)
        np.maximum.at(best, q_pid, np.asarray(fn(mid), dtype=float) - x_mid)
        grow = (q_hi - q_lo) > width_floor
        q_pid = np.concatenate((q_pid[grow], q_pid[grow]))
        q_lo = np.concatenate((q_lo[grow], mid[grow]))
        q_hi = np.concatenate((mid[grow], q_hi[grow]))
        q_x = np.concatenate((q_x[grow], x_mid[grow]))
    raise RuntimeError("deficit refinement did not converge (max_iter too small for tol)")


def violation_time(path: SamplePath, scenario: CrossingScenario, tol: float = 1e-10) -> float:
    """First violation time of one path, inf when the path never crosses."""
    if path.horizon < scenario.horizon:
        raise ValueError("path horizon shorter than the scenario horizon")
    batch = PathBatch(
        horizon=path.horizon,
        times=path.times,
        sizes=path.sizes,
        offsets=np.array([0, path.times.size], dtype=np.int64),
        drift_slope=path.drift_slope,
        cutoff=path.cutoff,
        truncation=path.truncation,
    )
    return float(first_violations(batch, scenario.effective_boundary(), tol=tol)[0])


def sample_violation_times(
    scenario: CrossingScenario,
    n: int,
    rng: RngStream,
    workers: int = 1,
    tol: float = 1e-10,
) -> np.ndarray:
    """n coupled first-violation times, deterministic in (seed, n)."""
    g = scenario.effective_boundary()

    def worker(stream: RngStream, count: int) -> np.ndarray:
        batch = scenario.sample(count, stream)
        return first_violations(batch, g, tol=tol)

    chunks = parallel.run_ordered(worker, parallel.plan_chunks(n), rng, workers)
    return np.concatenate(chunks)


@dataclass(frozen=True)
class CrossingRow:
    u: float
    p: float
    p_se: float
    phi: float
    phi_se: float


@dataclass(frozen=True)
class CrossingCurve:
    rows: tuple
    n: int
    fingerprint: str

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def _curve_from_sigma(sigma: np.ndarray, u_grid: Sequence[float], fingerprint: str) -> CrossingCurve:
    n = sigma.size
    rows = []
    for u in u_grid:
        p = float(np.mean(sigma > u))
        p_se = float(np.sqrt(p * (1.0 - p) / n))
        capped = np.minimum(sigma, u)
        phi = float(np.mean(capped))
        phi_se = float(np.std(capped, ddof=1) / np.sqrt(n))
        rows.append(CrossingRow(u=float(u), p=p, p_se=p_se, phi=phi, phi_se=phi_se))
    return CrossingCurve(rows=tuple(rows), n=n, fingerprint=fingerprint)


def estimate_crossing(
    scenario: CrossingScenario,
    u_grid: Sequence[float],
    n: int,
    rng: RngStream,
    workers: int = 1,
) -> CrossingCurve:
    """P(O_u) and Phi(u) on a grid from one coupled sample.

    One path yields one violation time sigma; P(O_u) is the fraction with
    sigma > u and Phi(u) the mean of min(sigma, u) (Fubini identity), so the
    curves are exactly monotone in u before any noise enters.
    """
    if n <= 0:
        raise ValueError("need replicates")
    grid = [float(u) for u in u_grid]
    if not grid or max(grid) > scenario.horizon:
        raise ValueError("u_grid must be nonempty and lie within the horizon")
    sigma = sample_violation_times(scenario, n, rng, workers)
    return _curve_from_sigma(sigma, grid, rng.fingerprint())


@dataclass(frozen=True)
class DiagnosticRow:
    t: float
    p_o: float
    p_o_se: float
    phi: float
    phi_se: float
    tail_g: float
    rho: float
    ratio: float
    ratio_se: float
    phi_recon: float
    small_count: bool


@dataclass(frozen=True)
class DiagnosticsTable:
    rows: tuple
    n: int
    phi_at_base: float
    base: float
    fingerprint: str

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def asymptotic_diagnostics(
    scenario: CrossingScenario,
    t_grid: Sequence[float],
    n: int,
    rng: RngStream,
    workers: int = 1,
    base: float = 1.0,
    refine: int = 8,
) -> DiagnosticsTable:
    """Survival-ratio diagnostics plus the exponential reconstruction of Phi.

    rho(t) = P(O_t)/Phi(t) - tail(g(t)); ratio = P(O_t)/(tail(g(t)) Phi(t));
    Phi_recon(t) = Phi(base) * exp(int_base^t tail(g) + rho). The tail part
    integrates by quadrature; rho integrates by trapezoid on an internal
    geometric grid (``refine`` points per doubling) so the sparse report grid
    does not dominate the reconstruction error.
    """
    grid = sorted(float(t) for t in t_grid)
    if not grid:
        raise ValueError("empty grid")
    if grid[0] <= base:
        raise ValueError("grid must start above the base point")
    f0 = scenario.boundary.f0
    if base <= f0:
        raise ValueError("base point must exceed f(0); the boundary is zero there")
    if grid[-1] > scenario.horizon:
        raise ValueError("grid exceeds the scenario horizon")
    n_fine = max(2, int(np.ceil(np.log2(grid[-1] / base) * refine)) + 1)
    fine = np.unique(np.concatenate((np.geomspace(base, grid[-1], n_fine), [base], grid)))
    sigma = sample_violation_times(scenario, n, rng, workers)
    p_hat = np.array([np.mean(sigma > t) for t in fine])
    phi_hat = np.array([np.mean(np.minimum(sigma, t)) for t in fine])
    tail_fine = np.asarray(tail_eval(scenario.model, scenario.boundary.g(fine)), dtype=float)
    rho_fine = p_hat / phi_hat - tail_fine
    g = scenario.boundary.g
    model = scenario.model

    def tail_of_g(s):
        return float(tail_eval(model, float(g(s))))

    rows = []
    phi_base = float(phi_hat[0])
    for t in grid:
        j = int(np.searchsorted(fine, t))
        p = float(p_hat[j])
        phi = float(phi_hat[j])
        p_se = float(np.sqrt(p * (1.0 - p) / n))
        capped = np.minimum(sigma, t)
        phi_se = float(np.std(capped, ddof=1) / np.sqrt(n))
        tg = float(tail_fine[j])
        rho = p / phi - tg
        small = p == 0.0
        ratio = 0.0 if small else p / (tg * phi)
        ratio_se = p_se / (tg * phi)
        tail_int, _ = _quad(tail_of_g, base, t, limit=200)
        rho_int = float(np.trapezoid(rho_fine[: j + 1], fine[: j + 1]))
        recon = phi_base * float(np.exp(tail_int + rho_int))
        rows.append(
            DiagnosticRow(
                t=t, p_o=p, p_o_se=p_se, phi=phi, phi_se=phi_se,
                tail_g=tg, rho=float(rho), ratio=float(ratio),
                ratio_se=float(ratio_se), phi_recon=recon, small_count=bool(small),
            )
        )
    return DiagnosticsTable(
        rows=tuple(rows), n=n, phi_at_base=phi_base, base=base, fingerprint=rng.fingerprint()
    )
