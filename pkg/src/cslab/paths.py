"""Subordinator path sampling.

Jumps above a cutoff ``eps`` are simulated exactly (Poisson times, sizes by
inverse-tail sampling); jumps below the cutoff are folded into the drift as
their mean. Stable marginals additionally get an exact sampler so the
compound-Poisson bias can be measured instead of guessed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .levy import SubordinatorModel, small_jump_mean, tail_eval
from .rng import RngStream
from .tables import DecreasingInverseTable

__all__ = [
    "SamplePath",
    "PathBatch",
    "default_cutoff",
    "sample_stable_value",
    "exact_stable_value",
    "sample_path",
    "sample_batch",
    "path_value",
    "first_big_jump",
    "first_big_jumps",
    "EpsRow",
    "EpsConvergenceReport",
    "eps_convergence_report",
    "path_to_csv",
]


@dataclass(frozen=True)
class SamplePath:
    """One simulated trajectory: linear drift plus finitely many jumps.

    ``times`` is strictly increasing within (0, horizon]; matching ``sizes``
    are all in (cutoff, truncation]. The path value is
    ``drift_slope * t + sum(sizes[times <= t])``, nondecreasing and
    right-continuous by construction.
    """

    horizon: float
    times: np.ndarray
    sizes: np.ndarray
    drift_slope: float
    cutoff: float
    truncation: Optional[float] = None

    def __post_init__(self) -> None:
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        if self.drift_slope < 0.0:
            raise ValueError("drift_slope must be nonnegative")
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.sizes, dtype=float)
        if t.shape != s.shape:
            raise ValueError("times and sizes must align")
        if t.size:
            if np.any(np.diff(t) <= 0.0):
                raise ValueError("jump times must be strictly increasing")
            if t[0] <= 0.0 or t[-1] > self.horizon:
                raise ValueError("jump times must lie in (0, horizon]")
            if np.any(s <= self.cutoff):
                raise ValueError("jump sizes must exceed the cutoff")
            if self.truncation is not None and np.any(s > self.truncation):
                raise ValueError("jump sizes must not exceed the truncation")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "sizes", s)

    def value(self, t):
        return path_value(self, t)


@dataclass(frozen=True)
class PathBatch:
    """Many paths sharing one scenario, stored as flat arrays plus offsets.

    Path i owns ``times[offsets[i]:offsets[i+1]]`` (sorted) and the matching
    ``sizes`` slice. Keeping the batch flat lets every downstream sweep run
    as a handful of vectorized passes instead of a Python loop per path.
    """

    horizon: float
    times: np.ndarray
    sizes: np.ndarray
    offsets: np.ndarray
    drift_slope: float
    cutoff: float
    truncation: Optional[float] = None

    @property
    def n_paths(self) -> int:
        return len(self.offsets) - 1

    def path(self, i: int) -> SamplePath:
        lo, hi = int(self.offsets[i]), int(self.offsets[i + 1])
        return SamplePath(
            horizon=self.horizon,
            times=self.times[lo:hi].copy(),
            sizes=self.sizes[lo:hi].copy(),
            drift_slope=self.drift_slope,
            cutoff=self.cutoff,
            truncation=self.truncation,
        )

    def values_at(self, t: float) -> np.ndarray:
        """X_t for every path at one time, right-continuous."""
        if not 0.0 <= t <= self.horizon:
            raise ValueError("t outside [0, horizon]")
        contrib = np.where(self.times <= t, self.sizes, 0.0)
        csum = np.concatenate(([0.0], np.cumsum(contrib)))
        per_path = csum[self.offsets[1:]] - csum[self.offsets[:-1]]
        return self.drift_slope * t + per_path


def default_cutoff(model: SubordinatorModel, rate: float = 1e3) -> float:
    """Cutoff eps with Pi_bar(eps) = rate (expected jumps per unit time)."""
    if rate <= 0.0:
        raise ValueError("rate must be positive")
    if model.is_stable:
        p = model.stable
        return (p.scale / (special.gamma(1.0 - p.alpha) * rate)) ** (1.0 / p.alpha)
    # bracket the general tail, then invert on a log-log table
    lo, hi = 1e-12, 1e3
    table = DecreasingInverseTable(model.tail, lo, hi)
    if not table.v_min <= rate <= table.v_max:
        raise ValueError("requested rate outside the tabulated tail range")
    return float(table(rate))


def _kanter_factor(alpha: float, u: np.ndarray) -> np.ndarray:
    # log of Kanter's a(u) on (0, pi); written in logs to survive alpha near 1
    s1 = np.log(np.sin((1.0 - alpha) * u))
    s2 = np.log(np.sin(alpha * u))
    s3 = np.log(np.sin(u))
    return np.exp(s1 + (alpha / (1.0 - alpha)) * s2 - s3 / (1.0 - alpha))


def sample_stable_value(alpha: float, scale: float, t, rng: RngStream, n: Optional[int] = None):
    """Exact draw(s) of X_t for the stable subordinator (no drift).

    Kanter's transform: S = (a(U)/W)^((1-alpha)/alpha) with U uniform on
    (0, pi) and W standard exponential satisfies E e^{-lam S} = e^{-lam^alpha};
    the scaling property then gives X_t = (scale * t)^(1/alpha) * S.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0.0):
        raise ValueError("t must be positive")
    size = n if n is not None else t_arr.shape or None
    gen = rng.generator()
    u = gen.uniform(0.0, np.pi, size=size)
    w = gen.standard_exponential(size=size)
    s = (_kanter_factor(alpha, u) / w) ** ((1.0 - alpha) / alpha)
    out = (scale * t_arr) ** (1.0 / alpha) * s
    if n is None and not t_arr.shape:
        return float(out)
    return out


def exact_stable_value(model: SubordinatorModel, t: float, rng: RngStream, n: int) -> np.ndarray:
    """Exact X_t draws for a stable model, drift included."""
    if not model.is_stable:
        raise ValueError("exact sampling requires stable parameters")
    p = model.stable
    return model.drift * t + sample_stable_value(p.alpha, p.scale, t, rng, n=n)


class _SizeSampler:
    """Inverse-tail jump-size sampler on (eps, a]: solve
    Pi_bar(v) = Pi_bar(eps) - q * (Pi_bar(eps) - Pi_bar(a)) for uniform q."""

    def __init__(self, model: SubordinatorModel, eps: float, truncation: Optional[float]):
        self.tail_eps = float(tail_eval(model, eps))
        self.tail_a = float(tail_eval(model, truncation)) if truncation is not None else 0.0
        self.rate = self.tail_eps - self.tail_a
        if not np.isfinite(self.tail_eps):
            raise ValueError("tail not finite at the cutoff")
        if self.rate <= 0.0:
            raise ValueError("no jump mass between cutoff and truncation")
        if model.is_stable:
            p = model.stable
            self._closed = (p.alpha, p.scale / special.gamma(1.0 - p.alpha))
            self._table = None
        else:
            self._closed = None
            hi = truncation if truncation is not None else 1e9
            self._table = DecreasingInverseTable(model.tail, eps, hi)

    def draw(self, gen: np.random.Generator, count: int) -> np.ndarray:
        if count == 0:
            return np.empty(0)
        q = gen.random(count)
        w = self.tail_eps - q * self.rate
        if self._closed is not None:
            alpha, k = self._closed
            return (k / w) ** (1.0 / alpha)
        return np.asarray(self._table(w), dtype=float)


def sample_path(
    model: SubordinatorModel,
    horizon: float,
    cutoff: float,
    rng: RngStream,
    truncation: Optional[float] = None,
) -> SamplePath:
    batch = sample_batch(model, horizon, cutoff, 1, rng, truncation=truncation)
    return batch.path(0)


def sample_batch(
    model: SubordinatorModel,
    horizon: float,
    cutoff: float,
    n: int,
    rng: RngStream,
    truncation: Optional[float] = None,
) -> PathBatch:
    """n independent paths from one stream, as a flat PathBatch.

    Draw order is fixed (counts, then times, then sizes) so identical streams
    reproduce identical batches regardless of how callers consume them.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    if cutoff <= 0.0:
        raise ValueError("cutoff must be positive")
    if truncation is not None and truncation <= cutoff:
        raise ValueError("truncation must exceed the cutoff")
    if n <= 0:
        raise ValueError("need at least one path")
    sizer = _SizeSampler(model, cutoff, truncation)
    gen = rng.generator()
    counts = gen.poisson(sizer.rate * horizon, size=n)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    total = int(offsets[-1])
    times = gen.uniform(0.0, horizon, size=total)
    path_ids = np.repeat(np.arange(n), counts)
    order = np.lexsort((times, path_ids))
    times = times[order]
    sizes = sizer.draw(gen, total)
    slope = model.drift + small_jump_mean(model, cutoff)
    return PathBatch(
        horizon=float(horizon),
        times=times,
        sizes=sizes,
        offsets=offsets,
        drift_slope=float(slope),
        cutoff=float(cutoff),
        truncation=truncation,
    )


def path_value(path: SamplePath, t):
    """X_t = drift_slope * t + jump mass arrived by t (right-continuous)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > path.horizon):
        raise ValueError("t outside [0, horizon]")
    idx = np.searchsorted(path.times, t_arr, side="right")
    csum = np.concatenate(([0.0], np.cumsum(path.sizes)))
    out = path.drift_slope * t_arr + csum[idx]
    return float(out) if not t_arr.shape else out


def first_big_jump(path: SamplePath, x: float):
    """Earliest (time, size) with size > x, or None; needs x > cutoff."""
    if x <= path.cutoff:
        raise ValueError("threshold at or below the cutoff is unobservable")
    hits = np.nonzero(path.sizes > x)[0]
    if hits.size == 0:
        return None
    i = int(hits[0])
    return float(path.times[i]), float(path.sizes[i])


def first_big_jumps(batch: PathBatch, x: float):
    """Batch version: per-path first jump above x.

    Returns (times, sizes); paths with no such jump get time=inf, size=nan.
    """
    if x <= batch.cutoff:
        raise ValueError("threshold at or below the cutoff is unobservable")
    big = batch.sizes > x
    # first flagged index per segment via a running minimum of flagged positions;
    # reduceat only over non-empty segments (their starts are exact boundaries,
    # and an offset equal to len(times) from trailing empty paths would crash it)
    pos = np.where(big, np.arange(batch.times.size), batch.times.size)
    out_t = np.full(batch.n_paths, np.inf)
    out_s = np.full(batch.n_paths, np.nan)
    starts = batch.offsets[:-1]
    mins = np.full(batch.n_paths, batch.times.size, dtype=np.int64)
    nonempty = np.nonzero(batch.offsets[1:] > starts)[0]
    if nonempty.size:
        mins[nonempty] = np.minimum.reduceat(pos, starts[nonempty])
    hit = mins < batch.times.size
    out_t[hit] = batch.times[mins[hit]]
    out_s[hit] = batch.sizes[mins[hit]]
    return out_t, out_s


@dataclass(frozen=True)
class EpsRow:
    eps: float
    ks_distance: float
    p_value: float
    median_gap: float


@dataclass(frozen=True)
class EpsConvergenceReport:
    """Cutoff-bias report: KS distance of X_horizon draws per eps level.

    ``reference`` is "exact" (stable models, compared against the exact
    sampler) or "halving" (each level compared against the next finer one).
    """

    horizon: float
    reference: str
    rows: tuple

    @property
    def distances(self) -> np.ndarray:
        return np.array([r.ks_distance for r in self.rows])

    @property
    def converging(self) -> bool:
        d = self.distances
        return bool(d.size >= 2 and d[-1] <= d[0])


def eps_convergence_report(
    model: SubordinatorModel,
    horizon: float,
    eps_levels,
    n: int,
    rng: RngStream,
) -> EpsConvergenceReport:
    from scipy import stats

    levels = sorted(float(e) for e in eps_levels)
    if len(levels) < 2:
        raise ValueError("need at least two cutoff levels")
    levels = levels[::-1]  # coarse to fine
    draws = []
    for k, eps in enumerate(levels):
        batch = sample_batch(model, horizon, eps, n, rng.child("eps%d" % k))
        draws.append(batch.values_at(horizon))
    rows = []
    if model.is_stable:
        ref = exact_stable_value(model, horizon, rng.child("exact"), n)
        for eps, d in zip(levels, draws):
            ks = stats.ks_2samp(d, ref)
            rows.append(EpsRow(eps, float(ks.statistic), float(ks.pvalue),
                               float(abs(np.median(d) - np.median(ref)))))
        reference = "exact"
    else:
        for k in range(len(levels) - 1):
            ks = stats.ks_2samp(draws[k], draws[k + 1])
            rows.append(EpsRow(levels[k], float(ks.statistic), float(ks.pvalue),
                               float(abs(np.median(draws[k]) - np.median(draws[k + 1])))))
        reference = "halving"
    return EpsConvergenceReport(horizon=float(horizon), reference=reference, rows=tuple(rows))


def path_to_csv(path: SamplePath, stream) -> None:
    """One row per jump: t, jump_size, cum_value (value right after the jump)."""
    stream.write("t,jump_size,cum_value\n")
    csum = np.cumsum(path.sizes)
    for t, s, c in zip(path.times, path.sizes, csum):
        stream.write("%.17g,%.17g,%.17g\n" % (t, s, path.drift_slope * t + c))
