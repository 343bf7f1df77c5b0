"""Repulsion-envelope criterion for conditioned growth functions.

A growth profile w belongs to the envelope when the conditioned process
eventually clears w(h) * g(h); the analytic criterion is that
J(h) = integral of the boundary jump rate from h up to f(w(h) g(h))
falls to zero. The empirical check measures the conditioned fraction
directly and is a supporting trend, never the verdict source: the
definition is a double limit no finite run can certify.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .conditioning import ConditionedSample, sample_conditioned
from .crossing import CrossingScenario, MonteCarloEstimate, probability_estimate
from .levy import classify_transience, tail_eval, validate_regularity, _quad
from .rng import RngStream

__all__ = [
    "EnvelopeRow",
    "EnvelopeReport",
    "envelope_criterion",
    "boundary_rate_integral",
    "EmpiricalPoint",
    "envelope_empirical",
]


@dataclass(frozen=True)
class EnvelopeRow:
    h: float
    w: float
    upper: float  # f(w(h) g(h)); integral is empty when <= h
    j_value: float


@dataclass(frozen=True)
class EnvelopeReport:
    rows: tuple
    verdict: str  # InEnvelope | NotInEnvelope | Indeterminate
    tol: float
    regularity_warning: bool

    @property
    def j_values(self) -> np.ndarray:
        return np.array([r.j_value for r in self.rows])


def boundary_rate_integral(scenario: CrossingScenario, lo: float, hi: float) -> float:
    """integral_lo^hi tail(g(s)) ds, log-substituted for the long range."""
    if hi <= lo:
        return 0.0
    model, g = scenario.model, scenario.boundary.g
    if lo <= 0.0:
        raise ValueError("integration range must be positive")

    def integrand(u: float) -> float:
        s = np.exp(u)
        return float(tail_eval(model, float(g(s)))) * s

    val, _ = _quad(integrand, np.log(lo), np.log(hi), limit=200)
    return float(val)


def envelope_criterion(
    scenario: CrossingScenario,
    w: Callable,
    h_grid: Sequence[float],
    tol: float = 0.05,
) -> EnvelopeReport:
    """J(h) on a grid with the threshold verdict.

    InEnvelope: J strictly decreasing over the final three grid points and
    the last value below tol. NotInEnvelope: J nondecreasing over the final
    three points, or stuck at the same non-small level. Indeterminate
    otherwise. The grid should span several decades: the decay is only
    log-fast, so short grids read as Indeterminate.

    Requires w nondecreasing and actually growing across the grid (a constant
    profile never qualifies), and a recurrent-classified scenario. A failed
    regularity validation does not refuse; it sets ``regularity_warning``.
    """
    hs = [float(h) for h in h_grid]
    if len(hs) < 3 or any(b <= a for a, b in zip(hs, hs[1:])):
        raise ValueError("need at least three increasing grid points")
    if hs[0] <= scenario.boundary.f0:
        raise ValueError("grid must start above f(0); the boundary is zero there")
    w_vals = [float(w(h)) for h in hs]
    if any(v <= 0.0 for v in w_vals) or any(b < a for a, b in zip(w_vals, w_vals[1:])):
        raise ValueError("w must be positive and nondecreasing on the grid")
    if w_vals[-1] <= w_vals[0] * (1.0 + 1e-9):
        raise ValueError("w must grow without bound; it is flat across the grid")
    report = classify_transience(scenario.model, scenario.boundary)
    if report.verdict != "recurrent":
        raise ValueError("envelope criterion applies to recurrent scenarios only")
    regularity = validate_regularity(scenario.model, scenario.boundary, case="I")
    reg_failed = any(c.verdict == "fail" for c in regularity.checks)
    f, g = scenario.boundary.f, scenario.boundary.g
    rows = []
    for h, wv in zip(hs, w_vals):
        upper = float(f(wv * float(g(h))))
        j = boundary_rate_integral(scenario, h, upper) if upper > h else 0.0
        rows.append(EnvelopeRow(h=h, w=wv, upper=upper, j_value=float(j)))
    j = np.array([r.j_value for r in rows])
    tail3 = j[-3:]
    strictly_down = bool(tail3[0] > tail3[1] > tail3[2])
    nondecreasing = bool(tail3[0] <= tail3[1] <= tail3[2])
    if strictly_down and tail3[2] < tol:
        verdict = "InEnvelope"
    elif nondecreasing or (tail3[2] >= tol and tail3[2] >= 0.9 * tail3[0]):
        verdict = "NotInEnvelope"
    else:
        verdict = "Indeterminate"
    return EnvelopeReport(
        rows=tuple(rows),
        verdict=verdict,
        tol=float(tol),
        regularity_warning=reg_failed,
    )


@dataclass(frozen=True)
class EmpiricalPoint:
    h: float
    threshold: float
    estimate: MonteCarloEstimate
    n_accepted: int
    partial: bool


def envelope_empirical(
    scenario: CrossingScenario,
    w: Callable,
    h: float,
    t_cond: float,
    n: int,
    rng: RngStream,
    workers: int = 1,
) -> EmpiricalPoint:
    """Conditioned fraction with X_h at or above w(h) g(h), from n attempts."""
    if not 0.0 < h < t_cond:
        raise ValueError("need 0 < h < T")
    sc_t = replace(scenario, horizon=t_cond)
    cond = sample_conditioned(
        sc_t, t_cond, n_accept=n, max_attempts=n, rng=rng, workers=workers
    )
    if cond.n_accepted == 0:
        raise RuntimeError("no paths survived to T; raise n or lower T")
    threshold = float(w(h)) * float(scenario.boundary.g(h))
    vals = cond.batch.values_at(h)
    est = probability_estimate(float(np.sum(vals >= threshold)), cond.n_accepted)
    return EmpiricalPoint(
        h=float(h),
        threshold=threshold,
        estimate=est,
        n_accepted=cond.n_accepted,
        partial=cond.partial,
    )
