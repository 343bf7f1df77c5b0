"""Path sampler: exact stable marginals, Poisson jump structure, determinism."""

import io
import math

import numpy as np
import pytest
from scipy import stats

from cslab.levy import SubordinatorModel, stable_model, tail_eval
from cslab.paths import (
    PathBatch,
    default_cutoff,
    eps_convergence_report,
    exact_stable_value,
    first_big_jump,
    first_big_jumps,
    path_to_csv,
    sample_batch,
    sample_path,
    sample_stable_value,
)
from cslab.rng import RngStream


def test_exact_stable_half_matches_levy_law(rng):
    # Laplace exponent lam^(1/2) is the Levy distribution with scale 1/2
    draws = sample_stable_value(0.5, 1.0, 1.0, rng.child("kanter"), n=40_000)
    p = stats.kstest(draws, stats.levy(scale=0.5).cdf).pvalue
    assert p > 0.01
    emp = float(np.mean(draws <= 1.0))
    assert abs(emp - 0.47950012218695348) < 4.0 * math.sqrt(0.25 / 40_000)


def test_exact_stable_scaling_in_t(rng):
    # X_t =d= t^{1/alpha} X_1; compare t=9 draws against scaled t=1 draws
    a = exact_stable_value(stable_model(0.4), 9.0, rng.child("s9"), 20_000)
    b = exact_stable_value(stable_model(0.4), 1.0, rng.child("s1"), 20_000)
    p = stats.ks_2samp(a / 9.0 ** (1.0 / 0.4), b).pvalue
    assert p > 0.01


def test_exact_stable_includes_drift(rng):
    m = stable_model(0.5, drift=5.0)
    draws = exact_stable_value(m, 2.0, rng.child("drift"), 1000)
    assert np.all(draws > 10.0)


def test_sample_stable_validation(rng):
    with pytest.raises(ValueError):
        sample_stable_value(1.2, 1.0, 1.0, rng, n=4)
    with pytest.raises(ValueError):
        sample_stable_value(0.5, 1.0, -1.0, rng, n=4)
    custom = SubordinatorModel(tail=lambda x: np.asarray(x, dtype=float) ** -0.5)
    with pytest.raises(ValueError):
        exact_stable_value(custom, 1.0, rng, 4)


def test_batch_structure_and_poisson_rate(half_stable, rng):
    horizon, eps, n = 6.0, 0.05, 2000
    batch = sample_batch(half_stable, horizon, eps, n, rng.child("batch"))
    assert batch.n_paths == n
    assert np.all(batch.sizes > eps)
    counts = np.diff(batch.offsets)
    lam = float(tail_eval(half_stable, eps)) * horizon
    assert abs(float(np.mean(counts)) - lam) < 4.0 * math.sqrt(lam / n)
    # per-path jump times stay inside (0, horizon] and sorted
    for i in (0, n // 2, n - 1):
        p = batch.path(i)
        if p.times.size:
            assert p.times[0] > 0.0 and p.times[-1] <= horizon
            assert np.all(np.diff(p.times) > 0.0)


def test_paths_nondecreasing_and_values_consistent(half_stable, rng):
    batch = sample_batch(half_stable, 5.0, 1e-2, 128, rng.child("mono"))
    ts = np.linspace(0.0, 5.0, 64)
    prev = np.zeros(batch.n_paths)
    for t in ts[1:]:
        cur = batch.values_at(t)
        assert np.all(cur >= prev - 1e-12)
        prev = cur
    single = np.array([batch.path(i).value(2.5) for i in range(batch.n_paths)])
    assert np.allclose(batch.values_at(2.5), single, rtol=1e-9, atol=1e-12)
    assert np.all(batch.values_at(0.0) == 0.0)


def test_batch_determinism_and_stream_separation(half_stable):
    s = RngStream(seed=77).child("det")
    a = sample_batch(half_stable, 3.0, 1e-2, 50, s)
    b = sample_batch(half_stable, 3.0, 1e-2, 50, s)
    assert np.array_equal(a.times, b.times) and np.array_equal(a.sizes, b.sizes)
    c = sample_batch(half_stable, 3.0, 1e-2, 50, RngStream(seed=77).child("other"))
    assert not np.array_equal(a.times, c.times)


def test_truncation_caps_jumps(half_stable, rng):
    batch = sample_batch(half_stable, 4.0, 1e-2, 400, rng.child("trunc"), truncation=2.0)
    assert np.all(batch.sizes <= 2.0)
    assert batch.truncation == 2.0
    free = sample_batch(half_stable, 4.0, 1e-2, 400, rng.child("trunc"))
    assert float(np.max(free.sizes)) > 2.0  # same seed, the cap is the only change


def test_small_jump_drift_compensation(half_stable, rng):
    # with all jumps in the drift (huge cutoff beyond any simulated jump the
    # comparison is mean-level only): E X_t has no closed form cutoff-free,
    # so check the drift slope equals the small-jump mean built into paths
    from cslab.levy import small_jump_mean

    eps = 0.5
    batch = sample_batch(half_stable, 1.0, eps, 10, rng.child("slope"))
    assert math.isclose(batch.drift_slope, small_jump_mean(half_stable, eps), rel_tol=1e-12)


def test_first_big_jumps_sentinels_and_law(half_stable, rng):
    batch = sample_batch(half_stable, 10.0, 0.2, 3000, rng.child("big"))
    times, sizes = first_big_jumps(batch, 1.0)
    missing = ~np.isfinite(times)
    assert np.all(np.isnan(sizes[missing]))
    ok = np.isfinite(times)
    assert np.all(sizes[ok] > 1.0)
    # waiting time is Exp(Pi_bar(1)) conditioned on arriving before the horizon
    rate = float(tail_eval(half_stable, 1.0))
    u = 1.0 - np.exp(-rate * times[ok])  # should be U(0, 1-exp(-rate*T))
    cap = 1.0 - math.exp(-rate * 10.0)
    p = stats.kstest(u / cap, "uniform").pvalue
    assert p > 0.01
    with pytest.raises(ValueError):
        first_big_jumps(batch, 0.1)  # below the cutoff the law is censored


def test_first_big_jumps_trailing_empty_paths():
    # jumpless paths at the tail of the batch used to push an out-of-range
    # offset into the segmented reduction
    batch = PathBatch(
        horizon=4.0,
        times=np.array([1.0, 2.0]),
        sizes=np.array([0.5, 3.0]),
        offsets=np.array([0, 0, 2, 2, 2], dtype=np.int64),
        drift_slope=0.0, cutoff=0.1, truncation=None,
    )
    times, sizes = first_big_jumps(batch, 1.0)
    assert not np.isfinite(times[0]) and np.isnan(sizes[0])
    assert times[1] == 2.0 and sizes[1] == 3.0
    assert not np.isfinite(times[2]) and not np.isfinite(times[3])


def test_first_big_jump_single_matches_batch(half_stable, rng):
    batch = sample_batch(half_stable, 8.0, 1e-2, 20, rng.child("single"))
    times, sizes = first_big_jumps(batch, 0.7)
    for i in range(batch.n_paths):
        t_i, s_i = first_big_jump(batch.path(i), 0.7)
        if np.isfinite(times[i]):
            assert t_i == times[i] and s_i == sizes[i]
        else:
            assert not np.isfinite(t_i)


def test_default_cutoff_inverts_tail(half_stable):
    eps = default_cutoff(half_stable, rate=250.0)
    assert math.isclose(float(tail_eval(half_stable, eps)), 250.0, rel_tol=1e-10)


def test_eps_convergence_report(half_stable, rng):
    rep = eps_convergence_report(half_stable, 2.0, [0.4, 0.2, 0.1], 4000, rng.child("eps"))
    assert rep.reference == "exact" and len(rep.rows) == 3
    eps_order = [r.eps for r in rep.rows]
    assert eps_order == sorted(eps_order, reverse=True)
    assert rep.rows[-1].ks_distance <= rep.rows[0].ks_distance + 0.05


def test_path_csv_dump(half_stable, rng):
    path = sample_path(half_stable, 3.0, 0.1, rng.child("csv"))
    buf = io.StringIO()
    path_to_csv(path, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,jump_size,cum_value"
    assert len(lines) == 1 + path.times.size
    t0, s0, c0 = map(float, lines[1].split(","))
    assert math.isclose(c0, path.drift_slope * t0 + s0, rel_tol=1e-15)
