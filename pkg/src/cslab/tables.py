"""Monotone interpolation tables for inverting positive monotone functions.

Used where a boundary or tail has no closed-form inverse. Tables live in
log-log space (the functions of interest are power-like), interpolate
linearly there, and grow their covered range on demand.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

_POINTS_PER_DECADE = 256
_HEADROOM = 4.0


class IncreasingInverseTable:
    """Inverse of a positive strictly increasing function on (0, inf).

    The callable accepts scalars or arrays and returns fn^{-1}(s) for s inside
    the covered range, extending the table geometrically when queried outside
    it. Construction fails if fn is not strictly increasing on the build grid.
    """

    def __init__(self, fn: Callable, t_lo: float = 1e-9, t_hi: float = 1e9):
        if not (0.0 < t_lo < t_hi):
            raise ValueError("need 0 < t_lo < t_hi")
        self._fn = fn
        self._build(t_lo, t_hi)

    def _build(self, t_lo: float, t_hi: float) -> None:
        decades = np.log10(t_hi / t_lo)
        n = max(64, int(decades * _POINTS_PER_DECADE))
        t = np.geomspace(t_lo, t_hi, n)
        s = np.asarray(self._fn(t), dtype=float)
        if np.any(~np.isfinite(s)) or np.any(s <= 0.0):
            raise ValueError("function must be finite and positive on the build grid")
        if np.any(np.diff(s) <= 0.0):
            raise ValueError("function is not strictly increasing on the build grid")
        self._t_lo, self._t_hi = t_lo, t_hi
        self._log_t = np.log(t)
        self._log_s = np.log(s)
        self.s_min = float(s[0])
        self.s_max = float(s[-1])

    def _cover(self, s_lo: float, s_hi: float) -> None:
        t_lo, t_hi = self._t_lo, self._t_hi
        while np.asarray(self._fn(t_lo)).min() > s_lo and t_lo > 1e-290:
            t_lo /= _HEADROOM
        while np.asarray(self._fn(t_hi)).max() < s_hi and t_hi < 1e290:
            t_hi *= _HEADROOM
        if (t_lo, t_hi) != (self._t_lo, self._t_hi):
            self._build(t_lo, t_hi)

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=float)
        if s_arr.size and (s_arr.min() < self.s_min or s_arr.max() > self.s_max):
            finite = s_arr[np.isfinite(s_arr)]
            if finite.size:
                self._cover(float(finite.min()), float(finite.max()))
        out = np.exp(np.interp(np.log(s_arr), self._log_s, self._log_t))
        return out if out.shape else float(out)


class DecreasingInverseTable:
    """Inverse of a positive strictly decreasing function, same conventions."""

    def __init__(self, fn: Callable, x_lo: float, x_hi: float):
        if not (0.0 < x_lo < x_hi):
            raise ValueError("need 0 < x_lo < x_hi")
        decades = np.log10(x_hi / x_lo)
        n = max(64, int(decades * _POINTS_PER_DECADE))
        x = np.geomspace(x_lo, x_hi, n)
        v = np.asarray(fn(x), dtype=float)
        if np.any(~np.isfinite(v)) or np.any(v <= 0.0):
            raise ValueError("function must be finite and positive on the build grid")
        if np.any(np.diff(v) >= 0.0):
            raise ValueError("function is not strictly decreasing on the build grid")
        # store reversed so the interpolation abscissa is increasing
        self._log_v = np.log(v[::-1])
        self._log_x = np.log(x[::-1])
        self.v_min = float(v[-1])
        self.v_max = float(v[0])

    def __call__(self, v):
        v_arr = np.asarray(v, dtype=float)
        out = np.exp(np.interp(np.log(v_arr), self._log_v, self._log_x))
        return out if out.shape else float(out)
