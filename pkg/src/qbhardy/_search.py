"""One-dimensional search helpers shared by the constant estimators."""

from __future__ import annotations

import math

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(fn, lo: float, hi: float, iters: int = 50):
    """Maximise a unimodal ``fn`` on ``[lo, hi]``; returns ``(x, fn(x))``.

    Non-finite values are treated as ``-inf`` so a bracket straddling a
    blow-up still returns the best finite point seen.
    """
    def val(x):
        v = fn(x)
        return v if math.isfinite(v) else -math.inf

    best_x, best_v = lo, val(lo)
    vb = val(hi)
    if vb > best_v:
        best_x, best_v = hi, vb
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = val(c), val(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = val(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = val(d)
        for x, v in ((c, fc), (d, fd)):
            if v > best_v:
                best_x, best_v = x, v
    return best_x, best_v


def golden_min(fn, lo: float, hi: float, iters: int = 50):
    """Minimise ``fn``; non-finite values count as ``+inf``."""
    def neg(x):
        v = fn(x)
        return -v if math.isfinite(v) else -math.inf

    x, v = golden_max(neg, lo, hi, iters)
    return x, -v


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def neighbours(grid, i: int):
    """Bracket around index ``i`` of a sorted grid."""
    j0 = max(i - 1, 0)
    j1 = min(i + 1, len(grid) - 1)
    return grid[j0], grid[j1]
