"""Controlled-error integration on finite intervals and tails.

Closed forms are integrated exactly. Opaque integrands go through an
adaptive Gauss-Kronrod (7/15) scheme with a priority queue of subintervals.
:func:`riemann_oracle` is a deliberately naive midpoint sum kept fully
independent of the adaptive code, for cross-checks.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentIntegral, MissingDecayHint, NonFinite
from .funcspace import ClosedFormFunc, EvaluableFunc, as_evaluable

# Kronrod nodes on [-1, 1] (positive half, centre last) and weights
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
# Gauss weights for nodes _XGK[1], _XGK[3], _XGK[5], _XGK[7]
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes ascending
_WK15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG7 = np.zeros(15)
_WG7[[1, 3, 5]] = _WG[:3]
_WG7[[13, 11, 9]] = _WG[:3]
_WG7[7] = _WG[3]

_OVERFLOW = 1e300


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    converged: bool
    subdivisions: int

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(self.value + other.value,
                          self.abs_error_estimate + other.abs_error_estimate,
                          self.converged and other.converged,
                          self.subdivisions + other.subdivisions)


def _gk_batch(g, lo: np.ndarray, hi: np.ndarray):
    """Kronrod value and error estimate on each [lo_i, hi_i] in one call."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(g(x.ravel()), dtype=float).reshape(x.shape)
    if np.any(np.isnan(fx)):
        raise NonFinite("integrand returned NaN")
    k = (fx @ _WK15) * half
    gauss = (fx @ _WG7) * half
    mean = k / np.where(half == 0, 1.0, 2.0 * half)
    resasc = (np.abs(fx - mean[:, None]) @ _WK15) * np.abs(half)
    err = np.abs(k - gauss)
    # QUADPACK-style scaling of the raw Gauss/Kronrod difference
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc > 0) & (err > 0), scaled, err)
    return k, err, fx


def _adaptive(g, cuts, tol: float, rtol: float, max_sub: int, allow_signed: bool) -> QuadResult:
    cuts = np.asarray(cuts, dtype=float)
    lo, hi = cuts[:-1], cuts[1:]
    vals, errs, fx = _gk_batch(g, lo, hi)
    if not allow_signed and np.any(fx < 0):
        raise ValueError("integrand takes negative values; pass allow_signed=True")
    heap = [(-e, a, b, v) for a, b, v, e in zip(lo, hi, vals, errs)]
    heapq.heapify(heap)
    total = float(np.sum(vals))
    err = float(np.sum(errs))
    nsub = len(heap)
    while True:
        if not math.isfinite(total) or abs(total) > _OVERFLOW:
            raise DivergentIntegral("partial integral exceeded overflow guard")
        target = max(tol, rtol * abs(total))
        if err <= target:
            return QuadResult(float(total), float(err), True, nsub)
        if nsub >= max_sub:
            return QuadResult(float(total), float(err), False, nsub)
        # split the worst few intervals together to amortise the vector call
        batch = [heapq.heappop(heap) for _ in range(min(len(heap), 8))]
        blo, bhi = [], []
        for e, a, b, v in batch:
            m = 0.5 * (a + b)
            if not (a < m < b):
                # interval below floating resolution; keep it as is
                heapq.heappush(heap, (0.0, a, b, v))
                continue
            total -= v
            err += e  # e is negative
            blo += [a, m]
            bhi += [m, b]
        if not blo:
            return QuadResult(float(total), float(err), False, nsub)
        v2, e2, fx = _gk_batch(g, np.array(blo), np.array(bhi))
        if not allow_signed and np.any(fx < 0):
            raise ValueError("integrand takes negative values; pass allow_signed=True")
        for a, b, v, e in zip(blo, bhi, v2, e2):
            heapq.heappush(heap, (-e, a, b, v))
        total += float(np.sum(v2))
        err = max(err + float(np.sum(e2)), 0.0)
        nsub += len(blo) // 2
        # recompute from the heap occasionally to avoid drift
        if nsub % 512 < 8:
            err = float(sum(-h[0] for h in heap))
            total = float(sum(h[3] for h in heap))


def _origin_substitution(f: EvaluableFunc, b: float, s: float):
    """x = b t**m with m = 1/(1+s) flattens an x**s singularity at 0."""
    m = 1.0 / (1.0 + s)

    def g(t):
        x = b * t ** m
        return f(x) * b * m * t ** (m - 1.0)

    return g


def _boundary_growth(f: EvaluableFunc, points, tol: float) -> bool:
    """True when increments over successive scale cells fail to shrink.

    ``points`` is a monotone sequence of cut points moving toward the
    suspect boundary; three consecutive non-shrinking increments count as
    divergence evidence.
    """
    incs = []
    for a, b in zip(points[:-1], points[1:]):
        lo, hi = min(a, b), max(a, b)
        res = _adaptive(f, [lo, hi], tol, 1e-10, 2000, True)
        incs.append(res.value)
    grow = 0
    for d1, d2 in zip(incs[:-1], incs[1:]):
        if d1 > 0 and d2 >= d1 * (1.0 - 1e-9):
            grow += 1
            if grow >= 3:
                return True
        else:
            grow = 0
    return False


def integrate_finite(f, a: float, b: float, tol: float = 1e-10, *, rtol: float = 0.0,
                     allow_signed: bool = False, max_subdivisions: int = 100_000) -> QuadResult:
    """Integrate ``f`` over ``(a, b)`` with ``0 <= a < b < inf``.

    The requested tolerance is ``max(tol, rtol * |value|)``. A closed form is
    integrated exactly. Opaque integrands with a singularity hint ``s`` at 0
    (and ``a == 0``) are integrated after the substitution ``x = b t**m``.
    """
    if not (0.0 <= a < b < math.inf):
        raise ValueError("need 0 <= a < b < inf")
    if isinstance(f, ClosedFormFunc):
        return QuadResult(f.integral(a, b), 0.0, True, 0)
    f = as_evaluable(f)
    s = f.singularity_hint
    if a == 0.0 and s is not None and s <= -1.0:
        cuts = [b * 2.0 ** (-j) for j in range(0, 12)]
        if _boundary_growth(f, cuts, tol):
            raise DivergentIntegral("integral diverges at 0", 0.0)
        return QuadResult(math.inf, math.inf, False, 0)
    bps = [p for p in f.breakpoints if a < p < b]
    if a == 0.0 and s is not None and s < 0.0:
        # split so the singular piece starts at 0 and the rest is ordinary
        first = bps[0] if bps else b
        g = _origin_substitution(f, first, s)
        head = _adaptive(g, [0.0, 1.0], tol / 2, rtol, max_subdivisions // 2, allow_signed)
        if first == b:
            return head
        tail = _adaptive(f, [first] + bps[1:] + [b], tol / 2, rtol,
                         max_subdivisions - head.subdivisions, allow_signed)
        return head + tail
    cuts = [a] + bps + [b]
    if a == 0.0:
        # geometric cuts near 0 help unhinted integrands with mild blow-up
        first = cuts[1]
        cuts = [0.0] + [first * 10.0 ** (-j) for j in range(8, 0, -1)] + cuts[1:]
    return _adaptive(f, cuts, tol, rtol, max_subdivisions, allow_signed)


def integrate_tail(f, a: float, tol: float = 1e-10, *, rtol: float = 0.0,
                   allow_signed: bool = False, max_subdivisions: int = 100_000) -> QuadResult:
    """Integrate ``f`` over ``(a, inf)``.

    Opaque integrands need a decay hint ``f(x) <= M x**-eta`` (``eta > 1``)
    valid for ``x >= x0``; the cutoff ``X`` is chosen so the analytic tail
    bound ``M X**(1-eta)/(eta-1)`` uses half the tolerance.
    """
    if not a > 0.0:
        raise ValueError("tail integral needs a > 0")
    if isinstance(f, ClosedFormFunc):
        return QuadResult(f.integral(a, math.inf), 0.0, True, 0)
    f = as_evaluable(f)
    if f.decay_hint is None:
        raise MissingDecayHint("tail integral of an opaque function needs a decay hint")
    eta, M, x0 = f.decay_hint
    if M == 0.0 or math.isinf(eta):
        hi = max(x0, a)
        if hi <= a:
            return QuadResult(0.0, 0.0, True, 0)
        return integrate_finite(f, a, hi, tol, rtol=rtol, allow_signed=allow_signed,
                                max_subdivisions=max_subdivisions)
    if eta <= 1.0:
        cuts = [max(a, x0) * 2.0 ** j for j in range(0, 12)]
        if _boundary_growth(f, cuts, tol):
            raise DivergentIntegral("tail integral diverges", math.inf)
        return QuadResult(math.inf, math.inf, False, 0)

    budget = tol
    if rtol > 0.0:
        probe = _log_integral(f, a, max(a, x0) * 10.0, tol, 1e-6, 5000, allow_signed)
        budget = max(tol, rtol * abs(probe.value))
    half = budget / 2.0
    base = max(a, x0)
    # M X^(1-eta)/(eta-1) <= half
    log_x = (math.log(2.0 * M / (budget * (eta - 1.0)))) / (eta - 1.0) if M > 0 else 0.0
    log_x = max(log_x, math.log(base) + math.log(2.0))
    if log_x - math.log(a) > 700.0:
        log_x = math.log(a) + 700.0
    X = math.exp(log_x)
    trunc = M * X ** (1.0 - eta) / (eta - 1.0)
    body = _log_integral(f, a, X, half, rtol / 2.0, max_subdivisions, allow_signed)
    total_err = body.abs_error_estimate + trunc
    converged = (body.converged and trunc <= half * (1 + 1e-9)
                 and total_err <= max(budget, rtol * abs(body.value)) * (1 + 1e-9))
    return QuadResult(body.value, float(total_err), bool(converged), body.subdivisions)


def _log_integral(f: EvaluableFunc, a: float, X: float, tol, rtol, max_sub, allow_signed) -> QuadResult:
    """Integrate over (a, X) in the variable u = log(x / a)."""
    def g(u):
        x = a * np.exp(u)
        return f(x) * x

    L = math.log(X / a)
    cuts = [0.0] + [math.log(p / a) for p in f.breakpoints if a < p < X] + [L]
    # extra cuts every few units of log-scale keep the first pass informative
    dense = sorted(set(cuts) | set(np.arange(0.0, L, 4.0).tolist()))
    return _adaptive(g, dense, tol, rtol, max_sub, allow_signed)


def integrate(f, a: float, b: float, tol: float = 1e-10, *, rtol: float = 0.0,
              allow_signed: bool = False) -> QuadResult:
    """Dispatch to finite or tail integration (``b`` may be inf)."""
    if math.isinf(b):
        if a == 0.0:
            head = integrate_finite(f, 0.0, 1.0, tol / 2, rtol=rtol, allow_signed=allow_signed)
            tail = integrate_tail(f, 1.0, tol / 2, rtol=rtol, allow_signed=allow_signed)
            return head + tail
        return integrate_tail(f, a, tol, rtol=rtol, allow_signed=allow_signed)
    return integrate_finite(f, a, b, tol, rtol=rtol, allow_signed=allow_signed)


def riemann_oracle(f, a: float, b: float, n: int, log: bool = False, chunk: int = 1 << 20) -> float:
    """Midpoint sum of ``f`` over ``n`` equal cells (log-equal when ``log``).

    No error control; exists only to cross-check the adaptive integrator.
    """
    if not (0.0 <= a < b < math.inf) or n < 1:
        raise ValueError("need 0 <= a < b < inf and n >= 1")
    if log and a == 0.0:
        raise ValueError("log cells need a > 0")
    total = 0.0
    for start in range(0, n, chunk):
        idx = np.arange(start, min(n, start + chunk), dtype=float) + 0.5
        if log:
            la, lb = math.log(a), math.log(b)
            h = (lb - la) / n
            x = np.exp(la + idx * h)
            total += float(np.sum(np.asarray(f(x), dtype=float) * x)) * h
        else:
            h = (b - a) / n
            x = a + idx * h
            total += float(np.sum(np.asarray(f(x), dtype=float))) * h
    return total
