"""Function carriers on the positive half-line.

Two families are supported:

* :class:`ClosedFormFunc` -- finite sums of ``c * x**a * log(x)**k`` terms,
  each restricted to a half-open interval ``[lo, hi)`` with ``0 <= lo < hi <= inf``.
  The family is closed under sums, products, restriction, multiplication by
  ``c * x**g`` and antiderivation, so every integral built from it is exact.
* :class:`EvaluableFunc` -- an opaque vectorised callable with optional
  decay/singularity hints, integrated by quadrature.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DivergentIntegral, InvalidGrid, NonFinite, BetaOutOfRange, ParameterOutOfRange

INF = math.inf

# |a + 1| below this is treated as the logarithmic case a = -1
SNAP = 1e-14

# slack used when turning log factors into power bounds
_LOG_SLACK = 0.05


class Domain(str, enum.Enum):
    HALFLINE = "halfline"
    UNIT_INTERVAL = "interval"

    @property
    def upper(self) -> float:
        return INF if self is Domain.HALFLINE else 1.0

    @classmethod
    def coerce(cls, value) -> "Domain":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "").replace("_", "")
        aliases = {"halfline": cls.HALFLINE, "interval": cls.UNIT_INTERVAL,
                   "unitinterval": cls.UNIT_INTERVAL}
        if key not in aliases:
            raise ValueError(f"unknown domain {value!r}")
        return aliases[key]


class NotRepresentable(ValueError):
    """The requested operation leaves the closed-form family."""


@dataclass(frozen=True)
class Term:
    coef: float
    power: float
    logexp: int = 0
    lo: float = 0.0
    hi: float = INF

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty support [{self.lo}, {self.hi})")
        if self.lo < 0:
            raise ValueError("support must lie in (0, inf)")
        if self.logexp < 0 or int(self.logexp) != self.logexp:
            raise ValueError("logexp must be a nonnegative integer")
        if not (math.isfinite(self.coef) and math.isfinite(self.power)):
            raise ValueError("coefficient and power must be finite")


@dataclass(frozen=True)
class _Piece:
    lo: float
    hi: float
    terms: tuple  # tuple[Term, ...], each spanning exactly [lo, hi)

    @property
    def single(self) -> Term | None:
        return self.terms[0] if len(self.terms) == 1 else None


def _integrable_at_zero(a: float) -> bool:
    return a + 1.0 >= SNAP


def _integrable_at_inf(a: float) -> bool:
    return a + 1.0 <= -SNAP


def _divergence_sign(terms, at_zero: bool) -> float:
    """Sign (+-inf) of a divergent endpoint integral, or 0.0 if convergent."""
    if at_zero:
        bad = [t for t in terms if not _integrable_at_zero(t.power)]
        if not bad:
            return 0.0
        dom = min(bad, key=lambda t: (t.power, -t.logexp))
        sign = math.copysign(1.0, dom.coef) * (-1.0) ** dom.logexp
    else:
        bad = [t for t in terms if not _integrable_at_inf(t.power)]
        if not bad:
            return 0.0
        dom = max(bad, key=lambda t: (t.power, t.logexp))
        sign = math.copysign(1.0, dom.coef)
    return sign * INF


def _primitive_coeffs(a: float, k: int):
    """Terms (coef, power, logexp) of an antiderivative of x**a * log(x)**k."""
    s = a + 1.0
    if abs(s) < SNAP:
        return [(1.0 / (k + 1), 0.0, k + 1)]
    out = []
    fact = 1.0
    for j in range(k + 1):
        # k!/(k-j)! built incrementally
        if j > 0:
            fact *= k - j + 1
        out.append(((-1.0) ** j * fact / s ** (j + 1), s, k - j))
    return out


def _scaled_primitive(a, k, x, ls):
    """exp(ls) * G(x) for the antiderivative G of x**a log(x)**k.

    Endpoint limits (x = 0 or inf) are taken as 0; callers guarantee
    convergence there.
    """
    s = a + 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lx = np.log(x)
        if abs(s) < SNAP:
            res = np.exp(ls) * lx ** (k + 1) / (k + 1)
            return res
        mag = np.exp(ls + s * lx)
        poly = np.zeros_like(lx)
        for c, _, j in _primitive_coeffs(a, k):
            poly = poly + c * (lx ** j if j else 1.0)
        res = mag * poly
    edge = (x == 0) | np.isinf(x)
    if np.any(edge):
        res = np.where(edge, 0.0, res)
    return res


def _scaled_diff(a, k, A, B, ls):
    """exp(ls) * (G(B) - G(A)), using expm1 where cancellation threatens."""
    s = a + 1.0
    if k == 0 and abs(s) >= SNAP:
        fin = (A > 0) & np.isfinite(B)
        res = np.empty_like(A)
        if np.any(fin):
            with np.errstate(over="ignore", invalid="ignore"):
                lA = np.log(A[fin])
                lB = np.log(B[fin])
                # anchor at the larger end so expm1 never overflows
                if s > 0:
                    res[fin] = -np.exp(ls[fin] + s * lB) * np.expm1(-s * (lB - lA)) / s
                else:
                    res[fin] = np.exp(ls[fin] + s * lA) * np.expm1(s * (lB - lA)) / s
        if not np.all(fin):
            nf = ~fin
            res[nf] = _scaled_primitive(a, k, B[nf], ls[nf]) - _scaled_primitive(a, k, A[nf], ls[nf])
        return res
    if k == 0:
        with np.errstate(divide="ignore"):
            return np.exp(ls) * (np.log(B) - np.log(A))
    return _scaled_primitive(a, k, B, ls) - _scaled_primitive(a, k, A, ls)


def _fmt_bound(v: float):
    return "inf" if v == INF else v


def _parse_bound(v) -> float:
    if isinstance(v, str):
        v = v.strip().lower()
        if v in ("inf", "+inf", "infinity"):
            return INF
        if v in ("-inf",):
            return -INF
        return float(v)
    return float(v)


class ClosedFormFunc:
    """Finite sum of restricted power-log terms.

    Instances are immutable; every operation returns a new function.

    Examples
    --------
    >>> f = ClosedFormFunc.power(0.5)
    >>> float(f(4.0))
    2.0
    >>> ClosedFormFunc.indicator(0, 1).integral(0, 2)
    1.0
    """

    __slots__ = ("terms", "__dict__")

    def __init__(self, terms: Iterable[Term] = ()):
        self.terms = tuple(t for t in terms if t.coef != 0.0)

    # -- constructors -----------------------------------------------------
    @classmethod
    def power(cls, a: float, coef: float = 1.0, lo: float = 0.0, hi: float = INF) -> "ClosedFormFunc":
        return cls([Term(coef, a, 0, lo, hi)])

    @classmethod
    def logpower(cls, a: float, k: int, coef: float = 1.0, lo: float = 0.0, hi: float = INF):
        return cls([Term(coef, a, int(k), lo, hi)])

    @classmethod
    def indicator(cls, lo: float, hi: float, coef: float = 1.0) -> "ClosedFormFunc":
        return cls([Term(coef, 0.0, 0, lo, hi)])

    @classmethod
    def constant(cls, c: float = 1.0) -> "ClosedFormFunc":
        return cls([Term(c, 0.0, 0, 0.0, INF)])

    @classmethod
    def zero(cls) -> "ClosedFormFunc":
        return cls([])

    # -- structure --------------------------------------------------------
    @cached_property
    def _pieces(self) -> tuple:
        cuts = sorted({t.lo for t in self.terms} | {t.hi for t in self.terms})
        pieces: list[_Piece] = []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            merged: dict = {}
            for t in self.terms:
                if t.lo <= lo and t.hi >= hi:
                    key = (t.power, t.logexp)
                    merged[key] = merged.get(key, 0.0) + t.coef
            terms = tuple(
                Term(c, a, k, lo, hi)
                for (a, k), c in sorted(merged.items())
                if c != 0.0
            )
            if not terms:
                continue
            prev = pieces[-1] if pieces else None
            if prev is not None and prev.hi == lo and _same_shape(prev.terms, terms):
                pieces[-1] = _Piece(prev.lo, hi, tuple(
                    Term(t.coef, t.power, t.logexp, prev.lo, hi) for t in prev.terms))
            else:
                pieces.append(_Piece(lo, hi, terms))
        return tuple(pieces)

    @cached_property
    def _divergence(self) -> tuple:
        return tuple(
            (_divergence_sign(pc.terms, True) if pc.lo == 0.0 else 0.0,
             _divergence_sign(pc.terms, False) if pc.hi == INF else 0.0)
            for pc in self._pieces
        )

    def normalized(self) -> "ClosedFormFunc":
        """Equivalent function with disjoint, merged pieces."""
        return ClosedFormFunc(t for pc in self._pieces for t in pc.terms)

    @property
    def pieces(self) -> list[tuple[float, float, tuple[Term, ...]]]:
        return [(pc.lo, pc.hi, pc.terms) for pc in self._pieces]

    @property
    def breakpoints(self) -> tuple[float, ...]:
        pts = {pc.lo for pc in self._pieces} | {pc.hi for pc in self._pieces}
        return tuple(sorted(p for p in pts if 0.0 < p < INF))

    @property
    def support(self) -> tuple[float, float]:
        if not self._pieces:
            return (0.0, 0.0)
        return (self._pieces[0].lo, self._pieces[-1].hi)

    @property
    def is_zero(self) -> bool:
        return not self._pieces

    @property
    def single_term_pieces(self) -> bool:
        return all(len(pc.terms) == 1 for pc in self._pieces)

    @property
    def pure_power_pieces(self) -> bool:
        return all(len(pc.terms) == 1 and pc.terms[0].logexp == 0 for pc in self._pieces)

    # -- evaluation -------------------------------------------------------
    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.zeros(xa.shape)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for t in self.terms:
                mask = (xa >= t.lo) & (xa < t.hi)
                if not np.any(mask):
                    continue
                xm = xa[mask] if xa.ndim else xa
                val = t.coef * xm ** t.power
                if t.logexp:
                    val = val * np.log(xm) ** t.logexp
                if xa.ndim:
                    out[mask] += val
                else:
                    out = out + val
        if np.any(np.isnan(out)):
            raise NonFinite("closed-form evaluation produced NaN")
        return out if xa.ndim else float(out)

    # -- algebra ----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = ClosedFormFunc.constant(float(other))
        if not isinstance(other, ClosedFormFunc):
            return NotImplemented
        return ClosedFormFunc(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        if not isinstance(other, ClosedFormFunc):
            return NotImplemented
        out = []
        for s in self.normalized().terms:
            for o in other.normalized().terms:
                lo, hi = max(s.lo, o.lo), min(s.hi, o.hi)
                if lo < hi:
                    out.append(Term(s.coef * o.coef, s.power + o.power, s.logexp + o.logexp, lo, hi))
        return ClosedFormFunc(out)

    __rmul__ = __mul__

    def scale(self, c: float = 1.0, gamma: float = 0.0) -> "ClosedFormFunc":
        """Return ``c * x**gamma * f``."""
        return ClosedFormFunc(
            Term(c * t.coef, t.power + gamma, t.logexp, t.lo, t.hi) for t in self.terms
        )

    def restrict(self, lo: float, hi: float) -> "ClosedFormFunc":
        out = []
        for t in self.terms:
            a, b = max(t.lo, lo), min(t.hi, hi)
            if a < b:
                out.append(Term(t.coef, t.power, t.logexp, a, b))
        return ClosedFormFunc(out)

    def power_of(self, q: float, absolute: bool = False) -> "ClosedFormFunc":
        """Pointwise ``f**q`` (or ``|f|**q``), when it stays in the family.

        Requires one term per piece. Log factors need an integer ``q``
        (or ``k*q`` integer with a sign-definite log when ``absolute``).
        Negative ``q`` additionally needs ``f`` nonvanishing on (0, inf).
        """
        if q == 1.0 and not absolute:
            return self
        if not self.single_term_pieces:
            raise NotRepresentable("power of a multi-term piece")
        if q < 0:
            pcs = self._pieces
            if (not pcs or pcs[0].lo != 0.0 or pcs[-1].hi != INF
                    or any(p1.hi != p2.lo for p1, p2 in zip(pcs[:-1], pcs[1:]))):
                raise NotRepresentable("negative power of a function with zeros")
        out = []
        for pc in self._pieces:
            t = pc.terms[0]
            c, k = t.coef, t.logexp
            if absolute:
                c = abs(c)
                if k:
                    if pc.lo < 1.0 < pc.hi:
                        raise NotRepresentable("log factor changes sign on piece")
                    kq = k * q
                    if abs(kq - round(kq)) > 1e-12 or kq < 0:
                        raise NotRepresentable("non-integer log power")
                    kq = int(round(kq))
                    # |ln x| = -ln x below 1
                    sign = (-1.0) ** kq if pc.hi <= 1.0 else 1.0
                    out.append(Term(c ** q * sign, t.power * q, kq, pc.lo, pc.hi))
                else:
                    out.append(Term(c ** q, t.power * q, 0, pc.lo, pc.hi))
                continue
            if k or c < 0:
                if abs(q - round(q)) > 1e-12 or (k and q < 0):
                    raise NotRepresentable("non-integer power of a signed or log term")
                qi = int(round(q))
                out.append(Term(c ** qi, t.power * qi, k * qi, pc.lo, pc.hi))
            else:
                out.append(Term(c ** q, t.power * q, 0, pc.lo, pc.hi))
        return ClosedFormFunc(out)

    # -- calculus ---------------------------------------------------------
    def integrate_array(self, a, b, log_scale=0.0) -> np.ndarray:
        """Vectorised ``exp(log_scale) * integral_a^b f`` with +-inf for divergence.

        ``log_scale`` lets callers fold large prefactors (``r**p`` with big
        ``p``) into the exponentials instead of overflowing.
        """
        a, b, ls = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float),
                                       np.asarray(log_scale, float))
        shape = a.shape
        a, b, ls = a.ravel(), b.ravel(), ls.ravel()
        out = np.zeros(a.shape)
        for pc, (d0, dinf) in zip(self._pieces, self._divergence):
            A = np.maximum(a, pc.lo)
            B = np.minimum(b, pc.hi)
            active = A < B
            if not np.any(active):
                continue
            bad = np.zeros_like(active)
            if d0:
                z = active & (A == 0.0)
                out[z] += d0
                bad |= z
            if dinf:
                z = active & np.isinf(B)
                out[z] += dinf
                bad |= z
            ok = active & ~bad
            if not np.any(ok):
                continue
            Ao, Bo, lso = A[ok], B[ok], ls[ok]
            acc = np.zeros(Ao.shape)
            for t in pc.terms:
                acc += t.coef * _scaled_diff(t.power, t.logexp, Ao, Bo, lso)
            out[ok] += acc
        return out.reshape(shape)

    def integral(self, a: float = 0.0, b: float = INF) -> float:
        """Exact ``integral_a^b f``; raises :class:`DivergentIntegral`."""
        if not b > a:
            if a == b:
                return 0.0
            raise ValueError("integration bounds must satisfy a < b")
        val = float(self.integrate_array(a, b))
        if math.isnan(val):
            raise DivergentIntegral(f"integral over ({a}, {b}) diverges with mixed signs", (a, b))
        if math.isinf(val):
            where = 0.0 if (a == 0.0 and val) else b
            raise DivergentIntegral(f"integral over ({a}, {b}) diverges", where)
        return val

    def antiderivative(self) -> "ClosedFormFunc":
        """Continuous antiderivative ``F`` with ``F(b) - F(a) = integral_a^b f``.

        Anchored so that ``F(x) = integral_0^x f`` whenever ``f`` is
        integrable at 0; otherwise the first piece carries its own primitive.
        """
        out: list[Term] = []
        acc = 0.0  # F at the start of the current region
        anchored = True
        prev_hi = 0.0
        for idx, pc in enumerate(self._pieces):
            if pc.lo > prev_hi and acc != 0.0:
                out.append(Term(acc, 0.0, 0, prev_hi, pc.lo))
            prim = [Term(t.coef * c, pw, j, pc.lo, pc.hi)
                    for t in pc.terms for (c, pw, j) in _primitive_coeffs(t.power, t.logexp)]
            prim_f = ClosedFormFunc(prim)
            if pc.lo == 0.0 and self._divergence[idx][0]:
                anchored = False
                start = None
            elif pc.lo == 0.0:
                start = 0.0
            else:
                start = float(prim_f(pc.lo)) if prim else 0.0
            out.extend(prim)
            if start is not None:
                shift = acc - start
                if shift != 0.0:
                    out.append(Term(shift, 0.0, 0, pc.lo, pc.hi))
            if pc.hi == INF:
                prev_hi = INF
                break
            # value of F at hi from the left
            end = _limit_left(prim_f, pc.hi)
            acc = end + (acc - start if start is not None else 0.0)
            prev_hi = pc.hi
        if prev_hi < INF and acc != 0.0:
            out.append(Term(acc, 0.0, 0, prev_hi, INF))
        F = ClosedFormFunc(out)
        F.__dict__["anchored_at_zero"] = anchored
        return F

    # -- hints ------------------------------------------------------------
    def origin_exponent(self) -> float | None:
        """Exponent s with |f(x)| <= M x**s near 0 (None if f vanishes there)."""
        if not self._pieces or self._pieces[0].lo > 0.0:
            return None
        return min(t.power - (_LOG_SLACK if t.logexp else 0.0) for t in self._pieces[0].terms)

    def tail_bound(self) -> tuple[float, float, float] | None:
        """(eta, M, x0) with |f(x)| <= M x**-eta for x >= x0."""
        if not self._pieces:
            return (INF, 0.0, 1.0)
        last = self._pieces[-1]
        if last.hi < INF:
            return (INF, 0.0, last.hi)
        x0 = max(1.0, last.lo)
        top = max(t.power + (_LOG_SLACK if t.logexp else 0.0) for t in last.terms)
        M = 0.0
        for t in last.terms:
            fac = 1.0
            if t.logexp:
                k = t.logexp
                fac = (k / _LOG_SLACK) ** k * math.exp(-k)
            ex = t.power + (_LOG_SLACK if t.logexp else 0.0)
            # x**ex <= x0**(ex-top) x**top for x >= x0
            M += abs(t.coef) * fac * x0 ** (ex - top)
        return (-top, M, x0)

    def to_evaluable(self, name: str = "") -> "EvaluableFunc":
        tb = self.tail_bound()
        return EvaluableFunc(
            self.__call__, name=name or "closed-form",
            decay_hint=tb, singularity_hint=self.origin_exponent(),
            breakpoints=self.breakpoints,
        )

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        terms = []
        for t in self.normalized().terms:
            d = {"kind": "logpower" if t.logexp else "power", "coef": t.coef,
                 "exponent": t.power, "support": [_fmt_bound(t.lo), _fmt_bound(t.hi)]}
            if t.logexp:
                d["logexp"] = t.logexp
            terms.append(d)
        return {"kind": "sum", "terms": terms}

    def __eq__(self, other):
        if not isinstance(other, ClosedFormFunc):
            return NotImplemented
        return self.normalized().terms == other.normalized().terms

    def __hash__(self):
        return hash(self.normalized().terms)

    def __repr__(self):
        parts = []
        for t in self.normalized().terms:
            s = f"{t.coef:g}*x^{t.power:g}"
            if t.logexp:
                s += f"*ln(x)^{t.logexp}"
            parts.append(f"{s}[{t.lo:g},{t.hi:g})")
        return "ClosedFormFunc(" + (" + ".join(parts) or "0") + ")"


def _same_shape(a, b) -> bool:
    return len(a) == len(b) and all(
        (s.coef, s.power, s.logexp) == (t.coef, t.power, t.logexp) for s, t in zip(a, b)
    )


def _limit_left(f: ClosedFormFunc, x: float) -> float:
    # evaluate the unrestricted formula at x, i.e. the left limit of the piece
    total = 0.0
    for t in f.terms:
        v = t.coef * x ** t.power
        if t.logexp:
            v *= math.log(x) ** t.logexp
        total += v
    return total


@dataclass(frozen=True, eq=False)
class EvaluableFunc:
    """Opaque function ``(0, inf) -> [0, inf]``.

    Parameters
    ----------
    fn : callable
        Deterministic map; receives a float array when ``vectorized``.
    decay_hint : tuple, optional
        ``(eta, M)`` or ``(eta, M, x0)`` meaning ``f(x) <= M x**-eta`` for
        ``x >= x0`` (``x0`` defaults to 1). Needed for tail integrals.
    singularity_hint : float, optional
        Exponent ``s`` with ``f(x) = O(x**s)`` as ``x -> 0``.
    """

    fn: Callable
    name: str = ""
    decay_hint: tuple | None = None
    singularity_hint: float | None = None
    breakpoints: tuple = ()
    vectorized: bool = True

    def __post_init__(self):
        if self.decay_hint is not None:
            dh = tuple(float(v) for v in self.decay_hint)
            if len(dh) == 2:
                dh = dh + (1.0,)
            if len(dh) != 3 or dh[1] < 0 or dh[2] <= 0:
                raise ValueError("decay_hint must be (eta, M[, x0]) with M >= 0, x0 > 0")
            object.__setattr__(self, "decay_hint", dh)
        object.__setattr__(self, "breakpoints", tuple(sorted(float(b) for b in self.breakpoints)))

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        if self.vectorized:
            out = np.asarray(self.fn(xa), dtype=float)
        else:
            out = np.vectorize(lambda v: float(self.fn(v)), otypes=[float])(xa)
        if np.any(np.isnan(out)):
            raise NonFinite(f"{self.name or 'function'} returned NaN")
        if out.shape != xa.shape:
            out = np.broadcast_to(out, xa.shape).copy()
        return out if xa.ndim else float(out)

    def tail_bound(self):
        return self.decay_hint

    def origin_exponent(self):
        return self.singularity_hint


Func = ClosedFormFunc | EvaluableFunc


def as_evaluable(f: Func) -> EvaluableFunc:
    return f.to_evaluable() if isinstance(f, ClosedFormFunc) else f


def eval_at(f: Func, x: float) -> float:
    """Evaluate ``f`` at a single point ``x > 0``."""
    if not x > 0:
        raise ValueError("evaluation point must be positive")
    v = f(float(x))
    if math.isnan(v):
        raise NonFinite("NaN value")
    return float(v)


def pointwise_product(f: Func, q: float, w: Func, absolute: bool = True) -> Func:
    """``|f|**q * w`` as a closed form when possible, else an opaque function.

    Hints are propagated so the quadrature fallback can handle tails and
    endpoint singularities.
    """
    if isinstance(f, ClosedFormFunc) and isinstance(w, ClosedFormFunc):
        try:
            return f.power_of(q, absolute=absolute) * w
        except NotRepresentable:
            pass
    fe, we = as_evaluable(f), as_evaluable(w)

    def fn(x):
        fx = fe(x)
        with np.errstate(invalid="ignore", divide="ignore"):
            val = np.abs(fx) ** q * we(x)
        # 0 * inf at isolated points counts as 0
        return np.where(np.isnan(val), 0.0, val)

    sing = None
    if fe.singularity_hint is not None and we.singularity_hint is not None:
        sing = q * fe.singularity_hint + we.singularity_hint
    elif we.singularity_hint is not None and isinstance(f, ClosedFormFunc) and f.origin_exponent() is None:
        sing = None
    decay = None
    if fe.decay_hint is not None and we.decay_hint is not None:
        e1, m1, x1 = fe.decay_hint
        e2, m2, x2 = we.decay_hint
        if m1 == 0.0 or m2 == 0.0:
            decay = (INF, 0.0, max(x1, x2))
        else:
            decay = (q * e1 + e2, m1 ** q * m2, max(x1, x2))
    bps = tuple(sorted(set(fe.breakpoints) | set(we.breakpoints)))
    return EvaluableFunc(fn, name="product", decay_hint=decay, singularity_hint=sing, breakpoints=bps)


# -- quasi-monotone classes ------------------------------------------------

@dataclass(frozen=True)
class QBeta:
    """Parameter of the cone of functions with ``x**-beta f(x)`` non-increasing."""

    beta: float

    def __post_init__(self):
        if not (self.beta > -1.0 and math.isfinite(self.beta)):
            raise ParameterOutOfRange(f"beta must satisfy beta > -1, got {self.beta}")

    def require_nonpositive(self, context: str = "") -> "QBeta":
        if self.beta > 0:
            raise BetaOutOfRange(f"{context or 'routine'} requires -1 < beta <= 0, got {self.beta}")
        return self

    @classmethod
    def coerce(cls, beta) -> "QBeta":
        return beta if isinstance(beta, cls) else cls(float(beta))


@dataclass(frozen=True)
class QMVerdict:
    kind: str  # "member" | "counterexample" | "inconclusive"
    x1: float | None = None
    x2: float | None = None
    exact: bool = False
    note: str = ""

    @property
    def is_member(self) -> bool:
        return self.kind == "member"

    @property
    def label(self) -> str:
        return f"{self.kind} ({'exact' if self.exact else 'numerical'})"


def default_probe_grid(lo: float = 1e-6, hi: float = 1e6, n: int = 400) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def _interior_pair(lo: float, hi: float) -> tuple[float, float]:
    if lo == 0.0 and hi == INF:
        return 1.0, 2.0
    if lo == 0.0:
        return hi / 4.0, hi / 2.0
    if hi == INF:
        return 2.0 * lo, 4.0 * lo
    r = hi / lo
    return lo * r ** (1 / 3), lo * r ** (2 / 3)


def is_quasi_monotone(f: Func, beta, probe_grid: Sequence[float] | None = None,
                      rtol: float = 1e-9) -> QMVerdict:
    """Decide whether ``x**-beta f(x)`` is non-increasing.

    Closed forms whose pieces are single pure powers get an exact verdict
    (exponent comparison per piece plus jump checks at breakpoints). Anything
    else is checked on adjacent pairs of ``probe_grid`` and the verdict is
    only numerical evidence.
    """
    b = QBeta.coerce(beta).beta
    grid = default_probe_grid() if probe_grid is None else np.asarray(probe_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise InvalidGrid("probe grid must be strictly increasing, positive, with >= 2 points")

    if isinstance(f, ClosedFormFunc) and f.pure_power_pieces:
        return _qm_exact(f, b, rtol)

    fx = np.asarray(f(grid), dtype=float)
    if np.any(fx < 0):
        i = int(np.argmax(fx < 0))
        return QMVerdict("inconclusive", float(grid[i]), None, False, "negative value")
    with np.errstate(over="ignore", invalid="ignore"):
        h = grid ** (-b) * fx
    for i in range(grid.size - 1):
        h1, h2 = h[i], h[i + 1]
        if np.isnan(h1) or np.isnan(h2):
            return QMVerdict("inconclusive", float(grid[i]), float(grid[i + 1]), False, "NaN")
        if math.isinf(h1):
            continue
        if h2 > h1 + rtol * max(abs(h1), abs(h2)):
            return QMVerdict("counterexample", float(grid[i]), float(grid[i + 1]), False)
    return QMVerdict("member", exact=False)


def _qm_exact(f: ClosedFormFunc, b: float, rtol: float) -> QMVerdict:
    pcs = f._pieces
    if not pcs:
        return QMVerdict("member", exact=True)
    for pc in pcs:
        if pc.terms[0].coef < 0:
            x1, _ = _interior_pair(pc.lo, pc.hi)
            return QMVerdict("inconclusive", x1, None, True, "negative values")

    def h(x):
        return x ** (-b) * f(x)

    for pc in pcs:
        t = pc.terms[0]
        if t.power > b + 1e-12:
            x1, x2 = _interior_pair(pc.lo, pc.hi)
            return QMVerdict("counterexample", x1, x2, True, "increasing piece")
    # a gap before the first piece, then a positive value
    if pcs[0].lo > 0.0:
        x2 = pcs[0].lo
        return QMVerdict("counterexample", x2 / 2.0, x2, True, "jump up from zero")
    for left, right in zip(pcs[:-1], pcs[1:]):
        bp = right.lo
        t = left.terms[0]
        h_right = bp ** (-b) * right.terms[0].coef * bp ** right.terms[0].power
        if left.hi < bp:  # zero gap between pieces
            return QMVerdict("counterexample", (left.hi + bp) / 2.0, bp, True, "jump up from zero")
        h_left = t.coef * bp ** (t.power - b)
        if h_right > h_left * (1.0 + rtol):
            x1 = bp * (1.0 - 1e-6)
            for _ in range(60):
                if x1 > left.lo and h(x1) < h(bp):
                    break
                x1 = bp - (bp - x1) / 2.0
            return QMVerdict("counterexample", float(x1), float(bp), True, "jump up at breakpoint")
    return QMVerdict("member", exact=True)


# -- expression trees ------------------------------------------------------

_REGISTRY: dict[str, Callable[..., EvaluableFunc]] = {}


def register(name: str):
    """Register a named opaque function factory for expression trees."""
    def deco(factory):
        _REGISTRY[name] = factory
        return factory
    return deco


@register("power_over_one_plus")
def _power_over_one_plus(a: float = 0.0, b: float = 1.0, c: float = 1.0) -> EvaluableFunc:
    """``c * x**a / (1 + x)**b``."""
    return EvaluableFunc(lambda x: c * x ** a / (1.0 + x) ** b, name=f"x^{a}/(1+x)^{b}",
                         decay_hint=(b - a, abs(c), 1.0), singularity_hint=a)


@register("exp_decay")
def _exp_decay(a: float = 0.0, lam: float = 1.0, c: float = 1.0) -> EvaluableFunc:
    """``c * x**a * exp(-lam x)``; decay hint uses x**a e^{-lam x} <= K x**-2."""
    eta = 2.0
    # sup_x x^(a+eta) e^(-lam x) attained at x = (a+eta)/lam
    xs = max((a + eta) / lam, 1.0)
    M = abs(c) * xs ** (a + eta) * math.exp(-lam * xs) if a + eta > 0 else abs(c)
    return EvaluableFunc(lambda x: c * x ** a * np.exp(-lam * x), name=f"x^{a}e^(-{lam}x)",
                         decay_hint=(eta, max(M, abs(c)), 1.0), singularity_hint=a)


@register("neg_log")
def _neg_log(a: float = 0.0, c: float = 1.0) -> EvaluableFunc:
    """``c * x**a * (-ln x)`` on (0, 1), zero elsewhere."""
    def fn(x):
        with np.errstate(divide="ignore"):
            return np.where(x < 1.0, -c * x ** a * np.log(np.minimum(x, 1.0)), 0.0)
    return EvaluableFunc(fn, name=f"-x^{a}ln(x)", decay_hint=(INF, 0.0, 1.0),
                         singularity_hint=a - _LOG_SLACK, breakpoints=(1.0,))


def named_function(name: str, **params) -> EvaluableFunc:
    if name not in _REGISTRY:
        raise KeyError(f"unknown named function {name!r}; known: {sorted(_REGISTRY)}")
    return _REGISTRY[name](**params)


def from_expr(expr: dict) -> Func:
    """Build a function from a serialised expression tree.

    Node kinds: ``power``, ``logpower``, ``indicator``, ``sum``, ``scaled``,
    ``restrict`` and ``opaque-named``. Supports are ``[lo, hi]`` with the
    string ``"inf"`` allowed.
    """
    if not isinstance(expr, dict) or "kind" not in expr:
        raise ValueError(f"expression node must be a mapping with 'kind': {expr!r}")
    kind = expr["kind"]
    allowed = {
        "power": {"kind", "exponent", "coef", "support"},
        "logpower": {"kind", "exponent", "logexp", "coef", "support"},
        "indicator": {"kind", "support", "coef"},
        "sum": {"kind", "terms"},
        "scaled": {"kind", "factor", "exponent", "arg"},
        "restrict": {"kind", "support", "arg"},
        "opaque-named": {"kind", "name", "params"},
    }
    if kind not in allowed:
        raise ValueError(f"unknown expression kind {kind!r}")
    extra = set(expr) - allowed[kind]
    if extra:
        raise ValueError(f"unknown fields for {kind!r}: {sorted(extra)}")

    def support():
        lo, hi = expr.get("support", [0.0, "inf"])
        return _parse_bound(lo), _parse_bound(hi)

    if kind == "power":
        lo, hi = support()
        return ClosedFormFunc.power(float(expr["exponent"]), float(expr.get("coef", 1.0)), lo, hi)
    if kind == "logpower":
        lo, hi = support()
        return ClosedFormFunc.logpower(float(expr["exponent"]), int(expr["logexp"]),
                                       float(expr.get("coef", 1.0)), lo, hi)
    if kind == "indicator":
        lo, hi = support()
        return ClosedFormFunc.indicator(lo, hi, float(expr.get("coef", 1.0)))
    if kind == "sum":
        parts = [from_expr(t) for t in expr["terms"]]
        if all(isinstance(p, ClosedFormFunc) for p in parts):
            total = ClosedFormFunc.zero()
            for p in parts:
                total = total + p
            return total
        evs = [as_evaluable(p) for p in parts]
        return _opaque_sum(evs)
    if kind == "scaled":
        arg = from_expr(expr["arg"])
        c = float(expr.get("factor", 1.0))
        g = float(expr.get("exponent", 0.0))
        if isinstance(arg, ClosedFormFunc):
            return arg.scale(c, g)
        return _opaque_scaled(arg, c, g)
    if kind == "restrict":
        arg = from_expr(expr["arg"])
        lo, hi = support()
        if isinstance(arg, ClosedFormFunc):
            return arg.restrict(lo, hi)
        return _opaque_restrict(arg, lo, hi)
    return named_function(expr["name"], **expr.get("params", {}))


def _opaque_sum(parts: list[EvaluableFunc]) -> EvaluableFunc:
    sing = None
    if all(p.singularity_hint is not None for p in parts):
        sing = min(p.singularity_hint for p in parts)
    decay = None
    if all(p.decay_hint is not None for p in parts):
        eta = min(p.decay_hint[0] for p in parts)
        x0 = max(p.decay_hint[2] for p in parts)
        # each M x^-e <= M x0^(eta-e) x^-eta for x >= x0 and e >= eta
        M = sum(p.decay_hint[1] * (x0 ** (eta - p.decay_hint[0]) if math.isfinite(p.decay_hint[0]) else 0.0)
                for p in parts)
        decay = (eta, M, x0)
    bps = tuple(sorted({b for p in parts for b in p.breakpoints}))
    return EvaluableFunc(lambda x: sum(p(x) for p in parts), name="sum",
                         decay_hint=decay, singularity_hint=sing, breakpoints=bps)


def _opaque_scaled(f: EvaluableFunc, c: float, g: float) -> EvaluableFunc:
    decay = None
    if f.decay_hint is not None:
        e, M, x0 = f.decay_hint
        decay = (e - g, abs(c) * M, x0)
    sing = None if f.singularity_hint is None else f.singularity_hint + g
    return EvaluableFunc(lambda x: c * x ** g * f(x), name=f"scaled({f.name})",
                         decay_hint=decay, singularity_hint=sing, breakpoints=f.breakpoints)


def _opaque_restrict(f: EvaluableFunc, lo: float, hi: float) -> EvaluableFunc:
    decay = (INF, 0.0, hi) if hi < INF else f.decay_hint
    sing = None if lo > 0 else f.singularity_hint
    bps = tuple(sorted(set(f.breakpoints) | {v for v in (lo, hi) if 0 < v < INF}))
    return EvaluableFunc(lambda x: np.where((x >= lo) & (x < hi), f(x), 0.0),
                         name=f"restrict({f.name})", decay_hint=decay, singularity_hint=sing,
                         breakpoints=bps)


def to_expr(f: Func) -> dict:
    if isinstance(f, ClosedFormFunc):
        return f.to_dict()
    raise NotRepresentable("opaque functions serialise through their originating expression")
