"""Averaging operators: the Hardy operator and its kernel-weighted variant."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DivergentIntegral, ZeroPsi
from .funcspace import (ClosedFormFunc, EvaluableFunc, NotRepresentable, as_evaluable,
                        default_probe_grid, is_quasi_monotone)
from .quadrature import integrate_finite

_TAGS = ("non-increasing", "non-decreasing", "unknown")


def _cumulative(f: EvaluableFunc, x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """``integral_0^x f`` at each point, summing increments between sorted nodes."""
    xa = np.asarray(x, dtype=float)
    flat = xa.ravel()
    order = np.argsort(flat)
    xs = flat[order]
    out = np.empty_like(xs)
    acc = 0.0
    prev = 0.0
    for i, xi in enumerate(xs):
        if xi > prev:
            res = integrate_finite(f, prev, xi, tol, rtol=1e-12)
            if not math.isfinite(res.value):
                raise DivergentIntegral("integral from 0 diverges", 0.0)
            acc += res.value
            prev = xi
        out[i] = acc
    result = np.empty_like(out)
    result[order] = out
    return result.reshape(xa.shape)


def hardy(f):
    """Hardy average ``Hf(x) = (1/x) integral_0^x f``.

    Closed forms map to closed forms exactly (including every log depth);
    opaque inputs give an opaque result evaluated by cumulative quadrature.
    """
    if isinstance(f, ClosedFormFunc):
        F = f.antiderivative()
        if not F.__dict__.get("anchored_at_zero", True):
            raise DivergentIntegral("f is not integrable near 0", 0.0)
        return F.scale(1.0, -1.0)
    fe = as_evaluable(f)

    def fn(x):
        xa = np.asarray(x, dtype=float)
        return _cumulative(fe, xa) / xa

    sing = fe.singularity_hint
    if sing is not None:
        if sing <= -1.0:
            raise DivergentIntegral("f is not integrable near 0", 0.0)
        sing = min(sing, 0.0) if sing < 0 else 0.0
    return EvaluableFunc(fn, name=f"H({fe.name})", decay_hint=_hardy_decay(fe),
                         singularity_hint=sing, breakpoints=fe.breakpoints)


def _hardy_decay(fe: EvaluableFunc):
    if fe.decay_hint is None:
        return None
    eta, M, x0 = fe.decay_hint
    try:
        head = _cumulative(fe, np.array([x0]))[0]
    except DivergentIntegral:
        return None
    if math.isinf(eta) or eta > 1.0:
        total = head + (0.0 if math.isinf(eta) else M * x0 ** (1.0 - eta) / (eta - 1.0))
        return (1.0, total, x0)
    if eta < 1.0:
        return (eta, head * x0 ** (eta - 1.0) + M / (1.0 - eta), x0)
    return None


@dataclass(frozen=True)
class PsiKernel:
    """Nonnegative locally integrable kernel ``psi`` with ``Psi(x) = integral_0^x psi``."""

    psi: object
    monotone_tag: str = "unknown"

    def __post_init__(self):
        if self.monotone_tag not in _TAGS:
            raise ValueError(f"monotone_tag must be one of {_TAGS}")
        if self.monotone_tag != "unknown" and not self._tag_consistent():
            raise ValueError(f"kernel is not {self.monotone_tag}")

    @classmethod
    def ones(cls) -> "PsiKernel":
        return cls(ClosedFormFunc.constant(1.0), "non-increasing")

    @classmethod
    def power(cls, a: float) -> "PsiKernel":
        if not a > -1.0:
            raise ValueError("kernel s**a needs a > -1")
        return cls(ClosedFormFunc.power(a), "non-increasing" if a <= 0 else "non-decreasing")

    def _tag_consistent(self) -> bool:
        grid = default_probe_grid(1e-4, 1e4, 200)
        if self.monotone_tag == "non-increasing":
            return is_quasi_monotone(self.psi, 0.0, grid).kind != "counterexample"
        vals = np.asarray(self.psi(grid), dtype=float)
        return bool(np.all(np.diff(vals) >= -1e-9 * np.maximum(np.abs(vals[1:]), 1e-300)))

    @property
    def is_identity(self) -> bool:
        return isinstance(self.psi, ClosedFormFunc) and self.psi == ClosedFormFunc.constant(1.0)

    @property
    def is_constant(self) -> bool:
        if not isinstance(self.psi, ClosedFormFunc):
            return False
        pcs = self.psi.pieces
        return len(pcs) == 1 and pcs[0][0] == 0.0 and pcs[0][1] == math.inf and \
            len(pcs[0][2]) == 1 and pcs[0][2][0].power == 0.0 and pcs[0][2][0].logexp == 0

    @cached_property
    def big_psi(self):
        """``Psi`` as a function (closed form when ``psi`` is one)."""
        if isinstance(self.psi, ClosedFormFunc):
            F = self.psi.antiderivative()
            if not F.__dict__.get("anchored_at_zero", True):
                raise DivergentIntegral("psi is not integrable near 0", 0.0)
            return F
        pe = as_evaluable(self.psi)

        def fn(x):
            return _cumulative(pe, np.asarray(x, dtype=float))

        return EvaluableFunc(fn, name=f"Psi({pe.name})", breakpoints=pe.breakpoints)

    def closed_inverse_power(self, q: float) -> ClosedFormFunc | None:
        """``Psi**q`` as a closed form, or None when it leaves the family."""
        B = self.big_psi
        if not isinstance(B, ClosedFormFunc):
            return None
        try:
            return B.power_of(q)
        except NotRepresentable:
            return None


def big_psi(k: PsiKernel, x):
    """``Psi(x) = integral_0^x psi``."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise ValueError("Psi is evaluated at x > 0 only")
    return k.big_psi(x)


def s_psi(f, k: PsiKernel):
    """``S_psi f(x) = (1/Psi(x)) integral_0^x f psi``.

    With ``psi = 1`` this is exactly :func:`hardy`.
    """
    if k.is_identity:
        return hardy(f)
    B = k.big_psi
    if isinstance(B, ClosedFormFunc):
        pcs = B.pieces
        if not pcs or pcs[0][0] > 0.0:
            raise ZeroPsi("Psi vanishes near 0")
    if isinstance(f, ClosedFormFunc) and isinstance(k.psi, ClosedFormFunc):
        inv = k.closed_inverse_power(-1.0)
        if inv is not None:
            G = (f * k.psi).antiderivative()
            if not G.__dict__.get("anchored_at_zero", True):
                raise DivergentIntegral("f psi is not integrable near 0", 0.0)
            return G * inv
    fe, pe = as_evaluable(f), as_evaluable(k.psi)
    prod = EvaluableFunc(lambda x: fe(x) * pe(x), name="f*psi",
                         singularity_hint=(None if fe.singularity_hint is None or pe.singularity_hint is None
                                           else fe.singularity_hint + pe.singularity_hint),
                         breakpoints=tuple(sorted(set(fe.breakpoints) | set(pe.breakpoints))))

    def fn(x):
        xa = np.asarray(x, dtype=float)
        den = np.asarray(B(xa), dtype=float)
        if np.any(den <= 0):
            raise ZeroPsi("Psi vanishes at a point of the domain")
        return _cumulative(prod, xa) / den

    return EvaluableFunc(fn, name=f"S_psi({fe.name})", breakpoints=prod.breakpoints)
