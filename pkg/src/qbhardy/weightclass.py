"""Membership tests and constant estimates for the quasi-monotone weight classes.

For a weight ``w``, exponents ``beta > -1`` and ``p > 0`` and a kernel with
primitive ``Psi`` the class ratio at radius ``r`` is

    N(r) / D(r),   N(r) = integral_r^U (Psi(r)/Psi(x))**p w(x) dx,
                   D(r) = integral_0^r (Psi(x)/Psi(r))**(beta p) w(x) dx,

with ``U = inf`` on the half-line and ``U = 1`` on the unit interval. The
class constant is ``1 + sup_r N/D``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._search import golden_max, golden_min, log_grid, neighbours
from .errors import (DegenerateDenominator, DivergentIntegral, EmptyAdmissibleRange,
                     InvalidGrid, MissingDecayHint, ParameterOutOfRange)
from .funcspace import INF, ClosedFormFunc, Domain, EvaluableFunc, NotRepresentable, as_evaluable
from .inequality import InequalityCheck
from .operators import PsiKernel
from .quadrature import integrate_finite, integrate_tail


class Verdict(str, enum.Enum):
    MEMBER = "Member"
    NOT_MEMBER = "NotMember"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ClassParams:
    beta: float
    p: float
    psi: PsiKernel | None = None
    domain: Domain = Domain.HALFLINE

    def __post_init__(self):
        if not self.beta > -1.0:
            raise ParameterOutOfRange(f"beta must exceed -1, got {self.beta}")
        if not (self.p > 0.0 and math.isfinite(self.p)):
            raise ParameterOutOfRange(f"p must be positive and finite, got {self.p}")
        object.__setattr__(self, "domain", Domain.coerce(self.domain))

    @property
    def kernel(self) -> PsiKernel:
        return self.psi if self.psi is not None else PsiKernel.ones()

    def with_p(self, p: float) -> "ClassParams":
        return ClassParams(self.beta, p, self.psi, self.domain)


@dataclass
class ClassReport:
    verdict: Verdict
    sup_ratio: float
    class_constant: float
    argmax_r: float
    profile: list = field(default_factory=list)
    diagnostics: str = ""
    certificate: str | None = None
    params: ClassParams | None = None

    @property
    def is_member(self) -> bool:
        return self.verdict is Verdict.MEMBER

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "sup_ratio": self.sup_ratio,
                "class_constant": self.class_constant, "argmax_r": self.argmax_r,
                "diagnostics": self.diagnostics, "certificate": self.certificate}


# -- ratio evaluation --------------------------------------------------------

class _RatioEngine:
    """Evaluates N(r) and D(r) for arrays of radii.

    Closed-form weights with closed-form ``Psi**-p`` and ``Psi**(beta p)``
    are handled exactly, with the ``Psi(r)`` prefactors folded into the
    exponentials; anything else goes through quadrature radius by radius.
    """

    def __init__(self, w, params: ClassParams, tol: float = 1e-11):
        self.params = params
        self.upper = params.domain.upper
        self.tol = tol
        self.kernel = params.kernel
        self.Psi = self.kernel.big_psi
        self.exact = False
        beta, p = params.beta, params.p
        if isinstance(w, ClosedFormFunc) and isinstance(self.Psi, ClosedFormFunc):
            try:
                self.A = self.Psi.power_of(-p) * w
                self.B = self.Psi.power_of(beta * p) * w
                self.exact = True
            except NotRepresentable:
                pass
        self.w = w
        if not self.exact:
            self.we = as_evaluable(w)

    def psi_at(self, r):
        return np.asarray(self.Psi(np.asarray(r, dtype=float)), dtype=float)

    def num_den(self, r) -> tuple[np.ndarray, np.ndarray, list]:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if self.exact:
            lp = np.log(self.psi_at(r))
            p, beta = self.params.p, self.params.beta
            N = self.A.integrate_array(r, self.upper, p * lp)
            D = self.B.integrate_array(0.0, r, -beta * p * lp)
            return N, D, []
        N = np.empty(r.shape)
        D = np.empty(r.shape)
        notes = []
        for i, ri in enumerate(r):
            N[i], D[i], note = self._quad_point(float(ri))
            if note:
                notes.append(note)
        return N, D, notes

    def _quad_point(self, r: float):
        p, beta = self.params.p, self.params.beta
        Pr = float(self.psi_at(np.array([r]))[0])
        Psi, we = self.Psi, self.we
        note = ""

        def num_fn(x):
            return (Pr / np.asarray(Psi(x), dtype=float)) ** p * we(x)

        decay = None
        if we.decay_hint is not None:
            eta, M, x0 = we.decay_hint
            decay = (eta, M, max(x0, r))
            if self.kernel.is_identity and math.isfinite(eta):
                decay = (eta + p, M * r ** p, max(x0, r))
        num_f = EvaluableFunc(num_fn, name="numerator", decay_hint=decay, breakpoints=we.breakpoints)
        try:
            if self.upper == INF:
                res = integrate_tail(num_f, r, self.tol, rtol=1e-10)
            elif r >= 1.0:
                res = None
            else:
                res = integrate_finite(num_f, r, 1.0, self.tol, rtol=1e-10)
            N = 0.0 if res is None else res.value
            if res is not None and not res.converged:
                note = f"numerator quadrature did not converge at r={r:g}"
        except DivergentIntegral:
            N = INF
        except MissingDecayHint:
            N = math.nan
            note = "numerator needs a decay hint"

        sing = None
        s_w = we.singularity_hint
        s_psi = _psi_origin_exponent(self.kernel)
        if s_w is not None and s_psi is not None:
            sing = beta * p * s_psi + s_w

        def den_fn(x):
            with np.errstate(divide="ignore", invalid="ignore"):
                v = (np.asarray(Psi(x), dtype=float) / Pr) ** (beta * p) * we(x)
            return np.where(np.isnan(v), 0.0, v)

        den_f = EvaluableFunc(den_fn, name="denominator", singularity_hint=sing,
                              breakpoints=we.breakpoints)
        try:
            res = integrate_finite(den_f, 0.0, r, self.tol, rtol=1e-10)
            D = res.value
            if not res.converged and math.isfinite(D):
                note = note or f"denominator quadrature did not converge at r={r:g}"
            elif not math.isfinite(D):
                D = math.nan
                note = note or f"denominator undecided at r={r:g}"
        except DivergentIntegral:
            D = INF
        return N, D, note


def _psi_origin_exponent(k: PsiKernel):
    B = k.big_psi
    if isinstance(B, ClosedFormFunc):
        return B.origin_exponent()
    s = as_evaluable(k.psi).singularity_hint
    return None if s is None else s + 1.0


def _check_r(r: float, domain: Domain):
    if not r > 0 or (domain is Domain.UNIT_INTERVAL and r > 1.0):
        raise ValueError(f"radius {r} outside the domain {domain.value}")


def qb_ratio(w, params: ClassParams, r: float) -> float:
    """Class ratio ``N(r)/D(r)``; ``+inf`` when only the numerator diverges."""
    _check_r(r, params.domain)
    N, D, notes = _RatioEngine(w, params).num_den([r])
    n, d = float(N[0]), float(D[0])
    if math.isnan(d) or math.isinf(d):
        raise DegenerateDenominator(f"denominator diverges at r={r:g}", divergent=True)
    if d == 0.0:
        raise DegenerateDenominator(f"denominator vanishes at r={r:g}")
    if math.isnan(n):
        raise MissingDecayHint(notes[0] if notes else "numerator undecided")
    return INF if math.isinf(n) else n / d


def default_r_grid(domain: Domain, n: int = 200) -> np.ndarray:
    hi = 1e6 if Domain.coerce(domain) is Domain.HALFLINE else 1.0
    return log_grid(1e-6, hi, n)


def _ratios(N, D):
    with np.errstate(divide="ignore", invalid="ignore"):
        R = np.where(D > 0, N / np.where(D > 0, D, 1.0), 0.0)
    R = np.where(np.isinf(N) & (D > 0) & np.isfinite(D), INF, R)
    return R


def _edge_trend(values) -> tuple[str, float]:
    """Classify four samples ordered toward an edge, one decade apart.

    Returns ``("flat", v)``, ``("saturating", limit)``, ``("growing", v)``
    or ``("irregular", v)``.
    """
    R = [float(v) for v in values]
    d = [R[1] - R[0], R[2] - R[1], R[3] - R[2]]
    scale = max(abs(v) for v in R) or 1.0
    if not all(x > 1e-9 * scale for x in d):
        return "flat", R[-1]
    q2, q3 = d[1] / d[0], d[2] / d[1]
    if q2 >= 1.0 - 1e-6 and q3 >= 1.0 - 1e-6:
        return "growing", R[-1]
    if q2 < 1.0 and q3 < 1.0:
        return "saturating", R[-1] + d[2] * q3 / (1.0 - q3)
    return "irregular", R[-1]


def qb_constant(w, params: ClassParams, r_grid=None, refine_iter: int = 50) -> ClassReport:
    """Estimate ``sup_r N(r)/D(r)`` and classify the weight.

    A grid sweep is followed by golden-section refinement around the best
    grid radius. At each grid edge the ratio is sampled on four decades; a
    saturating trend is extrapolated geometrically, while growth that does
    not slow down over three decades counts as non-membership.
    """
    dom = params.domain
    rs = default_r_grid(dom) if r_grid is None else np.sort(np.asarray(r_grid, dtype=float))
    if rs.size == 0:
        raise InvalidGrid("r_grid is empty")
    if np.any(rs <= 0) or (dom is Domain.UNIT_INTERVAL and np.any(rs > 1.0)):
        raise InvalidGrid("r_grid leaves the domain")
    eng = _RatioEngine(w, params)

    def bad(verdict, why, cert=None, r=math.nan, profile=()):
        sup = INF if verdict is Verdict.NOT_MEMBER else math.nan
        return ClassReport(verdict, sup, 1.0 + sup, r, list(profile), why, cert, params)

    N, D, notes = eng.num_den(rs)
    R = _ratios(N, D)
    profile = list(zip(rs.tolist(), R.tolist()))
    cert = _certificate(rs, N, D)
    if cert is not None:
        return bad(Verdict.NOT_MEMBER, cert[1], cert[1], cert[0], profile)
    if np.any(np.isnan(R)) or notes:
        return bad(Verdict.INCONCLUSIVE, "; ".join(notes) or "undecided ratio values",
                   profile=profile)

    def ratio_at(r):
        n, d, nt = eng.num_den([r])
        if nt:
            return math.nan
        return float(_ratios(n, d)[0])

    i = int(np.argmax(R))
    best_r, best = float(rs[i]), float(R[i])
    if rs.size >= 3 and refine_iter > 0:
        lo, hi = neighbours(np.log(rs), i)
        u, v = golden_max(lambda u: ratio_at(math.exp(u)), lo, hi, refine_iter)
        if v > best:
            best_r, best = math.exp(u), v

    diag = []
    edges = [("r->0", rs[0], +1)]
    if dom is Domain.HALFLINE:
        edges.append(("r->inf", rs[-1], -1))
    for label, r_edge, inward in edges:
        pts = [r_edge * 10.0 ** (inward * j) for j in (3, 2, 1, 0)]
        if dom is Domain.UNIT_INTERVAL and max(pts) > 1.0:
            if rs.size < 4:
                continue
            pts = list(rs[:4][::-1]) if inward > 0 else list(rs[-4:])
        n_e, d_e, nt = eng.num_den(pts)
        if nt:
            return bad(Verdict.INCONCLUSIVE, "; ".join(nt), profile=profile)
        c2 = _certificate(np.asarray(pts), n_e, d_e)
        if c2 is not None:
            return bad(Verdict.NOT_MEMBER, c2[1], c2[1], c2[0], profile)
        kind, lim = _edge_trend(_ratios(n_e, d_e))
        if kind == "growing":
            return bad(Verdict.NOT_MEMBER, f"ratio grows without slowing as {label}",
                       f"monotone growth over 3 decades as {label}", float(r_edge), profile)
        if kind == "irregular" and lim >= best * (1 - 1e-9):
            return bad(Verdict.INCONCLUSIVE, f"irregular ratio trend as {label}", profile=profile)
        if kind == "saturating" and lim > best:
            best, best_r = lim, float(r_edge)
            diag.append(f"supremum extrapolated as {label}")
    if not math.isfinite(best):
        return bad(Verdict.NOT_MEMBER, "infinite ratio", "infinite ratio", best_r, profile)
    return ClassReport(Verdict.MEMBER, best, 1.0 + best, best_r, profile,
                       "; ".join(diag) or ("exact integrals" if eng.exact else "quadrature"),
                       None, params)


def _certificate(rs, N, D):
    """First radius where the class condition provably fails, with a reason."""
    for r, n, d in zip(rs, N, D):
        if math.isinf(d) or (math.isnan(d) and math.isinf(n)):
            return float(r), f"denominator diverges at r={r:g}"
        if math.isinf(n) and n > 0:
            return float(r), f"numerator diverges at r={r:g}"
        if d == 0.0 and n > 0.0:
            return float(r), f"denominator vanishes while numerator is positive at r={r:g}"
    return None


# -- power weights -----------------------------------------------------------

@dataclass(frozen=True)
class PowerWeightVerdict:
    member: bool
    sharp_ratio: float | None
    reason: str = ""


def power_weight_membership(alpha: float, beta: float, p: float,
                            domain: Domain = Domain.HALFLINE) -> PowerWeightVerdict:
    """Analytic membership of ``x**alpha``: member iff ``-beta p - 1 < alpha < p - 1``.

    On the half-line the ratio is the constant ``(beta p + alpha + 1)/(p - alpha - 1)``;
    on the unit interval its supremum is found numerically.
    """
    domain = Domain.coerce(domain)
    if not alpha < p - 1.0:
        return PowerWeightVerdict(False, None, "tail divergence")
    if not alpha > -beta * p - 1.0:
        return PowerWeightVerdict(False, None, "denominator divergence")
    if domain is Domain.HALFLINE:
        return PowerWeightVerdict(True, (beta * p + alpha + 1.0) / (p - alpha - 1.0), "")
    rep = qb_constant(ClosedFormFunc.power(alpha), ClassParams(beta, p, None, domain))
    return PowerWeightVerdict(rep.is_member, rep.sup_ratio if rep.is_member else None,
                              rep.diagnostics)


# -- hat classes ---------------------------------------------------------------

@dataclass
class HatReport:
    base: ClassReport
    witness_epsilon: float | None
    shifted: ClassReport | None
    verdict: Verdict
    scanned: list = field(default_factory=list)

    @property
    def is_member(self) -> bool:
        return self.verdict is Verdict.MEMBER


def default_eps_grid(beta: float, p: float, n: int = 32) -> np.ndarray:
    top = p * (beta + 1.0)
    cap = min(top, p - 1.0) if p > 1.0 else top
    return log_grid(1e-4 * top, 0.999 * cap, n)


def hat_membership(w, beta: float, p: float, eps_grid=None, domain: Domain = Domain.HALFLINE,
                   r_grid=None, psi: PsiKernel | None = None, refine_iter: int = 50) -> HatReport:
    """Membership at ``p`` plus at some ``p - eps`` with ``0 < eps < p(beta+1)``.

    ``eps_grid`` is scanned in ascending order; the first shifted member is
    the witness.
    """
    params = ClassParams(beta, p, psi, domain)
    base = qb_constant(w, params, r_grid, refine_iter)
    top = p * (beta + 1.0)
    eps = default_eps_grid(beta, p) if eps_grid is None else np.sort(np.asarray(eps_grid, float))
    if eps.size == 0 or np.any(eps <= 0) or np.any(eps >= top):
        raise InvalidGrid(f"eps_grid must be nonempty inside (0, {top:g})")
    if not base.is_member:
        return HatReport(base, None, None, base.verdict, [])
    scanned = []
    for e in eps:
        sh = qb_constant(w, params.with_p(p - float(e)), r_grid, refine_iter)
        scanned.append((float(e), sh.verdict.value))
        if sh.is_member:
            return HatReport(base, float(e), sh, Verdict.MEMBER, scanned)
    return HatReport(base, None, None, Verdict.INCONCLUSIVE, scanned)


# -- power shift -----------------------------------------------------------------

def power_shift_constant(alpha: float, beta: float, p: float, C: float, eps: float) -> float:
    """Constant for ``x**alpha`` at the lowered exponent ``p - eps``.

    ``K = C (p-alpha-1)/(p-eps-alpha-1)`` and the result is
    ``K (beta(p-eps)+alpha+1)/(alpha+beta p+1)``.
    """
    if not (-beta * p - 1.0 < alpha < p - 1.0):
        raise ParameterOutOfRange("need -beta p - 1 < alpha < p - 1")
    if not (0.0 < eps < p - alpha - 1.0):
        raise ParameterOutOfRange("need 0 < eps < p - alpha - 1")
    if not C > 0:
        raise ParameterOutOfRange("C must be positive")
    K = C * (p - alpha - 1.0) / (p - eps - alpha - 1.0)
    return K * (beta * (p - eps) + alpha + 1.0) / (alpha + beta * p + 1.0)


def check_power_shift(alpha: float, beta: float, p: float, eps: float, r_grid=None,
                      tol: float = 1e-9) -> list[InequalityCheck]:
    """Shifted class inequality for ``x**alpha`` at every radius, with the explicit shift constant."""
    C = (beta * p + alpha + 1.0) / (p - alpha - 1.0)
    cstar = power_shift_constant(alpha, beta, p, C, eps)
    rs = default_r_grid(Domain.HALFLINE, 25) if r_grid is None else np.asarray(r_grid, float)
    eng = _RatioEngine(ClosedFormFunc.power(alpha), ClassParams(beta, p - eps))
    N, D, _ = eng.num_den(rs)
    return [InequalityCheck(float(n), cstar, float(d), tol, {"r": float(r)})
            for r, n, d in zip(rs, N, D)]


# -- infinity class ----------------------------------------------------------------

@dataclass
class InfinityReport:
    value: float
    argmin_p: float | None
    verdict: Verdict
    profile: list = field(default_factory=list)

    @property
    def is_member(self) -> bool:
        return self.verdict is Verdict.MEMBER


def default_p_grid(n: int = 64, lo: float = 0.1, hi: float = 64.0) -> np.ndarray:
    return log_grid(lo, hi, n)


def qb_infinity_constant(w, beta: float, p_grid=None, domain: Domain = Domain.HALFLINE,
                         psi: PsiKernel | None = None, r_grid=None,
                         refine_iter: int = 30) -> InfinityReport:
    """``inf_p [w]_p`` over exponents where ``w`` is a member."""
    ps = default_p_grid() if p_grid is None else np.sort(np.asarray(p_grid, float))
    if ps.size == 0:
        raise InvalidGrid("p_grid is empty")
    base = ClassParams(beta, float(ps[0]), psi, domain)

    def const(p):
        rep = qb_constant(w, base.with_p(p), r_grid)
        return rep.class_constant if rep.is_member else INF

    vals = np.array([const(float(p)) for p in ps])
    profile = list(zip(ps.tolist(), vals.tolist()))
    if not np.any(np.isfinite(vals)):
        return InfinityReport(INF, None, Verdict.NOT_MEMBER, profile)
    i = int(np.argmin(vals))
    best_p, best = float(ps[i]), float(vals[i])
    if ps.size >= 3 and refine_iter > 0:
        lo, hi = neighbours(np.log(ps), i)
        u, v = golden_min(lambda u: const(math.exp(u)), lo, hi, refine_iter)
        if v < best:
            best_p, best = math.exp(u), v
    return InfinityReport(best, best_p, Verdict.MEMBER, profile)


# -- kernel-built weights ------------------------------------------------------------

@dataclass
class PsiWeightRow:
    p0: float
    bound: float
    measured: float
    verdict: Verdict
    passed: bool


@dataclass
class PsiWeightReport:
    admissible: tuple
    rows: list
    weight: object = None

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r.passed for r in self.rows)


def admissible_p0_range(alpha: float, beta: float) -> tuple[float, float]:
    lo = alpha + 1.0
    hi = INF if beta == 0 else -(alpha + 1.0) / beta
    if not lo < hi or beta > 0:
        raise EmptyAdmissibleRange(f"no p0 with {lo:g} < p0 < {hi:g}")
    return lo, hi


def psi_weight(k: PsiKernel, v, alpha: float):
    """``w = Psi**alpha * psi * v``."""
    B = k.big_psi
    if isinstance(B, ClosedFormFunc) and isinstance(k.psi, ClosedFormFunc) and isinstance(v, ClosedFormFunc):
        try:
            return B.power_of(alpha) * k.psi * v
        except NotRepresentable:
            pass
    pe, ve = as_evaluable(k.psi), as_evaluable(v)
    sing = None
    s_B = _psi_origin_exponent(k)
    if None not in (s_B, pe.singularity_hint, ve.singularity_hint):
        sing = alpha * s_B + pe.singularity_hint + ve.singularity_hint
    return EvaluableFunc(lambda x: np.asarray(B(x), float) ** alpha * pe(x) * ve(x),
                         name="Psi^a psi v", singularity_hint=sing,
                         breakpoints=tuple(sorted(set(pe.breakpoints) | set(ve.breakpoints))))


def psi_weight_bound(k: PsiKernel, v, alpha: float, beta: float, p0_grid=None,
                     r_grid=None, tol: float = 1e-6) -> PsiWeightReport:
    """Measure the kernel-class ratio of ``Psi**alpha psi v`` against
    ``(beta p0 + alpha + 1)/(p0 - alpha - 1)`` for admissible ``p0``."""
    if k.monotone_tag == "non-increasing" and not k.is_constant:
        raise ParameterOutOfRange("kernel must be non-decreasing")
    if not alpha > -1.0:
        raise ParameterOutOfRange("alpha must exceed -1")
    lo, hi = admissible_p0_range(alpha, beta)
    if p0_grid is None:
        if math.isinf(hi):
            p0s = [lo * (1.0 + t) if lo > 0 else lo + t for t in (0.1, 0.25, 0.5, 1.0, 2.0, 4.0)]
        else:
            p0s = [lo + (hi - lo) * j / 9.0 for j in range(1, 9)]
    else:
        p0s = [float(q) for q in p0_grid if lo < q < hi]
    if not p0s:
        raise EmptyAdmissibleRange("no grid p0 inside the admissible range")
    w = psi_weight(k, v, alpha)
    rows = []
    for p0 in p0s:
        bound = (beta * p0 + alpha + 1.0) / (p0 - alpha - 1.0)
        rep = qb_constant(w, ClassParams(beta, p0, k), r_grid)
        ok = rep.is_member and rep.sup_ratio <= bound * (1.0 + tol) + 1e-12
        rows.append(PsiWeightRow(p0, bound, rep.sup_ratio, rep.verdict, ok))
    return PsiWeightReport((lo, hi), rows, w)
