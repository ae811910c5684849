"""Extrapolation constants and end-to-end checks of the resulting inequalities.

Every checker works on a :class:`CertifiedPair`: a pair ``(f, g)`` for which
the base-exponent inequality is known to hold for *every* weight of the
class, because the pair was built from the weighted Hardy-type bound for
averaging operators (``f = S_psi u``, ``g = u`` with ``u`` quasi-monotone).
Hypotheses quantified over whole weight classes are never sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._search import golden_min, log_grid, neighbours
from .errors import (DivergentIntegral, EmptyGrid, HypothesisNotCertified, InvalidGrid, NotInClass,
                     NotInHatClass, ParameterOutOfRange)
from .funcspace import INF, ClosedFormFunc, Domain, EvaluableFunc, NotRepresentable, QBeta, \
    as_evaluable, default_probe_grid, is_quasi_monotone, pointwise_product
from .inequality import InequalityCheck
from .norms import GrandParams, grand_norm, lp_integral, weight_mass
from .operators import PsiKernel, hardy, s_psi
from .quadrature import integrate
from .weightclass import ClassParams, HatReport, hat_membership, qb_constant


# -- monotone functions ----------------------------------------------------------

@dataclass(frozen=True)
class MonotoneFn:
    """Non-decreasing map ``(0, inf) -> [0, inf)`` from a small family."""

    form: str = "identity"
    params: tuple = ()

    def __post_init__(self):
        ok = {
            "identity": lambda p: len(p) == 0,
            "power": lambda p: len(p) == 1 and p[0] > 0,
            "affine": lambda p: len(p) == 2 and p[0] >= 0 and p[1] >= 0,
            "constant": lambda p: len(p) == 1 and p[0] > 0,
        }
        if self.form not in ok or not ok[self.form](self.params):
            raise ParameterOutOfRange(f"invalid monotone function {self.form}{self.params}")

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def power(cls, s: float):
        return cls("power", (float(s),))

    @classmethod
    def affine(cls, a: float, b: float = 0.0):
        return cls("affine", (float(a), float(b)))

    @classmethod
    def constant(cls, c: float):
        return cls("constant", (float(c),))

    def __call__(self, t: float) -> float:
        if self.form == "identity":
            return t
        if self.form == "power":
            return t ** self.params[0]
        if self.form == "affine":
            return self.params[0] * t + self.params[1]
        return self.params[0]

    @classmethod
    def from_spec(cls, spec) -> "MonotoneFn":
        if spec is None:
            return cls.identity()
        if isinstance(spec, MonotoneFn):
            return spec
        if isinstance(spec, str):
            return cls(spec)
        spec = dict(spec)
        form = spec.pop("form")
        order = {"identity": [], "power": ["s"], "affine": ["a", "b"], "constant": ["c"]}
        if form not in order:
            raise ParameterOutOfRange(f"unknown monotone form {form!r}")
        if set(spec) - set(order[form]):
            raise ParameterOutOfRange(f"unknown fields for {form}: {sorted(set(spec) - set(order[form]))}")
        defaults = {"b": 0.0}
        return cls(form, tuple(float(spec.get(k, defaults.get(k, math.nan))) for k in order[form]))

    def to_spec(self) -> dict:
        names = {"identity": [], "power": ["s"], "affine": ["a", "b"], "constant": ["c"]}
        return {"form": self.form, **dict(zip(names[self.form], self.params))}


# -- certified pairs ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CertifiedPair:
    """``(f, g)`` with ``integral f**p0 w <= phi([w]) integral g**p0 w`` for all
    weights of the class at exponent ``p0`` (kernel ``psi``)."""

    f: object
    g: object
    beta: float
    p0: float
    phi: MonotoneFn
    kernel: PsiKernel | None = None
    origin: str = ""

    @classmethod
    def from_averaging_bound(cls, u, beta: float, p0: float, kernel: PsiKernel | None = None,
                             probe_grid=None) -> "CertifiedPair":
        """Pair ``(S_psi u, u)`` with ``phi(t) = t/(beta+1)**p0``."""
        QBeta(beta).require_nonpositive("averaging-operator bound")
        if not p0 >= 1.0:
            raise ParameterOutOfRange("the averaging-operator bound needs p0 >= 1")
        verdict = is_quasi_monotone(u, beta, probe_grid)
        if not verdict.is_member:
            raise HypothesisNotCertified(f"u is not quasi-monotone for beta={beta} ({verdict.label})")
        k = kernel if kernel is not None else PsiKernel.ones()
        return cls(s_psi(u, k), u, float(beta), float(p0),
                   MonotoneFn.affine((beta + 1.0) ** (-p0), 0.0), kernel, "averaging-operator bound")

    @classmethod
    def identical(cls, f, beta: float, p0: float, phi: MonotoneFn | None = None,
                  kernel: PsiKernel | None = None) -> "CertifiedPair":
        """``(f, f)``: valid for any ``phi`` with ``phi >= 1`` on ``[1, inf)``."""
        phi = phi or MonotoneFn.identity()
        if phi(1.0) < 1.0:
            raise HypothesisNotCertified("(f, f) needs phi(1) >= 1")
        return cls(f, f, float(beta), float(p0), phi, kernel, "identical pair")


def _require_pair(pair):
    if not isinstance(pair, CertifiedPair):
        raise HypothesisNotCertified("inputs must be a CertifiedPair built by a certified constructor")
    return pair


# -- reusable class-constant cache --------------------------------------------------

class ClassConstants:
    """Memoised ``q -> [w]_q`` (``inf`` when ``w`` is not a member at ``q``)."""

    def __init__(self, w, beta: float, domain: Domain, r_grid=None, refine_iter: int = 30,
                 psi: PsiKernel | None = None):
        self.w, self.beta, self.domain = w, beta, Domain.coerce(domain)
        self.r_grid, self.refine_iter, self.psi = r_grid, refine_iter, psi
        self.reports: dict = {}

    def __call__(self, q: float) -> float:
        key = float(q)
        if key not in self.reports:
            self.reports[key] = qb_constant(self.w, ClassParams(self.beta, key, self.psi, self.domain),
                                            self.r_grid, self.refine_iter)
        rep = self.reports[key]
        return rep.class_constant if rep.is_member else INF


@dataclass
class ExtrapConstant:
    value: float
    argmin: float
    profile: list = field(default_factory=list)
    hat: HatReport | None = None
    diagnostics: str = ""

    def to_dict(self) -> dict:
        return {"value": self.value, "argmin": self.argmin, "diagnostics": self.diagnostics}


def _bracket(beta: float, p0: float, eps: float, phi: MonotoneFn) -> float:
    top = p0 * (beta + 1.0)
    return (top - eps) / ((beta + 1.0) * (p0 - eps)) * phi(top / eps)


def _shift_value(cc, beta, p0, p, phi, eps):
    q = (p0 - eps) * p / p0
    c = cc(q)
    if math.isinf(c):
        return INF
    return c * _bracket(beta, p0, eps, phi) ** (p / p0)


def _validate(beta, p0, p, strict_p0=False):
    QBeta(beta).require_nonpositive("extrapolation")
    if strict_p0 and not p0 > 1.0:
        raise ParameterOutOfRange("p0 must exceed 1")
    if not p0 >= 1.0:
        raise ParameterOutOfRange("p0 must be at least 1")
    if not p >= p0:
        raise ParameterOutOfRange("p must be at least p0")


def default_shift_grid(beta: float, p0: float, n: int = 64) -> np.ndarray:
    top = p0 * (beta + 1.0)
    return log_grid(1e-4 * top, (1.0 - 1e-4) * top, n)


def _shift_infimum(cc, beta, p0, p, phi, eps_grid, refine_iter) -> ExtrapConstant:
    top = p0 * (beta + 1.0)
    eps = default_shift_grid(beta, p0) if eps_grid is None else np.sort(np.asarray(eps_grid, float))
    if eps.size == 0 or np.any(eps <= 0) or np.any(eps >= top):
        raise InvalidGrid(f"shift grid must lie inside (0, {top:g})")
    vals = np.array([_shift_value(cc, beta, p0, p, phi, float(e)) for e in eps])
    profile = list(zip(eps.tolist(), vals.tolist()))
    if not np.any(np.isfinite(vals)):
        raise EmptyGrid("no grid shift gives a class member")
    i = int(np.argmin(vals))
    best_e, best = float(eps[i]), float(vals[i])
    if refine_iter > 0 and eps.size >= 3:
        lo, hi = neighbours(np.log(eps), i)
        u, v = golden_min(lambda u: _shift_value(cc, beta, p0, p, phi, math.exp(u)), lo, hi, refine_iter)
        if v < best:
            best_e, best = math.exp(u), v
    return ExtrapConstant(best, best_e, profile)


# -- averaging-operator bound ------------------------------------------------------------

def averaging_bound_check(f, beta: float, p: float, w, kernel: PsiKernel | None = None,
                          domain: Domain = Domain.HALFLINE, r_grid=None, probe_grid=None,
                          tol: float = 1e-6) -> InequalityCheck:
    """``integral (S_psi f)**p w <= (C+1)/(beta+1)**p integral f**p w``.

    ``C`` is the measured class supremum of ``w``. On the unit interval both
    integrals and the class constant are taken over (0, 1).
    """
    QBeta(beta).require_nonpositive("averaging-operator bound")
    if not p >= 1.0:
        raise ParameterOutOfRange("p must be at least 1")
    domain = Domain.coerce(domain)
    verdict = is_quasi_monotone(f, beta, probe_grid)
    if not verdict.is_member:
        raise HypothesisNotCertified(f"f is not quasi-monotone for beta={beta} ({verdict.label})")
    rep = qb_constant(w, ClassParams(beta, p, kernel, domain), r_grid)
    if not rep.is_member:
        raise NotInClass(f"weight is not a class member: {rep.diagnostics}")
    k = kernel if kernel is not None else PsiKernel.ones()
    Sf = s_psi(f, k)
    lhs = lp_integral(Sf, w, p, domain).value
    base = lp_integral(f, w, p, domain).value
    const = (rep.sup_ratio + 1.0) / (beta + 1.0) ** p
    return InequalityCheck(lhs, const, base, tol,
                           {"class_constant": rep.class_constant, "argmax_r": rep.argmax_r})


def _kernel_weight(k: PsiKernel, power: float):
    """``Psi**power * psi`` as a closed form when possible."""
    B = k.big_psi
    if isinstance(B, ClosedFormFunc) and isinstance(k.psi, ClosedFormFunc):
        try:
            return B.power_of(power) * k.psi
        except NotRepresentable:
            pass
    pe = as_evaluable(k.psi)
    return EvaluableFunc(lambda x: np.asarray(B(x), float) ** power * pe(x), name="Psi^a psi",
                         breakpoints=pe.breakpoints)


def _integral_or_inf(f, t):
    try:
        return integrate(f, 0.0, t, 1e-13, rtol=1e-11).value
    except DivergentIntegral:
        return INF


def truncated_pair_check(pair: CertifiedPair, eps: float, t_grid, tol: float = 1e-6) -> list[InequalityCheck]:
    """``integral_0^t F m <= phi(p0(beta+1)/eps) integral_0^t G m`` for each ``t``,

    where ``F = f**p0``, ``G = g**p0`` and ``m = Psi**(p0-1-eps) psi``.
    """
    pair = _require_pair(pair)
    beta, p0 = pair.beta, pair.p0
    top = p0 * (beta + 1.0)
    if not 0.0 < eps < top:
        raise ParameterOutOfRange(f"eps must lie in (0, {top:g})")
    k = pair.kernel if pair.kernel is not None else PsiKernel.ones()
    m = _kernel_weight(k, p0 - 1.0 - eps)
    const = pair.phi(top / eps)
    F = pointwise_product(pair.f, p0, m)
    G = pointwise_product(pair.g, p0, m)
    out = []
    for t in t_grid:
        t = float(t)
        if not t > 0:
            raise InvalidGrid("t must be positive")
        lhs, base = _integral_or_inf(F, t), _integral_or_inf(G, t)
        out.append(InequalityCheck(lhs, const, base, tol, {"t": t, "eps": eps}))
    return out


# -- half-line extrapolation ---------------------------------------------------------------

def extrapolation_constant(w, beta: float, p0: float, p: float, phi: MonotoneFn | None = None,
                           eps_grid=None, r_grid=None, hat_eps_grid=None, refine_iter: int = 30,
                           check_hat: bool = True, cache: ClassConstants | None = None) -> ExtrapConstant:
    """``inf_eps [w]_{(p0-eps)p/p0} * B(eps)**(p/p0)`` with
    ``B(eps) = (p0(beta+1)-eps)/((beta+1)(p0-eps)) * phi(p0(beta+1)/eps)``."""
    _validate(beta, p0, p)
    phi = phi or MonotoneFn.identity()
    hat = None
    if check_hat:
        hat = hat_membership(w, beta, p, hat_eps_grid, Domain.HALFLINE, r_grid)
        if not hat.is_member:
            raise NotInHatClass(f"weight is not in the hat class at p={p} ({hat.verdict.value})")
    cc = cache or ClassConstants(w, beta, Domain.HALFLINE, r_grid, refine_iter)
    res = _shift_infimum(cc, beta, p0, p, phi, eps_grid, refine_iter)
    res.hat = hat
    return res


def extrapolation_check(pair: CertifiedPair, w, p: float, eps_grid=None, r_grid=None,
                        tol: float = 1e-6) -> InequalityCheck:
    """``integral f**p w <= C integral g**p w`` on the half-line."""
    pair = _require_pair(pair)
    if pair.kernel is not None and not pair.kernel.is_identity:
        raise HypothesisNotCertified("the half-line extrapolation needs a pair for the unit kernel")
    c = extrapolation_constant(w, pair.beta, pair.p0, p, pair.phi, eps_grid, r_grid)
    lhs = lp_integral(pair.f, w, p).value
    base = lp_integral(pair.g, w, p).value
    return InequalityCheck(lhs, c.value, base, tol, {"argmin_eps": c.argmin})


def infinity_extrapolation_constant(w, beta: float, p0: float, p: float, phi: MonotoneFn | None = None,
                                    alpha_grid=None, r_grid=None, domain: Domain = Domain.HALFLINE,
                                    refine_iter: int = 30) -> ExtrapConstant:
    """``inf_{alpha > -1} [w]_{(alpha+1)p/p0} * (phi(1)/(beta+1))**(p/p0)``.

    The weight belongs to the union class as soon as one grid exponent
    yields a member, so the grid sweep doubles as the membership test.
    """
    QBeta(beta).require_nonpositive("extrapolation")
    if not (p0 > 0 and p >= p0):
        raise ParameterOutOfRange("need p0 > 0 and p >= p0")
    phi = phi or MonotoneFn.identity()
    if alpha_grid is None:
        alphas = log_grid(0.1, 64.0, 64) * p0 / p - 1.0
    else:
        alphas = np.sort(np.asarray(alpha_grid, float))
    if alphas.size == 0 or np.any(alphas <= -1.0):
        raise InvalidGrid("alpha grid must be nonempty inside (-1, inf)")
    factor = (phi(1.0) / (beta + 1.0)) ** (p / p0)
    cc = ClassConstants(w, beta, domain, r_grid, refine_iter)

    def val(a):
        return cc((a + 1.0) * p / p0) * factor

    vals = np.array([val(float(a)) for a in alphas])
    profile = list(zip(alphas.tolist(), vals.tolist()))
    if not np.any(np.isfinite(vals)):
        raise NotInClass("no grid exponent gives a class member")
    i = int(np.argmin(vals))
    best_a, best = float(alphas[i]), float(vals[i])
    if refine_iter > 0 and alphas.size >= 3:
        lo, hi = neighbours(np.log1p(alphas), i)
        u, v = golden_min(lambda u: val(math.expm1(u)), lo, hi, refine_iter)
        if v < best:
            best_a, best = math.expm1(u), v
    return ExtrapConstant(best, best_a, profile, None, f"fixed factor {factor:.6g}")


# -- unit interval -------------------------------------------------------------------

def interval_extrapolation_constant(w, beta: float, p0: float, p_eff: float,
                                    phi: MonotoneFn | None = None, delta_grid=None, r_grid=None,
                                    refine_iter: int = 30, check_hat: bool = True,
                                    cache: ClassConstants | None = None) -> ExtrapConstant:
    """Unit-interval analogue of :func:`extrapolation_constant` at exponent ``p_eff``."""
    _validate(beta, p0, p_eff)
    phi = phi or MonotoneFn.identity()
    hat = None
    if check_hat:
        hat = hat_membership(w, beta, p_eff, None, Domain.UNIT_INTERVAL, r_grid)
        if not hat.is_member:
            raise NotInHatClass(f"weight is not in the interval hat class at p={p_eff}")
    cc = cache or ClassConstants(w, beta, Domain.UNIT_INTERVAL, r_grid, refine_iter)
    res = _shift_infimum(cc, beta, p0, p_eff, phi, delta_grid, refine_iter)
    res.hat = hat
    return res


def _kprime_on_lattice(cc, beta, p0, p_eff, phi, lattice) -> float:
    """Infimum over the shared exponent lattice; conservative (>= true infimum)."""
    lo, hi = -beta * p_eff, p_eff
    best = INF
    for q in lattice:
        if lo < q < hi:
            delta = p0 * (1.0 - q / p_eff)
            c = cc(float(q))
            if math.isfinite(c):
                best = min(best, c * _bracket(beta, p0, delta, phi) ** (p_eff / p0))
    return best


def grand_factor(p: float, theta: float, sigma: float, W: float) -> float:
    return max(1.0, p ** theta * sigma ** (-theta / (p - sigma))
               * (W + 1.0) ** ((p - 1.0 - sigma) / (p - sigma)))


@dataclass
class GrandConstant:
    value: float
    argmin_sigma: float
    profile: list = field(default_factory=list)  # (sigma, factor, inner sup, product)
    W: float = math.nan
    interior_minimum: bool = False
    p0: float = math.nan
    diagnostics: str = ""

    def to_dict(self) -> dict:
        return {"value": self.value, "argmin_sigma": self.argmin_sigma, "W": self.W,
                "interior_minimum": self.interior_minimum, "p0": self.p0,
                "diagnostics": self.diagnostics}


def default_p0(p: float) -> float:
    return 1.0 + 0.25 * (p - 1.0)


def grand_extrapolation_constant(w, beta: float, p0: float, p: float, theta: float,
                                 phi: MonotoneFn | None = None, sigma_grid=None, r_grid=None,
                                 lattice_size: int = 192, refine_iter: int = 20,
                                 check_hat: bool = True) -> GrandConstant:
    """Grand-space constant ``inf_sigma c(sigma) sup_{eps <= sigma} K'(p-eps)**(1/(p-eps))``.

    ``sigma`` ranges over ``(0, p - p0]`` so every shifted exponent stays at
    or above ``p0``. Inner infima use a lattice of exponents shared by all
    ``sigma`` so each class constant is measured once.
    """
    _validate(beta, p0, p, strict_p0=True)
    if not p > p0:
        raise ParameterOutOfRange("need p > p0 so that some sigma is admissible")
    if not theta > 0:
        raise ParameterOutOfRange("theta must be positive")
    phi = phi or MonotoneFn.identity()
    W = weight_mass(w, Domain.UNIT_INTERVAL)
    if check_hat:
        hat = hat_membership(w, beta, p, None, Domain.UNIT_INTERVAL, r_grid)
        if not hat.is_member:
            raise NotInHatClass(f"weight is not in the interval hat class at p={p}")
    smax = min(p - p0, p - 1.0)
    if sigma_grid is None:
        sig = log_grid(1e-3 * smax, smax, 64)
    else:
        sig = np.sort(np.asarray(sigma_grid, float))
        sig = sig[(sig > 0) & (sig <= smax)]
    if sig.size == 0:
        raise EmptyGrid(f"no sigma inside (0, {smax:g}]")
    q_lo = max(-beta * (p - smax), 0.1)
    lattice = log_grid(q_lo * (1.0 + 1e-9), p * (1.0 - 1e-9), lattice_size)
    cc = ClassConstants(w, beta, Domain.UNIT_INTERVAL, r_grid, refine_iter)

    def inner(eps):
        k = _kprime_on_lattice(cc, beta, p0, p - eps, phi, lattice)
        return k ** (1.0 / (p - eps)) if math.isfinite(k) else INF

    # eps -> 0+ limit approximated at the lattice top
    running = inner(0.0)
    rows = []
    for s in sig:
        running = max(running, inner(float(s)))
        fac = grand_factor(p, theta, float(s), W)
        rows.append((float(s), fac, running, fac * running))
    prods = np.array([r[3] for r in rows])
    if not np.any(np.isfinite(prods)):
        raise EmptyGrid("no sigma gives a finite constant")
    i = int(np.argmin(prods))
    best_s, best = rows[i][0], rows[i][3]
    interior = 0 < i < len(rows) - 1
    if refine_iter > 0 and sig.size >= 3:
        j0, j1 = max(i - 1, 0), min(i + 1, len(rows) - 1)

        def prod(u):
            s = math.exp(u)
            sup = max(max(r[2] for r in rows if r[0] <= s), inner(s))
            return grand_factor(p, theta, s, W) * sup

        u, v = golden_min(prod, math.log(rows[j0][0]), math.log(rows[j1][0]), refine_iter)
        if v < best:
            best_s, best = math.exp(u), v
    return GrandConstant(best, best_s, rows, W, interior, p0,
                         f"{len(cc.reports)} class constants measured")


@dataclass
class HardyGrandReport:
    checks: list
    constant: GrandConstant
    names: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def grand_hardy_check(f_family, w, beta: float, p: float, theta: float, p0: float | None = None,
                      sigma_grid=None, probe_grid=None, r_grid=None, tol: float = 1e-6,
                      grand: GrandParams | None = None, constant: GrandConstant | None = None,
                      names=None) -> HardyGrandReport:
    """``||Hf||_grand <= C* ||f||_grand`` on the unit interval for each ``f``.

    The base-exponent hypothesis comes from the averaging-operator bound, so
    ``phi(t) = t/(beta+1)**p0``.
    """
    QBeta(beta).require_nonpositive("grand-space bound")
    p0 = default_p0(p) if p0 is None else p0
    grid = default_probe_grid(1e-6, 1.0, 400) if probe_grid is None else probe_grid
    family = []
    for f in f_family:
        fr = f.restrict(0.0, 1.0) if isinstance(f, ClosedFormFunc) else f
        verdict = is_quasi_monotone(fr, beta, grid)
        if not verdict.is_member:
            raise HypothesisNotCertified(f"family member is not quasi-monotone ({verdict.label})")
        family.append(fr)
    phi = MonotoneFn.affine((beta + 1.0) ** (-p0), 0.0)
    if constant is None:
        constant = grand_extrapolation_constant(w, beta, p0, p, theta, phi, sigma_grid, r_grid)
    gp = grand or GrandParams(p, theta)
    checks = []
    for f in family:
        lhs = grand_norm(hardy(f), w, gp)
        rhs = grand_norm(f, w, gp)
        checks.append(InequalityCheck(lhs.value, constant.value, rhs.value, tol,
                                      {"lhs_argmax_eps": lhs.argmax_eps,
                                       "rhs_argmax_eps": rhs.argmax_eps}))
    return HardyGrandReport(checks, constant, list(names) if names else [])


@dataclass
class NecessityProfile:
    rows: list
    growth: list
    bound: float | None = None

    @property
    def ratios(self) -> list:
        return [r["ratio"] for r in self.rows]

    @property
    def within_bound(self) -> bool | None:
        if self.bound is None:
            return None
        return all(r <= self.bound * (1 + 1e-9) for r in self.ratios)


def truncated_power(beta: float, r: float) -> ClosedFormFunc:
    """``x**beta`` on ``(0, r)``, zero elsewhere."""
    return ClosedFormFunc.power(beta, 1.0, 0.0, r)


def grand_hardy_necessity(w, beta: float, p: float, theta: float, r_sequence,
                          grand: GrandParams | None = None,
                          sufficiency_constant: float | None = None) -> NecessityProfile:
    """Ratios ``||H f_r||_grand / ||f_r||_grand`` for ``f_r = x**beta`` on ``(0, r)``."""
    rs = [float(r) for r in r_sequence]
    if not rs or any(not 0.0 < r < 1.0 for r in rs) or any(b >= a for a, b in zip(rs, rs[1:])):
        raise InvalidGrid("r_sequence must be strictly decreasing inside (0, 1)")
    gp = grand or GrandParams(p, theta)
    rows = []
    for r in rs:
        fr = truncated_power(beta, r)
        lhs = grand_norm(hardy(fr), w, gp)
        rhs = grand_norm(fr, w, gp)
        ratio = lhs.value / rhs.value if rhs.value > 0 else INF
        rows.append({"r": r, "lhs": lhs.value, "rhs": rhs.value, "ratio": ratio,
                     "lhs_argmax_eps": lhs.argmax_eps})
    growth = [b["ratio"] / a["ratio"] for a, b in zip(rows, rows[1:])]
    return NecessityProfile(rows, growth, sufficiency_constant)
