"""Weighted Lebesgue and grand Lebesgue norms."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._search import golden_max
from .errors import DivergentIntegral, DivergentWI, ParameterOutOfRange
from .funcspace import INF, ClosedFormFunc, Domain, pointwise_product
from .inequality import InequalityCheck
from .quadrature import QuadResult, integrate


def lp_integral(f, w, q: float, domain: Domain = Domain.HALFLINE, tol: float = 1e-12) -> QuadResult:
    """``integral |f|**q w`` over the domain; divergence gives value ``inf``."""
    domain = Domain.coerce(domain)
    g = pointwise_product(f, q, w)
    try:
        return integrate(g, 0.0, domain.upper, tol, rtol=1e-11)
    except DivergentIntegral:
        return QuadResult(INF, 0.0, True, 0)


def weighted_lp_norm(f, w, p: float, domain: Domain = Domain.HALFLINE) -> float:
    """``(integral |f|**p w)**(1/p)``; ``inf`` when the integral diverges."""
    if not p > 0:
        raise ParameterOutOfRange("p must be positive")
    res = lp_integral(f, w, p, domain)
    if not res.converged:
        warnings.warn(f"quadrature did not converge (error estimate {res.abs_error_estimate:g})",
                      RuntimeWarning, stacklevel=2)
    return INF if math.isinf(res.value) else max(res.value, 0.0) ** (1.0 / p)


def weight_mass(w, domain: Domain = Domain.UNIT_INTERVAL) -> float:
    """``integral w`` over the domain; raises :class:`DivergentWI` if infinite."""
    res = lp_integral(ClosedFormFunc.constant(1.0), w, 1.0, domain)
    if math.isinf(res.value):
        raise DivergentWI("the weight is not integrable over the domain")
    return res.value


@dataclass(frozen=True)
class GrandParams:
    p: float
    theta: float
    eps_lo: float | None = None
    eps_hi: float | None = None
    n_grid: int = 64
    refine_iter: int = 50

    def __post_init__(self):
        if not self.p > 1.0:
            raise ParameterOutOfRange("grand norms need p > 1")
        if not self.theta > 0:
            raise ParameterOutOfRange("theta must be positive")
        lo = 1e-6 * (self.p - 1.0) if self.eps_lo is None else self.eps_lo
        hi = (1.0 - 1e-6) * (self.p - 1.0) if self.eps_hi is None else self.eps_hi
        if not (0.0 < lo < hi < self.p - 1.0):
            raise ParameterOutOfRange("need 0 < eps_lo < eps_hi < p - 1")
        object.__setattr__(self, "eps_lo", lo)
        object.__setattr__(self, "eps_hi", hi)


@dataclass
class GrandNormResult:
    value: float
    argmax_eps: float
    profile: list = field(default_factory=list)
    boundary_flag: str | None = None
    inconclusive: bool = False
    diagnostics: str = ""

    def to_dict(self) -> dict:
        return {"value": self.value, "argmax_eps": self.argmax_eps,
                "boundary_flag": self.boundary_flag, "inconclusive": self.inconclusive,
                "diagnostics": self.diagnostics}


def _logit(e, width):
    return math.log(e / (width - e))


def _expit(t, width):
    return width / (1.0 + math.exp(-t))


def grand_norm(f, w, gp: GrandParams) -> GrandNormResult:
    """``sup_eps (eps**theta integral_0^1 |f|**(p-eps) w)**(1/(p-eps))``.

    The sweep is uniform in ``logit(eps/(p-1))`` so both ends of the window
    are resolved, followed by golden-section refinement. When the profile is
    still rising at a window edge, the limit toward that edge is estimated
    by geometric extrapolation of the last grid increments.
    """
    p, theta = gp.p, gp.theta
    width = p - 1.0
    weight_mass(w, Domain.UNIT_INTERVAL)
    notes = []

    def g(eps):
        res = lp_integral(f, w, p - eps, Domain.UNIT_INTERVAL)
        if not res.converged:
            notes.append(f"quadrature unconverged at eps={eps:g}")
        J = res.value
        if math.isinf(J):
            return INF
        if J <= 0.0:
            return 0.0
        return math.exp((theta * math.log(eps) + math.log(J)) / (p - eps))

    ts = np.linspace(_logit(gp.eps_lo, width), _logit(gp.eps_hi, width), gp.n_grid)
    eps = np.array([_expit(t, width) for t in ts])
    eps[0], eps[-1] = gp.eps_lo, gp.eps_hi
    vals = np.array([g(float(e)) for e in eps])
    profile = list(zip(eps.tolist(), vals.tolist()))
    if np.any(np.isinf(vals)):
        j = int(np.argmax(np.isinf(vals)))
        return GrandNormResult(INF, float(eps[j]), profile, None, False,
                               f"integral diverges at eps={eps[j]:g}")
    i = int(np.argmax(vals))
    best_e, best = float(eps[i]), float(vals[i])
    if gp.refine_iter > 0 and gp.n_grid >= 3:
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
        t, v = golden_max(lambda t: g(_expit(t, width)), lo, hi, gp.refine_iter)
        if v > best:
            best_e, best = _expit(t, width), v

    flag = None
    window = gp.eps_hi - gp.eps_lo
    if best_e - gp.eps_lo <= 0.01 * window or i == 0:
        flag = "near_lo"
        lim = _edge_limit(vals[:3][::-1])
    elif gp.eps_hi - best_e <= 0.01 * window or i == len(vals) - 1:
        flag = "near_hi"
        lim = _edge_limit(vals[-3:])
    else:
        lim = None
    if lim is not None and lim > best:
        notes.append(f"edge limit extrapolated ({flag})")
        best = lim
    return GrandNormResult(best, best_e, profile, flag, bool(notes and any("unconverged" in n for n in notes)),
                           "; ".join(dict.fromkeys(notes)))


def _edge_limit(v):
    """Geometric limit of three samples approaching an edge, if saturating."""
    d1, d2 = v[1] - v[0], v[2] - v[1]
    if d1 > 0 and d2 > 0 and d2 < d1:
        q = d2 / d1
        return float(v[2] + d2 * q / (1.0 - q))
    return None


def holder_step_check(f, w, p: float, sigma: float, eps: float, tol: float = 1e-9) -> InequalityCheck:
    """Compare the ``L^{p-eps}_w`` and ``L^{p-sigma}_w`` norms on the unit interval.

    For ``0 < sigma <= eps < p - 1`` Hoelder gives
    ``||f||_{p-eps} <= ||f||_{p-sigma} W**((eps-sigma)/((p-sigma)(p-eps)))``
    with ``W = integral_0^1 w``; the checked constant is the coarser
    ``(W + 1)**((p-1-sigma)/(p-sigma))`` and the sharp one is kept in ``details``.
    """
    if not (0.0 < sigma <= eps < p - 1.0):
        raise ParameterOutOfRange("need 0 < sigma <= eps < p - 1")
    W = weight_mass(w, Domain.UNIT_INTERVAL)
    lhs = weighted_lp_norm(f, w, p - eps, Domain.UNIT_INTERVAL)
    base = weighted_lp_norm(f, w, p - sigma, Domain.UNIT_INTERVAL)
    const = (W + 1.0) ** ((p - 1.0 - sigma) / (p - sigma))
    sharp = W ** ((eps - sigma) / ((p - sigma) * (p - eps)))
    return InequalityCheck(lhs, const, base, tol,
                           {"sigma": sigma, "eps": eps, "W": W, "sharp_constant": sharp})
