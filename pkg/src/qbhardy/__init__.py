"""Numerical verification of weighted Hardy-type inequalities on quasi-monotone cones."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .errors import __all__ as _error_names  # noqa: E402
from .funcspace import (ClosedFormFunc, Domain, EvaluableFunc, QBeta, from_expr,  # noqa: E402
                        is_quasi_monotone, named_function, to_expr)
from .quadrature import QuadResult, integrate, integrate_finite, integrate_tail, riemann_oracle  # noqa: E402
from .operators import PsiKernel, big_psi, hardy, s_psi  # noqa: E402
from .weightclass import (ClassParams, ClassReport, Verdict, hat_membership,  # noqa: E402
                          power_weight_membership, qb_constant, qb_infinity_constant, qb_ratio)
from .norms import GrandParams, grand_norm, holder_step_check, weight_mass, weighted_lp_norm  # noqa: E402
from .inequality import InequalityCheck  # noqa: E402
from .extrap import (CertifiedPair, MonotoneFn, averaging_bound_check, extrapolation_check,  # noqa: E402
                     extrapolation_constant, grand_extrapolation_constant, grand_hardy_check,
                     grand_hardy_necessity, infinity_extrapolation_constant,
                     interval_extrapolation_constant, truncated_pair_check)
from .scenario import ScenarioConfig, parse_config, run_scenario, run_suite  # noqa: E402

__all__ = ["__version__", *_error_names,
           "ClosedFormFunc", "Domain", "EvaluableFunc", "QBeta", "from_expr", "is_quasi_monotone",
           "named_function", "to_expr", "QuadResult", "integrate", "integrate_finite", "integrate_tail",
           "riemann_oracle", "PsiKernel", "big_psi", "hardy", "s_psi", "ClassParams", "ClassReport",
           "Verdict", "hat_membership", "power_weight_membership", "qb_constant", "qb_infinity_constant",
           "qb_ratio", "GrandParams", "grand_norm", "holder_step_check", "weight_mass", "weighted_lp_norm",
           "InequalityCheck", "CertifiedPair", "MonotoneFn", "averaging_bound_check", "extrapolation_check",
           "extrapolation_constant", "grand_extrapolation_constant", "grand_hardy_check",
           "grand_hardy_necessity", "infinity_extrapolation_constant", "interval_extrapolation_constant",
           "truncated_pair_check", "ScenarioConfig", "parse_config", "run_scenario", "run_suite"]
