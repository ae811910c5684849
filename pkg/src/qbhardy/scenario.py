"""Declarative scenarios: validation, dispatch and machine-readable reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Literal, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import __version__
from .errors import ConfigInvalid, ParameterOutOfTheoremRange, QBHardyError
from .extrap import (CertifiedPair, MonotoneFn, truncated_pair_check, averaging_bound_check,
                     grand_extrapolation_constant, grand_hardy_check, grand_hardy_necessity,
                     infinity_extrapolation_constant, extrapolation_check, extrapolation_constant)
from .funcspace import from_expr
from .norms import GrandParams, grand_norm, lp_integral, weighted_lp_norm
from .operators import PsiKernel
from .weightclass import ClassParams, Verdict, hat_membership, qb_constant

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"

Kind = Literal["classify", "hat-classify", "norm", "grand-norm", "hardy-check", "theorem-a",
               "lemma-2-2", "extrapolate-main", "extrapolate-infinity", "grand-extrapolate",
               "hardy-grand", "necessity"]
KINDS: tuple[str, ...] = Kind.__args__

# parameters each kind cannot run without
_REQUIRED = {
    "classify": ["weight", "p"],
    "hat-classify": ["weight", "p"],
    "norm": ["function", "weight", "p"],
    "grand-norm": ["function", "weight", "p", "theta"],
    "hardy-check": ["function", "weight", "p"],
    "theorem-a": ["function", "weight", "p"],
    "lemma-2-2": ["function", "p0", "eps", "t_grid"],
    "extrapolate-main": ["weight", "p0", "p"],
    "extrapolate-infinity": ["weight", "p0", "p"],
    "grand-extrapolate": ["weight", "p0", "p", "theta"],
    "hardy-grand": ["functions", "weight", "p", "theta"],
    "necessity": ["weight", "p", "theta", "r_sequence"],
}


class GridSpec(BaseModel):
    """Generated grid: ``n`` points between ``lo`` and ``hi``."""

    model_config = ConfigDict(extra="forbid")
    spacing: Literal["log", "linear"] = "log"
    lo: float
    hi: float
    n: int = Field(gt=0)

    @model_validator(mode="after")
    def _order(self):
        if not self.lo <= self.hi:
            raise ValueError("grid needs lo <= hi")
        if self.spacing == "log" and not self.lo > 0:
            raise ValueError("log grid needs lo > 0")
        return self

    def points(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.n)
        return np.linspace(self.lo, self.hi, self.n)


Grid = Union[list[float], GridSpec]


def grid_points(g: Grid | None):
    if g is None:
        return None
    return g.points() if isinstance(g, GridSpec) else np.asarray(g, float)


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario_kind: Kind
    name: str | None = None
    function: dict | None = None
    functions: list[dict] | None = None
    weight: dict | None = None
    kernel: dict | None = None
    domain: Literal["halfline", "interval"] = "halfline"
    beta: float = 0.0
    p: float | None = None
    p0: float | None = None
    theta: float | None = None
    eps: float | None = None
    phi: Union[str, dict, None] = None
    r_grid: Grid | None = None
    eps_grid: Grid | None = None
    sigma_grid: Grid | None = None
    alpha_grid: Grid | None = None
    t_grid: Grid | None = None
    r_sequence: list[float] | None = None
    min_growth: float | None = None
    max_ratio: float | None = None
    tol: float = Field(default=1e-6, gt=0)
    expect: Literal["pass", "fail"] = "pass"

    @field_validator("beta")
    @classmethod
    def _beta(cls, v):
        if not -1.0 < v <= 0.0:
            raise ValueError("beta must lie in (-1, 0]")
        return v

    @field_validator("function", "weight", "kernel")
    @classmethod
    def _expr(cls, v):
        if v is not None:
            from_expr(v)
        return v

    @field_validator("functions")
    @classmethod
    def _exprs(cls, v):
        if v is not None:
            if not v:
                raise ValueError("function family is empty")
            for e in v:
                from_expr(e)
        return v

    @field_validator("phi")
    @classmethod
    def _phi(cls, v):
        MonotoneFn.from_spec(v)
        return v

    @model_validator(mode="after")
    def _required(self):
        missing = [f for f in _REQUIRED[self.scenario_kind] if getattr(self, f) is None]
        if missing:
            raise ValueError(f"{self.scenario_kind} needs {', '.join(missing)}")
        return self

    def normalized(self) -> dict:
        return self.model_dump(mode="json", exclude_none=True)


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a raw mapping; failures raise :class:`ConfigInvalid`."""
    if not isinstance(data, dict):
        raise ConfigInvalid("<root>", "scenario must be a mapping")
    try:
        cfg = ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        where = ".".join(str(x) for x in err["loc"]) or "<root>"
        raise ConfigInvalid(where, err["msg"]) from None
    _check_theorem_ranges(cfg)
    return cfg


def _check_theorem_ranges(c: ScenarioConfig):
    k = c.scenario_kind

    def need(ok, theorem, fld, reason):
        if not ok:
            raise ParameterOutOfTheoremRange(theorem, fld, reason)

    if c.p is not None:
        need(c.p > 0 and math.isfinite(c.p), k, "p", "p must be positive and finite")
    if k in ("hardy-check", "theorem-a"):
        need(c.p >= 1.0, "averaging-operator bound", "p", "p >= 1")
    if k == "lemma-2-2":
        need(c.p0 >= 1.0, "averaging-operator bound", "p0", "p0 >= 1 for a certified pair")
        top = c.p0 * (c.beta + 1.0)
        need(0.0 < c.eps < top, "truncated pair bound", "eps", f"eps in (0, {top:g})")
    if k in ("extrapolate-main", "extrapolate-infinity", "grand-extrapolate"):
        need(c.p0 >= 1.0, "extrapolation", "p0", "p0 >= 1")
        need(c.p >= c.p0, "extrapolation", "p", "p >= p0")
    if k in ("grand-norm", "grand-extrapolate", "hardy-grand", "necessity"):
        need(c.p > 1.0, "grand space", "p", "p > 1")
        need(c.theta > 0.0, "grand space", "theta", "theta > 0")
    if k == "grand-extrapolate":
        need(1.0 < c.p0 < c.p, "grand space", "p0", "1 < p0 < p")
    if k == "hardy-grand" and c.p0 is not None:
        need(1.0 < c.p0 < c.p, "grand space", "p0", "1 < p0 < p")
    if k == "necessity":
        rs = c.r_sequence
        need(all(0.0 < r < 1.0 for r in rs) and all(b < a for a, b in zip(rs, rs[1:])),
             "grand space", "r_sequence", "strictly decreasing inside (0, 1)")


# -- report helpers ----------------------------------------------------------------

def _num(v):
    """JSON-safe scalar: non-finite floats become ``"inf"``/``"-inf"``/``"nan"``."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


def clean(obj):
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [clean(v) for v in obj]
    if isinstance(obj, Verdict):
        return obj.value
    return _num(obj)


def _grid_prov(name, g, default):
    if g is None:
        return {"grid": name, "source": default}
    if isinstance(g, GridSpec):
        return {"grid": name, "source": g.model_dump()}
    return {"grid": name, "source": "explicit", "n": len(g)}


class _Result:
    def __init__(self):
        self.verdicts, self.constants, self.checks = {}, {}, []
        self.profiles, self.diagnostics = {}, []
        self.outcome = "pass"

    def check(self, name, chk):
        d = chk.to_dict()
        d["name"] = name
        self.checks.append(d)
        if not chk.passed:
            self.outcome = "fail"


def _phi(c):
    return MonotoneFn.from_spec(c.phi)


def _kernel(c):
    return PsiKernel(from_expr(c.kernel)) if c.kernel is not None else None


def _class_outcome(res, verdict):
    res.outcome = {Verdict.MEMBER: "pass", Verdict.NOT_MEMBER: "fail"}.get(verdict, "inconclusive")


def _run_classify(c, res):
    rep = qb_constant(from_expr(c.weight), ClassParams(c.beta, c.p, _kernel(c), c.domain),
                      grid_points(c.r_grid))
    res.verdicts["membership"] = rep.verdict.value
    res.constants["class_constant"] = {"value": rep.class_constant, "argmax_r": rep.argmax_r,
                                       **_grid_prov("r", c.r_grid, "200 log points")}
    res.profiles["ratio_vs_r"] = rep.profile
    if rep.certificate:
        res.diagnostics.append(f"certificate: {rep.certificate}")
    if rep.diagnostics:
        res.diagnostics.append(rep.diagnostics)
    _class_outcome(res, rep.verdict)


def _run_hat(c, res):
    rep = hat_membership(from_expr(c.weight), c.beta, c.p, grid_points(c.eps_grid), c.domain,
                         grid_points(c.r_grid), _kernel(c))
    res.verdicts["membership"] = rep.verdict.value
    res.verdicts["base"] = rep.base.verdict.value
    res.constants["class_constant"] = {"value": rep.base.class_constant, "argmax_r": rep.base.argmax_r,
                                       **_grid_prov("r", c.r_grid, "200 log points")}
    if rep.shifted is not None:
        res.constants["shifted_class_constant"] = {
            "value": rep.shifted.class_constant, "witness_epsilon": rep.witness_epsilon,
            **_grid_prov("eps", c.eps_grid, "32 log points")}
    res.profiles["shift_scan"] = [(e, v) for e, v in rep.scanned]
    _class_outcome(res, rep.verdict)


def _run_norm(c, res):
    f, w = from_expr(c.function), from_expr(c.weight)
    q = lp_integral(f, w, c.p, c.domain)
    res.constants["norm"] = {"value": weighted_lp_norm(f, w, c.p, c.domain)}
    res.constants["integral"] = {"value": q.value, "abs_error_estimate": q.abs_error_estimate,
                                 "converged": q.converged, "subdivisions": q.subdivisions}
    if not q.converged:
        res.outcome = "inconclusive"


def _run_grand(c, res):
    r = grand_norm(from_expr(c.function), from_expr(c.weight), GrandParams(c.p, c.theta))
    res.constants["grand_norm"] = {"value": r.value, "argmax_eps": r.argmax_eps,
                                   "boundary_flag": r.boundary_flag,
                                   "grid": "eps", "source": "64 logit points + golden refinement"}
    res.profiles["eps_profile"] = r.profile
    if r.diagnostics:
        res.diagnostics.append(r.diagnostics)
    if r.inconclusive:
        res.outcome = "inconclusive"


def _run_hardy(c, res, kernel=None):
    chk = averaging_bound_check(from_expr(c.function), c.beta, c.p, from_expr(c.weight), kernel,
                                c.domain, grid_points(c.r_grid), tol=c.tol)
    res.constants["bound_constant"] = {"value": chk.rhs_constant,
                                       "argmax_r": chk.details["argmax_r"],
                                       **_grid_prov("r", c.r_grid, "200 log points")}
    res.check("averaging_bound", chk)


def _run_truncated_pair(c, res):
    pair = CertifiedPair.from_averaging_bound(from_expr(c.function), c.beta, c.p0, _kernel(c))
    for i, chk in enumerate(truncated_pair_check(pair, c.eps, grid_points(c.t_grid), c.tol)):
        res.check(f"t[{i}]", chk)
    res.profiles["lhs_vs_t"] = [(d["t"], d["lhs"]) for d in res.checks]


def _run_main(c, res):
    w = from_expr(c.weight)
    r = extrapolation_constant(w, c.beta, c.p0, c.p, _phi(c), grid_points(c.eps_grid), grid_points(c.r_grid))
    res.constants["extrapolation_constant"] = {"value": r.value, "argmin_eps": r.argmin,
                                               **_grid_prov("eps", c.eps_grid, "64 log points + golden")}
    res.profiles["eps_profile"] = r.profile
    if c.function is not None:
        pair = CertifiedPair.from_averaging_bound(from_expr(c.function), c.beta, c.p0)
        res.check("extrapolated_bound", extrapolation_check(pair, w, c.p, grid_points(c.eps_grid),
                                                            grid_points(c.r_grid), c.tol))


def _run_infinity(c, res):
    r = infinity_extrapolation_constant(from_expr(c.weight), c.beta, c.p0, c.p, _phi(c),
                                        grid_points(c.alpha_grid), grid_points(c.r_grid), c.domain)
    res.constants["extrapolation_constant"] = {"value": r.value, "argmin_alpha": r.argmin,
                                               **_grid_prov("alpha", c.alpha_grid, "64 log points + golden")}
    res.profiles["alpha_profile"] = r.profile


def _run_grand_extrap(c, res):
    g = grand_extrapolation_constant(from_expr(c.weight), c.beta, c.p0, c.p, c.theta, _phi(c),
                                     grid_points(c.sigma_grid), grid_points(c.r_grid))
    res.constants["grand_constant"] = {"value": g.value, "argmin_sigma": g.argmin_sigma, "W": g.W,
                                       "interior_minimum": g.interior_minimum,
                                       **_grid_prov("sigma", c.sigma_grid, "64 log points + golden")}
    res.profiles["sigma_profile"] = [(s, prod) for s, _, _, prod in g.profile]
    res.diagnostics.append(g.diagnostics)


def _run_hardy_grand(c, res):
    fam = [from_expr(e) for e in c.functions]
    rep = grand_hardy_check(fam, from_expr(c.weight), c.beta, c.p, c.theta, c.p0,
                            grid_points(c.sigma_grid), r_grid=grid_points(c.r_grid), tol=c.tol)
    g = rep.constant
    res.constants["grand_constant"] = {"value": g.value, "argmin_sigma": g.argmin_sigma, "W": g.W,
                                       "p0": g.p0, "interior_minimum": g.interior_minimum,
                                       **_grid_prov("sigma", c.sigma_grid, "64 log points + golden")}
    res.profiles["sigma_profile"] = [(s, prod) for s, _, _, prod in g.profile]
    for i, chk in enumerate(rep.checks):
        res.check(f"functions[{i}]", chk)


def _run_necessity(c, res):
    prof = grand_hardy_necessity(from_expr(c.weight), c.beta, c.p, c.theta, c.r_sequence,
                                 sufficiency_constant=c.max_ratio)
    res.profiles["ratio_vs_r"] = [(row["r"], row["ratio"]) for row in prof.rows]
    res.constants["growth_per_step"] = {"value": min(prof.growth) if prof.growth else math.nan,
                                        "factors": prof.growth}
    ok = True
    if c.min_growth is not None:
        ok = ok and all(g >= c.min_growth for g in prof.growth)
        res.verdicts["unbounded_growth"] = "pass" if ok else "fail"
    if c.max_ratio is not None:
        bounded = bool(prof.within_bound)
        res.verdicts["bounded"] = "pass" if bounded else "fail"
        ok = ok and bounded
    res.outcome = "pass" if ok else "fail"


_DISPATCH = {
    "classify": _run_classify,
    "hat-classify": _run_hat,
    "norm": _run_norm,
    "grand-norm": _run_grand,
    "hardy-check": _run_hardy,
    "theorem-a": lambda c, res: _run_hardy(c, res, _kernel(c)),
    "lemma-2-2": _run_truncated_pair,
    "extrapolate-main": _run_main,
    "extrapolate-infinity": _run_infinity,
    "grand-extrapolate": _run_grand_extrap,
    "hardy-grand": _run_hardy_grand,
    "necessity": _run_necessity,
}


def run_scenario(config) -> dict:
    """Run one scenario and return its report.

    Numerical failures become ``status = "error"`` entries; configuration
    problems raise before any work is done.
    """
    cfg = config if isinstance(config, ScenarioConfig) else parse_config(config)
    res = _Result()
    error = None
    t0 = time.perf_counter()
    try:
        _DISPATCH[cfg.scenario_kind](cfg, res)
    except QBHardyError as exc:
        error = {"type": type(exc).__name__, "message": str(exc)}
        res.outcome = "error"
        log.debug("scenario %s failed: %s", cfg.name, exc)
    elapsed = time.perf_counter() - t0
    matched = res.outcome == cfg.expect
    report = {
        "schema_version": SCHEMA_VERSION,
        "toolkit_version": __version__,
        "scenario": cfg.normalized(),
        "status": res.outcome,
        "expected": cfg.expect,
        "ok": matched or (res.outcome == "inconclusive"),
        "verdicts": res.verdicts,
        "constants": res.constants,
        "checks": res.checks,
        "profiles": {k: [list(pt) for pt in v] for k, v in res.profiles.items()},
        "diagnostics": [d for d in res.diagnostics if d],
        "error": error,
        "timing": {"seconds": elapsed},
    }
    return clean(report)


def _run_one(data):
    try:
        return run_scenario(data)
    except (ConfigInvalid, ParameterOutOfTheoremRange) as exc:
        name = data.get("name") if isinstance(data, dict) else None
        return clean({"schema_version": SCHEMA_VERSION, "toolkit_version": __version__,
                      "scenario": data if isinstance(data, dict) else {"name": name},
                      "status": "config-error", "expected": None, "ok": False,
                      "error": {"type": type(exc).__name__, "message": str(exc)},
                      "timing": {"seconds": 0.0}})


def suite_exit_code(reports: list, strict: bool = False) -> int:
    if any(r["status"] == "config-error" for r in reports):
        return 2
    if any(not r["ok"] for r in reports):
        return 1
    if strict and any(r["status"] == "inconclusive" for r in reports):
        return 3
    return 0


def run_suite(configs: list, parallelism: int = 1, strict: bool = False) -> dict:
    """Run every scenario; one failing scenario never stops the others."""
    if not configs:
        raise ConfigInvalid("scenarios", "suite is empty")
    if parallelism < 1:
        raise ConfigInvalid("jobs", "parallelism must be positive")
    items = [c.normalized() if isinstance(c, ScenarioConfig) else c for c in configs]
    if parallelism == 1 or len(items) == 1:
        reports = [_run_one(c) for c in items]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as ex:
            reports = list(ex.map(_run_one, items))
    counts = {}
    for r in reports:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    summary = [{"name": r["scenario"].get("name"), "kind": r["scenario"].get("scenario_kind"),
                "status": r["status"], "ok": r["ok"]} for r in reports]
    return {"schema_version": SCHEMA_VERSION, "toolkit_version": __version__,
            "summary": summary, "counts": counts, "exit_code": suite_exit_code(reports, strict),
            "scenarios": reports,
            "timing": {"seconds": sum(r["timing"]["seconds"] for r in reports)}}


# -- files -------------------------------------------------------------------------

def load_config_file(path) -> list[dict]:
    """Read a YAML/JSON file holding one scenario or ``{"scenarios": [...]}``."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigInvalid("config", f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigInvalid("config", f"not valid YAML/JSON: {exc}") from None
    if isinstance(data, dict) and "scenarios" in data:
        extra = set(data) - {"scenarios", "defaults"}
        if extra:
            raise ConfigInvalid("config", f"unknown top-level fields {sorted(extra)}")
        defaults = data.get("defaults") or {}
        items = data["scenarios"]
        if not isinstance(items, list):
            raise ConfigInvalid("scenarios", "must be a list")
        return [{**defaults, **s} for s in items]
    if isinstance(data, dict):
        return [data]
    raise ConfigInvalid("config", "expected a mapping")


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def _slug(s) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in str(s))


def write_sidecars(reports: list, out: Path) -> list[Path]:
    """One ``param,value`` CSV per profile next to ``out``."""
    written = []
    for i, r in enumerate(reports):
        tag = _slug(r["scenario"].get("name") or f"scenario{i}")
        for pname, rows in (r.get("profiles") or {}).items():
            p = out.with_name(f"{out.stem}.{tag}.{pname}.csv")
            with p.open("w", newline="") as fh:
                wr = csv.writer(fh)
                wr.writerow(["parameter", "value"])
                wr.writerows(rows)
            written.append(p)
    return written


def summary_csv(reports: list) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf)
    wr.writerow(["name", "kind", "status", "ok", "constant", "value"])
    for r in reports:
        consts = r.get("constants") or {}
        first = next(iter(consts.items()), (None, {}))
        wr.writerow([r["scenario"].get("name", ""), r["scenario"].get("scenario_kind", ""),
                     r["status"], r["ok"], first[0] or "", first[1].get("value", "")])
    return buf.getvalue()
