"""Command-line front end for the scenario engine."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .errors import ConfigInvalid, ParameterOutOfTheoremRange
from .scenario import (dumps_report, load_config_file, parse_config, run_suite, summary_csv,
                       write_sidecars)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INCONCLUSIVE = 0, 1, 2, 3

# scenario kinds each subcommand accepts; the first is the default
_GROUPS = {
    "classify": ("classify", "hat-classify"),
    "norm": ("norm",),
    "grand-norm": ("grand-norm",),
    "hardy-check": ("hardy-check", "theorem-a", "lemma-2-2", "hardy-grand"),
    "extrapolate": ("extrapolate-main", "extrapolate-infinity", "grand-extrapolate"),
    "necessity": ("necessity",),
}


def _common(fn):
    opts = [
        click.option("--config", "config", required=True, type=click.Path(dir_okay=False),
                     help="YAML or JSON scenario file."),
        click.option("--out", type=click.Path(dir_okay=False), default=None,
                     help="Report path (stdout when omitted)."),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json"),
        click.option("--tol", type=float, default=None, help="Override every scenario tolerance."),
        click.option("--jobs", type=click.IntRange(min=1), default=1, help="Scenario-level workers."),
        click.option("--seed", type=int, default=None,
                     help="Accepted for reproducibility records; all algorithms are deterministic."),
        click.option("--verbose", "-v", is_flag=True),
        click.option("--strict", is_flag=True, help="Exit 3 when any result is inconclusive."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _execute(subcommand, config, out, fmt, tol, jobs, seed, verbose, strict):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        items = load_config_file(config)
        allowed = _GROUPS.get(subcommand)
        for it in items:
            if allowed is not None:
                it.setdefault("scenario_kind", allowed[0])
                if it["scenario_kind"] not in allowed:
                    raise ConfigInvalid("scenario_kind",
                                        f"{it['scenario_kind']!r} is not handled by '{subcommand}'")
            if tol is not None:
                it["tol"] = tol
            parse_config(it)
        report = run_suite(items, jobs, strict)
    except (ConfigInvalid, ParameterOutOfTheoremRange) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    if seed is not None:
        report["seed"] = seed
    reports = report["scenarios"]
    text = dumps_report(report) if fmt == "json" else summary_csv(reports)
    if out:
        path = Path(out)
        path.write_text(text)
        for p in write_sidecars(reports, path):
            logging.getLogger(__name__).debug("wrote %s", p)
    else:
        click.echo(text)
    for r in reports:
        err = r.get("error")
        line = f"{r['scenario'].get('name') or r['scenario'].get('scenario_kind')}: {r['status']}"
        if err:
            line += f" ({err['type']}: {err['message']})"
        click.echo(line, err=True)
    sys.exit(report["exit_code"])


@click.group()
@click.version_option(package_name="qbhardy")
def main():
    """Check weighted Hardy-type inequalities numerically."""


def _register(name, help_text):
    @main.command(name=name, help=help_text)
    @_common
    def cmd(**kw):
        _execute(name, **kw)

    return cmd


_register("classify", "Class membership and class constant of a weight.")
_register("norm", "Weighted Lebesgue norm of a function.")
_register("grand-norm", "Weighted grand Lebesgue norm on the unit interval.")
_register("hardy-check", "Averaging-operator bounds for certified functions.")
_register("extrapolate", "Extrapolation constants.")
_register("necessity", "Blow-up profiles for the test functions.")
_register("suite", "Run a list of scenarios of any kind.")


if __name__ == "__main__":
    main()
