"""Command line: ``orbitdens run CONFIG``, ``orbitdens fig1``, ``orbitdens presets list``.

Exit codes: 0 ok, 1 a check failed, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import logging
import os
import sys

import click

from . import config as cfgmod
from .errors import AccuracyError, ConfigError, DomainError, OpenShellError, OrbitDensError
from .pipeline import run

OUT_ROOT_ENV = "ORBITDENS_OUT_ROOT"

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _execute(cfg, name, out, kmax, no_svg, strict):
    try:
        report = run(cfg, out_dir=out, k_max=kmax, svg=not no_svg, strict=strict, name=name,
                     env_root=os.environ.get(OUT_ROOT_ENV))
    except (ConfigError, OpenShellError) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (AccuracyError, DomainError, ArithmeticError, OrbitDensError, ValueError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    for check, res in report.checks.items():
        status = "PASS" if res["passed"] else "FAIL"
        click.echo(f"{status} {check} = {res['value']} (threshold {res['threshold']:g})")
    click.echo(f"output: {report.out_dir}")
    sys.exit(EXIT_OK if report.passed else EXIT_CHECK)


_common = [
    click.option("--out", "out", type=click.Path(file_okay=False), default=None, help="Output directory."),
    click.option("--kmax", type=int, default=None, help="Override the number of orbit repetitions."),
    click.option("--no-svg", is_flag=True, help="Skip the SVG plots."),
    click.option("--strict", is_flag=True, help="Also apply every default check."),
]


def common(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


@click.group()
@click.option("-v", "--verbose", count=True, help="Log progress (-vv for debug).")
def main(verbose):
    """Density oscillations of confined fermions from closed classical orbits."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command("run")
@click.argument("config_path", required=False, type=click.Path(dir_okay=False))
@click.option("--config", "config_opt", type=click.Path(dir_okay=False), default=None, help="Run configuration (JSON).")
@common
def run_cmd(config_path, config_opt, out, kmax, no_svg, strict):
    """Run the pipeline described by a JSON configuration file."""
    path = config_opt or config_path
    if path is None:
        click.echo("configuration error: no configuration file given", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        cfg = cfgmod.load_config(path)
    except OSError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    name = os.path.splitext(os.path.basename(path))[0]
    _execute(cfg, name, out, kmax, no_svg, strict)


@main.command("fig1")
@click.option("--preset", "preset_name", default="fig1", show_default=True, help="Built-in preset to run.")
@common
def fig1_cmd(preset_name, out, kmax, no_svg, strict):
    """Run a built-in preset (default: quartic well, N = 40)."""
    try:
        cfg = cfgmod.preset(preset_name)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    _execute(cfg, preset_name, out, kmax, no_svg, strict)


@main.group("presets")
def presets_group():
    """Built-in configurations."""


@presets_group.command("list")
def presets_list():
    for name in cfgmod.PRESETS:
        click.echo(f"{name:10s} {cfgmod.PRESET_DESCRIPTIONS[name]}")


@presets_group.command("show")
@click.argument("name")
def presets_show(name):
    """Print a preset as a JSON configuration."""
    import json

    try:
        cfg = cfgmod.preset(name)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(json.dumps(cfg.model_dump(exclude_none=True), indent=2))


if __name__ == "__main__":
    main()
