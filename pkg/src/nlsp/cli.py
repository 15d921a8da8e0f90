"""Command-line interface for the experiment suites.

Every subcommand resolves its settings as defaults < config file < flags,
runs one battery (or all of them), writes ``summary.json`` plus CSV tables
into the output directory, and exits with:

* ``0`` — all invariants held,
* ``1`` — at least one invariant failed (names on stderr),
* ``2`` — the configuration was invalid.

Results are a pure function of the configuration echoed in
``summary.json``; the output directory and worker-thread count are
excluded from that echo because they never change a computed number.
"""

from __future__ import annotations

import csv
import functools
import json
import math
import os
from pathlib import Path

import click
import numpy as np

from .config import ExperimentConfig, build_config
from .errors import ConfigError
from .suites import (
    SuiteResult,
    run_all,
    run_counterexample,
    run_curvature,
    run_fubini,
    run_geodesic,
    run_length,
    run_skorokhod,
    run_speed,
    run_transport,
)

_CONFIG_FIELDS = ("target", "base", "p", "grid", "trials")


def _parse_tolerance_flags(pairs) -> dict[str, float]:
    out: dict[str, float] = {}
    for item in pairs:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise ConfigError(f"expected NAME=VALUE, got {item!r}",
                              field="tolerance")
        try:
            out[name] = float(value)
        except ValueError as exc:
            raise ConfigError(f"expected a number, got {value!r}",
                              field=f"tolerance.{name}") from exc
    return out


def _resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return int(flag)
    env = os.environ.get("NLSP_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            value = 0
        if value < 1:
            raise ConfigError(
                f"NLSP_THREADS must be a positive integer, got {env!r}",
                field="threads")
        return value
    return 1


def _cell(value):
    """Render one CSV cell deterministically."""
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float):
        return repr(value)
    return value


def _finish(cfg: ExperimentConfig, results: list[SuiteResult]) -> None:
    """Write summary.json and CSV artifacts, then exit by pass/fail."""
    outdir = Path(cfg.output)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = {
        "config": cfg.normalized(),
        "passed": all(r.passed for r in results),
        "suites": {
            r.name: {
                "passed": r.passed,
                "metrics": r.metrics,
                "failures": list(r.failures),
            }
            for r in results
        },
    }
    (outdir / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n",
        encoding="utf-8")
    for result in results:
        for name, rows in result.csv.items():
            with open(outdir / f"{name}.csv", "w", newline="",
                      encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerows([[_cell(x) for x in row] for row in rows])
    if not summary["passed"]:
        for result in results:
            for failure in result.failures:
                click.echo(f"FAIL[{result.name}] {failure}", err=True)
        raise SystemExit(1)
    click.echo("OK: " + ", ".join(r.name for r in results)
               + f" -> {outdir / 'summary.json'}")


def _reject_unused(cfg: ExperimentConfig, command: str, used: tuple[str, ...]):
    for name in _CONFIG_FIELDS:
        if name not in used and getattr(cfg, name) is not None:
            raise ConfigError(f"not used by {command!r}", field=name)


def _require_finite_p_above_one(p: float) -> float:
    if math.isinf(p) or p <= 1.0:
        raise ConfigError(
            f"this battery needs a finite exponent > 1, got {p!r}", field="p")
    return float(p)


def _single_grid(cfg: ExperimentConfig) -> int | None:
    if cfg.grid is None:
        return None
    if len(cfg.grid) != 1:
        raise ConfigError(
            f"expected a single node count here, got {list(cfg.grid)}",
            field="grid")
    return int(cfg.grid[0])


def _refining_grids(cfg: ExperimentConfig) -> tuple[int, ...] | None:
    if cfg.grid is None:
        return None
    if len(cfg.grid) < 2:
        raise ConfigError(
            "convergence batteries need at least two increasing node "
            f"counts, got {list(cfg.grid)}", field="grid")
    return cfg.grid


def common_options(fn):
    @click.option("--config", "config_path",
                  type=click.Path(exists=True, dir_okay=False),
                  default=None, help="JSON config file.")
    @click.option("--seed", type=click.IntRange(min=0), default=None,
                  help="Root seed for all random streams (default 7).")
    @click.option("--out", "output", type=click.Path(file_okay=False),
                  default=None, help="Output directory (default '.').")
    @click.option("--threads", type=click.IntRange(min=1), default=None,
                  help="Worker threads; never changes results "
                       "(default NLSP_THREADS or 1).")
    @click.option("--tolerance", "tolerance_flags", multiple=True,
                  metavar="NAME=VALUE",
                  help="Override one check tolerance (repeatable).")
    @functools.wraps(fn)
    def wrapper(config_path, seed, output, threads, tolerance_flags,
                **kwargs):
        try:
            cfg = build_config(
                config_path,
                seed=seed,
                output=output,
                threads=_resolve_threads(threads),
                tolerances=_parse_tolerance_flags(tolerance_flags),
            )
            fn(cfg, **kwargs)
        except ConfigError as exc:
            click.echo(f"configuration error: {exc}", err=True)
            raise SystemExit(2) from exc

    return wrapper


@click.group()
def main():
    """Deterministic experiment suites for metric-valued mapping spaces."""


@main.command()
@common_options
def fubini(cfg: ExperimentConfig):
    """Iterated norms against the joint product norm."""
    _reject_unused(cfg, "fubini", ("trials", "p"))
    tol = cfg.effective_tolerances()
    kwargs = {}
    if cfg.p is not None:
        kwargs["p_values"] = (cfg.p,)
    _finish(cfg, [run_fubini(seed=cfg.seed, trials=cfg.trials or 100,
                             threads=cfg.threads,
                             rel_tol=tol["fubini_rel"], **kwargs)])


@main.command()
@click.option("--counterexample-p1", is_flag=True,
              help="Run the p=1 moving-indicator counterexample instead.")
@click.option("--n", "n_atoms", type=click.IntRange(min=2), default=None,
              help="Atom count for the counterexample (repeatable sizes "
                   "4, 16, 64 when omitted).")
@common_options
def transport(cfg: ExperimentConfig, counterexample_p1: bool,
              n_atoms: int | None):
    """Atomwise slicing of curves: speed and variation identities."""
    tol = cfg.effective_tolerances()
    if counterexample_p1:
        _reject_unused(cfg, "transport --counterexample-p1", ())
        sizes = (n_atoms,) if n_atoms is not None else (4, 16, 64)
        _finish(cfg, [run_counterexample(
            seed=cfg.seed, sizes=sizes, tv_tol=tol["counterexample_tv"])])
        return
    if n_atoms is not None:
        raise ConfigError("--n requires --counterexample-p1", field="n")
    _reject_unused(cfg, "transport", ("trials", "p", "grid"))
    kwargs = {}
    if cfg.p is not None:
        kwargs["p"] = _require_finite_p_above_one(cfg.p)
    grids = _refining_grids(cfg)
    if grids is not None:
        kwargs["grids"] = grids
    _finish(cfg, [run_transport(
        seed=cfg.seed, curves=cfg.trials or 20, threads=cfg.threads,
        residual_tol=tol["transport_residual"], order_min=tol["order_min"],
        variation_tol=tol["variation_residual"], **kwargs)])


@main.command()
@common_options
def geodesic(cfg: ExperimentConfig):
    """Constant-speed interpolation between mappings."""
    _reject_unused(cfg, "geodesic", ("trials", "p", "grid", "target", "base"))
    tol = cfg.effective_tolerances()
    kwargs = {}
    if cfg.p is not None:
        kwargs["p_values"] = (cfg.p,)
    n_nodes = _single_grid(cfg)
    if n_nodes is not None:
        kwargs["n_nodes"] = n_nodes
    target = cfg.target_space()
    if target is not None:
        kwargs["targets"] = (target,)
    base = cfg.base_space()
    if base is not None:
        kwargs["base_space"] = base
    _finish(cfg, [run_geodesic(
        seed=cfg.seed, trials=cfg.trials or 3, threads=cfg.threads,
        residual_tol=tol["geodesic_residual"], **kwargs)])


@main.command()
@common_options
def curvature(cfg: ExperimentConfig):
    """Comparison-sign transfer from targets to mapping spaces."""
    _reject_unused(cfg, "curvature", ("trials", "target", "base"))
    tol = cfg.effective_tolerances()
    target = cfg.target_space()
    _finish(cfg, [run_curvature(
        seed=cfg.seed, trials=cfg.trials or 500, threads=cfg.threads,
        sign_tol=tol["curvature_sign"], flat_tol=tol["curvature_flat"],
        targets=(target,) if target is not None else None,
        base_space=cfg.base_space())])


@main.command()
@common_options
def length(cfg: ExperimentConfig):
    """Energy bounds, geodesic saturation, reparametrization."""
    _reject_unused(cfg, "length", ("trials", "p", "grid"))
    tol = cfg.effective_tolerances()
    kwargs = {}
    if cfg.p is not None:
        kwargs["p_values"] = (_require_finite_p_above_one(cfg.p),)
    n_nodes = _single_grid(cfg)
    if n_nodes is not None:
        kwargs["n_nodes"] = n_nodes
    _finish(cfg, [run_length(
        seed=cfg.seed, trials=cfg.trials or 12, threads=cfg.threads,
        equality_tol=tol.get("length_equality"), **kwargs)])


@main.command()
@common_options
def speed(cfg: ExperimentConfig):
    """Log-map speed fields against the metric derivative."""
    _reject_unused(cfg, "speed", ("trials", "p", "grid"))
    tol = cfg.effective_tolerances()
    kwargs = {}
    if cfg.p is not None:
        kwargs["p"] = _require_finite_p_above_one(cfg.p)
    grids = _refining_grids(cfg)
    if grids is not None:
        kwargs["grids"] = grids
    _finish(cfg, [run_speed(
        seed=cfg.seed, curves=cfg.trials or 6, threads=cfg.threads,
        residual_tol=tol["speed_residual"], order_min=tol["order_min"],
        consistency_tol=tol["speed_consistency"], **kwargs)])


@main.command()
@common_options
def skorokhod(cfg: ExperimentConfig):
    """Computable bounds on the jump-time warping distance."""
    _reject_unused(cfg, "skorokhod", ("trials",))
    tol = cfg.effective_tolerances()
    _finish(cfg, [run_skorokhod(
        seed=cfg.seed, pairs=cfg.trials or 200, threads=cfg.threads,
        example_tol=tol["skorokhod_example"])])


@main.command(name="all")
@common_options
def all_suites(cfg: ExperimentConfig):
    """Run every suite in canonical order."""
    _reject_unused(cfg, "all", ())
    _finish(cfg, run_all(seed=cfg.seed, threads=cfg.threads,
                         tolerances=cfg.effective_tolerances()))


if __name__ == "__main__":
    main()
