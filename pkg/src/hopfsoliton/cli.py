"""Command-line front end: ``hopfsoliton {soliton,flow,verify,phi}``.

Settings come from an optional ``key = value`` file (``--config``) overridden
by flags.  Every command writes CSV files into ``--out`` and exits with 0 when
its checks pass, 1 on a check failure and 2 on a usage error.
"""

from __future__ import annotations

import configparser
import csv
import functools
import math
import os
from dataclasses import dataclass, fields
from typing import Optional

import click
import numpy as np

from .curvature import soliton_residual
from .errors import HopfError, InitialDataError, ParameterError
from .flow import (
    FlowControls,
    envelope_monotone,
    preset_initial,
    profile_from_theta,
    read_initial_csv,
    run_flow,
    write_snapshot_csv,
    write_trajectory_csv,
)
from .geometry import SurfaceParams, surface_params
from .gkforms import ddbar_log_phi, phi_identity_residual, phi_solve
from .soliton import check_asymptotics, solve_profile
from .verify import run_all, sample_points


@dataclass
class RunConfig:
    alpha_mod: float = math.exp(-2.0)
    alpha_arg: float = 0.0
    beta_mod: float = math.exp(-1.0)
    beta_arg: float = 0.0
    L: float = 40.0
    N: int = 2001
    T: float = 10.0
    dt0: float = 1e-2
    tol: Optional[float] = None
    seed: int = 0
    out: str = "."

    def validate(self) -> None:
        for name in ("alpha_mod", "beta_mod"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ParameterError(f"{name} must lie in (0, 1)")
        if self.N < 3 or self.N % 2 == 0:
            raise ParameterError("N must be odd and >= 3")
        if self.L <= 0 or self.T <= 0 or self.dt0 <= 0:
            raise ParameterError("L, T and dt0 must be positive")
        if self.tol is not None and self.tol <= 0:
            raise ParameterError("tol must be positive")

    @property
    def params(self) -> SurfaceParams:
        alpha = self.alpha_mod * complex(math.cos(self.alpha_arg), math.sin(self.alpha_arg))
        beta = self.beta_mod * complex(math.cos(self.beta_arg), math.sin(self.beta_arg))
        return surface_params(alpha, beta)


def read_config(path) -> dict:
    """Parse a sectionless ``key = value`` file into a dict of strings."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    with open(path) as fh:
        parser.read_string("[run]\n" + fh.read())
    return dict(parser["run"])


def build_config(config_path, overrides: dict) -> RunConfig:
    types = {f.name: f.type for f in fields(RunConfig)}
    values = {}
    if config_path:
        for key, raw in read_config(config_path).items():
            key = key.replace("-", "_")
            if key not in types:
                raise click.UsageError(f"unknown config key {key!r}")
            values[key] = raw
    values.update({k: v for k, v in overrides.items() if v is not None and k in types})
    cfg = RunConfig()
    for key, raw in values.items():
        kind = {"int": int, "str": str}.get(str(types[key]), float)
        try:
            setattr(cfg, key, kind(raw))
        except ValueError as exc:
            raise click.UsageError(f"bad value for {key}: {raw!r}") from exc
    try:
        cfg.validate()
    except ParameterError as exc:
        raise click.UsageError(str(exc)) from exc
    os.makedirs(cfg.out, exist_ok=True)
    return cfg


def common_options(func):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="key = value settings file"),
        click.option("--alpha-mod", type=float),
        click.option("--alpha-arg", type=float),
        click.option("--beta-mod", type=float),
        click.option("--beta-arg", type=float),
        click.option("--L", "L", type=float, help="half-width of the x window"),
        click.option("--N", "N", type=int, help="number of grid nodes (odd)"),
        click.option("--T", "T", type=float, help="final flow time"),
        click.option("--dt0", type=float),
        click.option("--tol", type=float),
        click.option("--seed", type=int),
        click.option("--out", type=click.Path(file_okay=False), help="output directory"),
    ]
    for opt in reversed(opts):
        func = opt(func)

    @functools.wraps(func)
    def wrapper(config_path, **kwargs):
        names = {f.name for f in fields(RunConfig)}
        cfg = build_config(config_path, {k: kwargs.pop(k) for k in list(kwargs) if k in names})
        try:
            return func(cfg, **kwargs)
        except HopfError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(1)

    return wrapper


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


@click.group()
def main():
    """Pluriclosed solitons and flow on diagonal Hopf surfaces."""


@main.command()
@common_options
def soliton(cfg: RunConfig):
    """Tabulate the soliton profile and check its residual and asymptotics."""
    params = cfg.params
    tol = cfg.tol if cfg.tol is not None else 1e-8
    grid = np.linspace(-cfg.L, cfg.L, cfg.N)
    sol = solve_profile(params, grid)
    k, dk, ddk = sol.jet(grid)
    _write_rows(
        os.path.join(cfg.out, "soliton.csv"),
        ("x", "kappa", "kappa_prime", "kappa_second"),
        ([_fmt(v) for v in row] for row in zip(grid, k, dk, ddk)),
    )
    report = check_asymptotics(sol.metric_profile(), params, cfg.L)
    _write_rows(
        os.path.join(cfg.out, "asymptotics.csv"),
        ("item", "x", "value", "pass"),
        ([item, _fmt(cfg.L if item.startswith("1") else -cfg.L), _fmt(v), int(ok)] for item, v, ok in report.rows()),
    )
    residual = soliton_residual(sol, params.mu, grid)
    summary = [
        ("a", params.a),
        ("b", params.b),
        ("mu", params.mu),
        ("c_k", params.c_k),
        ("gauge", sol.gauge),
        ("soliton_residual", residual),
        ("asymptotics_ok", float(report.ok)),
    ]
    _write_rows(os.path.join(cfg.out, "summary.csv"), ("quantity", "value"), ((q, _fmt(v)) for q, v in summary))
    ok = residual < tol
    click.echo(f"soliton residual {residual:.3e} ({'pass' if ok else 'FAIL'}, tol {tol:g})")
    raise SystemExit(0 if ok else 1)


@main.command()
@common_options
@click.option("--initial", default="bump", show_default=True, help="preset (soliton, bump) or CSV with x and theta/k")
@click.option(
    "--target", type=float, default=1e-3, show_default=True, help="stop once the aligned error is below this; 0 runs to T"
)
@click.option("--amplitude", type=float, default=1.0, show_default=True, help="bump amplitude in theta")
@click.option("--width", type=float, default=2.0, show_default=True, help="bump width")
@click.option("--record-every", type=float, default=0.1, show_default=True)
@click.option("--scheme", type=click.Choice(["bdf2", "be"]), default="bdf2", show_default=True)
def flow(cfg: RunConfig, initial, target, amplitude, width, record_every, scheme):
    """Run the reduced flow and monitor convergence to the soliton."""
    params = cfg.params
    if target <= 0:
        target = None
    sol = solve_profile(params)
    if initial in ("soliton", "bump"):
        init = preset_initial(initial, sol, amplitude=amplitude, width=width)
    elif os.path.isfile(initial):
        init = profile_from_theta(read_initial_csv(initial))
    else:
        raise click.UsageError(f"unknown initial data {initial!r}")
    controls = FlowControls(L=cfg.L, N=cfg.N, dt0=cfg.dt0, record_every=record_every, target_error=target, scheme=scheme)
    if cfg.tol is not None:
        controls.asymptotics_tol = cfg.tol
    try:
        result = run_flow(init, params, cfg.T, controls, sol)
    except InitialDataError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(1)
    write_trajectory_csv(os.path.join(cfg.out, "trajectory.csv"), result.trajectory)
    write_snapshot_csv(os.path.join(cfg.out, "snapshot.csv"), result.final)
    last = result.trajectory[-1]
    monotone = envelope_monotone(result.trajectory)
    ok = monotone and (target is None or last.aligned_sup_error < target)
    click.echo(
        f"t={last.t:.6g} aligned error {last.aligned_sup_error:.3e} shift {last.shift:.6g} "
        f"envelope monotone {monotone} ({'pass' if ok else 'FAIL'})"
    )
    raise SystemExit(0 if ok else 1)


@main.command()
@common_options
@click.option("--perturb", type=float, default=0.0, show_default=True, help="break involutivity of phi2 (negative control)")
def verify(cfg: RunConfig, perturb):
    """Curvature oracle, even-type, odd-type and Phi suites."""
    tol = cfg.tol if cfg.tol is not None else 1e-9
    rows = run_all(cfg.params, seed=cfg.seed, perturb=perturb, tol=tol)
    _write_rows(
        os.path.join(cfg.out, "report.csv"),
        ("check", "point", "residual", "pass"),
        ([r.check, r.point, _fmt(r.residual), int(r.passed)] for r in rows),
    )
    failed = sorted({r.check for r in rows if not r.passed})
    click.echo(f"{len(rows) - sum(not r.passed for r in rows)}/{len(rows)} checks pass")
    for name in failed:
        click.echo(f"FAIL {name}")
    raise SystemExit(0 if not failed else 1)


@main.command()
@common_options
@click.option("--samples", type=int, default=50, show_default=True)
def phi(cfg: RunConfig, samples):
    """Evaluate the automorphic function Phi and i ddbar log Phi at sampled points."""
    params = cfg.params
    tol = cfg.tol if cfg.tol is not None else 1e-12
    rng = np.random.default_rng(cfg.seed)
    rows = []
    ok = True
    for z1, z2 in sample_points(rng, samples, rmin=0.5):
        value = phi_solve(z1, z2, params)
        res = phi_identity_residual(z1, z2, params, value)
        eig = np.linalg.eigvalsh(ddbar_log_phi(z1, z2, params))
        ok = ok and res < tol and eig[0] >= -1e-6 and eig[-1] > 0
        rows.append([_fmt(v) for v in (z1.real, z1.imag, z2.real, z2.imag, value, res, eig[0], eig[-1])])
    _write_rows(
        os.path.join(cfg.out, "phi.csv"),
        ("z1_re", "z1_im", "z2_re", "z2_im", "phi", "residual", "min_eig", "max_eig"),
        rows,
    )
    click.echo(f"{samples} points ({'pass' if ok else 'FAIL'})")
    raise SystemExit(0 if ok else 1)


if __name__ == "__main__":  # pragma: no cover
    main()
