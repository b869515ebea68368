"""Command-line entry point: solve / mc / sweep / validate workflows.

Every output table starts with a header line carrying the tool version and a
hash of the fully resolved configuration, then a column-name line; floats
are written with 17 significant digits so files round-trip losslessly and
reruns with the same config and seed are byte-identical.

Exit codes: 0 success, 2 config or admissibility error, 3 convergence
failure, 4 validation failure.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .diagnostics import run_full_diagnostics
from .fixed_point import (ConditionError, ConvergenceError, check_condition,
                          find_ness)
from .grid import SpatialGrid, TemperatureProfile
from .kernels import WallTemperatures
from .stochastic import minorization_check, simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_VALIDATION = 4


def _fmt(value):
    return f"{value:.17g}"


def _write_table(path, kind, cfg_hash, columns, rows, delimiter):
    lines = [f"# bgkslab {__version__} config={cfg_hash} kind={kind}",
             delimiter.join(columns)]
    for row in rows:
        lines.append(delimiter.join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_text(path, kind, cfg_hash, body):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# bgkslab {__version__} config={cfg_hash} kind={kind}\n")
        fh.write(body)


def _read_profile_table(path):
    """Load (x, tau) columns from a `solve` profile table."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    lines = [ln for ln in lines if not ln.startswith("#")]
    if len(lines) < 2:
        raise ConfigError(f"profile file {path!r} has no data rows")
    for delim in ("\t", ",", ";", " "):
        cols = lines[0].split(delim)
        if "x" in cols and "tau" in cols:
            break
    else:
        raise ConfigError(f"profile file {path!r} lacks x/tau columns")
    ix, it = cols.index("x"), cols.index("tau")
    data = np.array([[float(f) for f in ln.split(delim)] for ln in lines[1:]])
    return data[:, ix], data[:, it]


def _profile_from_samples(x, values):
    """Rebuild a gridded profile from sampled (x, T) pairs."""
    x = np.asarray(x, float)
    edges = np.concatenate([[0.0], 0.5 * (x[:-1] + x[1:]), [1.0]])
    grid = SpatialGrid(nodes=x, weights=np.diff(edges), edges=edges)
    return TemperatureProfile(grid=grid, values=np.asarray(values, float))


def _walls(cfg):
    return WallTemperatures(t1=cfg.walls.t1, t2=cfg.walls.t2,
                            kappa=cfg.walls.kappa)


def _run_fixed_point(cfg, walls):
    return find_ness(walls, nodes=cfg.grid.nodes, grading=cfg.grid.grading,
                     damping=cfg.fixed_point.damping, tol=cfg.fixed_point.tol,
                     max_iters=cfg.fixed_point.max_iters,
                     gamma1=cfg.fixed_point.gamma1,
                     gamma2=cfg.fixed_point.gamma2, force=cfg.force)


def _fixed_point_summary(report):
    lines = [
        f"converged {report.converged}",
        f"iterations {report.iterations}",
        f"damping {_fmt(report.damping)}",
        f"clamp_events {report.clamp_events}",
        f"suspect_tail {report.suspect}",
        f"condition_margin_1 {_fmt(report.condition.margin_c1)}",
        f"condition_margin_2 {_fmt(report.condition.margin_c2)}",
        f"eigenvalue {_fmt(report.final.info.eigenvalue)}",
        f"spectral_gap {_fmt(report.final.info.spectral_gap)}",
        f"pressure {_fmt(report.final.pressure)}",
        "deltas " + " ".join(_fmt(d) for d in report.sup_norm_deltas),
    ]
    return "\n".join(lines) + "\n"


def cmd_solve(cfg):
    walls = _walls(cfg)
    cfg_hash = cfg.config_hash()
    out = cfg.output.dir
    os.makedirs(out, exist_ok=True)
    try:
        report = _run_fixed_point(cfg, walls)
    except ConditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    sol = report.final
    delim = cfg.output.delimiter
    rows = zip(sol.grid.nodes, sol.rho, sol.u, sol.tau,
               sol.pressure_profile, sol.flux)
    _write_table(os.path.join(out, "profile.tsv"), "profile", cfg_hash,
                 ["x", "rho", "u", "tau", "pressure", "flux"], rows, delim)
    _write_text(os.path.join(out, "fixed_point.txt"), "fixed-point",
                cfg_hash, _fixed_point_summary(report))
    diag = run_full_diagnostics(
        sol, tolerances=vars(cfg.diagnostics),
        gamma1=cfg.fixed_point.gamma1, gamma2=cfg.fixed_point.gamma2,
        fixed_point_report=report)
    _write_text(os.path.join(out, "diagnostics.txt"), "diagnostics",
                cfg_hash, diag.to_text())
    print(f"solve: {report.iterations} iterations, "
          f"P={sol.pressure:.6g}, diagnostics "
          f"{'pass' if diag.passed else 'FAIL'} -> {out}/")
    return EXIT_OK if diag.passed else EXIT_VALIDATION


def _frozen_profile(cfg, walls):
    """Profile for the mc run: file if given, else self-consistent."""
    if cfg.monte_carlo.profile:
        x, tau = _read_profile_table(cfg.monte_carlo.profile)
        return _profile_from_samples(x, tau), None
    if cfg.walls.t1 == cfg.walls.t2:
        grid = SpatialGrid.graded(cfg.grid.nodes, cfg.grid.grading)
        return TemperatureProfile.constant(grid, cfg.walls.t1), None
    report = _run_fixed_point(cfg, walls)
    sol = report.final
    return TemperatureProfile(grid=sol.grid, values=sol.tau), report


def cmd_mc(cfg):
    walls = _walls(cfg)
    cfg_hash = cfg.config_hash()
    out = cfg.output.dir
    os.makedirs(out, exist_ok=True)
    try:
        profile, _ = _frozen_profile(cfg, walls)
    except ConditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    mc = cfg.monte_carlo
    moments = simulate(walls, profile, t_end=mc.t_end,
                       n_particles=mc.particles, seed=mc.seed, bins=mc.bins,
                       burn_in_fraction=mc.burn_in_fraction,
                       n_batches=mc.batches, workers=cfg.workers)
    delim = cfg.output.delimiter
    rows = zip(moments.edges[:-1], moments.edges[1:],
               moments.rho_hat, moments.rho_se, moments.u_hat, moments.u_se,
               moments.tau_hat, moments.tau_se,
               moments.flux3_hat, moments.flux3_se)
    _write_table(os.path.join(out, "moments.tsv"), "mc-moments", cfg_hash,
                 ["bin_lo", "bin_hi", "rho", "rho_se", "u", "u_se",
                  "tau", "tau_se", "flux3", "flux3_se"], rows, delim)
    tau_det = profile(moments.centers)
    z_tau = (moments.tau_hat - tau_det) / moments.tau_se
    z_u = moments.u_hat / moments.u_se
    rows = zip(moments.centers, tau_det, moments.tau_hat, moments.tau_se,
               z_tau, moments.u_hat, moments.u_se, z_u)
    _write_table(os.path.join(out, "comparison.tsv"), "mc-comparison",
                 cfg_hash,
                 ["x", "tau_frozen", "tau_hat", "tau_se", "z_tau",
                  "u_hat", "u_se", "z_u"], rows, delim)
    body = "\n".join([
        f"particles {mc.particles}",
        f"t_end {_fmt(mc.t_end)}",
        f"events {moments.events}",
        f"event_rate {_fmt(moments.event_rate)}",
        f"wall_hit_rate {_fmt(moments.wall_hit_rate[0])} "
        f"{_fmt(moments.wall_hit_rate[1])}",
        f"max_abs_z_tau {_fmt(float(np.max(np.abs(z_tau))))}",
        f"frac_z_tau_within_3 "
        f"{_fmt(float(np.mean(np.abs(z_tau) <= 3.0)))}",
        f"max_abs_z_u {_fmt(float(np.max(np.abs(z_u))))}",
    ]) + "\n"
    _write_text(os.path.join(out, "mc_summary.txt"), "mc-summary",
                cfg_hash, body)
    print(f"mc: {mc.particles} particles to t={mc.t_end:g}, "
          f"{moments.events} events -> {out}/")
    return EXIT_OK


def cmd_sweep(cfg):
    if not cfg.sweep:
        print("error: sweep requires a non-empty `sweep:` list in the config",
              file=sys.stderr)
        return EXIT_CONFIG
    cfg_hash = cfg.config_hash()
    out = cfg.output.dir
    os.makedirs(out, exist_ok=True)
    rows = []
    failures = []
    for point in cfg.sweep:
        walls = WallTemperatures(t1=point["t1"], t2=point["t2"],
                                 kappa=point.get("kappa", 1.0))
        try:
            report = find_ness(
                walls, nodes=cfg.grid.nodes, grading=cfg.grid.grading,
                damping=cfg.fixed_point.damping, tol=cfg.fixed_point.tol,
                max_iters=cfg.fixed_point.max_iters,
                gamma1=cfg.fixed_point.gamma1, gamma2=cfg.fixed_point.gamma2,
                force=cfg.force)
        except (ConditionError, ConvergenceError) as exc:
            failures.append((point, str(exc)))
            continue
        sol = report.final
        scale = walls.geometric_mean
        rows.append([walls.t1, walls.t2, walls.kappa,
                     sol.tau_at(0.5) / scale - 1.0,
                     float(sol.rho.min()), float(sol.rho.max()),
                     sol.pressure / scale,
                     float(report.iterations), float(report.clamp_events)])
    if not rows:
        for point, msg in failures:
            print(f"error: sweep point {point} failed: {msg}", file=sys.stderr)
        return EXIT_CONVERGENCE
    _write_table(os.path.join(out, "sweep.tsv"), "sweep", cfg_hash,
                 ["t1", "t2", "kappa", "tau_mid_dev", "rho_min", "rho_max",
                  "p_ratio", "iterations", "clamp_events"],
                 rows, cfg.output.delimiter)
    lines = []
    t1s = np.array([r[0] for r in rows])
    devs = np.abs(np.array([r[3] for r in rows]))
    rho_devs = np.array([max(r[5] - 1.0, 1.0 - r[4]) for r in rows])
    if len(rows) >= 2 and np.all(devs > 0) and len(np.unique(t1s)) == len(t1s):
        slope = float(np.polyfit(np.log10(t1s), np.log10(devs), 1)[0])
        rho_slope = float(np.polyfit(np.log10(t1s), np.log10(rho_devs), 1)[0])
        lines.append(f"tau_mid_dev_loglog_slope {_fmt(slope)}")
        lines.append(f"rho_dev_loglog_slope {_fmt(rho_slope)}")
        lines.append(f"strictly_decreasing "
                     f"{bool(np.all(np.diff(devs) < 0))}")
    for point, msg in failures:
        lines.append(f"failed {point}: {msg}")
    _write_text(os.path.join(out, "ratefit.txt"), "sweep-ratefit", cfg_hash,
                "\n".join(lines) + "\n")
    print(f"sweep: {len(rows)} points ok, {len(failures)} failed -> {out}/")
    return EXIT_OK


def cmd_validate(cfg):
    walls = _walls(cfg)
    cfg_hash = cfg.config_hash()
    out = cfg.output.dir
    os.makedirs(out, exist_ok=True)
    try:
        report = _run_fixed_point(cfg, walls)
    except ConditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    diag = run_full_diagnostics(
        report.final, tolerances=vars(cfg.diagnostics),
        gamma1=cfg.fixed_point.gamma1, gamma2=cfg.fixed_point.gamma2,
        fixed_point_report=report)
    body = diag.to_text()
    # Cheap minorization sanity at a conventional epsilon, reported but only
    # gating when the admissibility condition holds.
    cond = check_condition(walls, cfg.fixed_point.gamma1,
                           cfg.fixed_point.gamma2)
    if cond.holds:
        mreport = minorization_check(
            walls, TemperatureProfile(grid=report.final.grid,
                                      values=report.final.tau),
            epsilon=0.1, n_traj=20000, seed=cfg.monte_carlo.seed)
        body += (f"minorization beta={_fmt(mreport.beta)} "
                 f"coverage={_fmt(mreport.worst_coverage)} "
                 f"cells={mreport.n_cells}\n")
        minorization_ok = mreport.worst_coverage >= 0.99
    else:
        minorization_ok = True
    _write_text(os.path.join(out, "validate.txt"), "validate", cfg_hash, body)
    ok = diag.passed and minorization_ok
    print(f"validate: {'pass' if ok else 'FAIL'} -> {out}/validate.txt")
    return EXIT_OK if ok else EXIT_VALIDATION


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="bgkslab",
        description="Steady states of a relaxation-model gas between two "
                    "thermal walls: solve, simulate, sweep, validate.")
    parser.add_argument("--version", action="version",
                        version=f"bgkslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("solve", "fixed-point solve plus diagnostics"),
                            ("mc", "jump-process simulation"),
                            ("sweep", "parameter sweep with rate fit"),
                            ("validate", "bracket and diagnostics gate")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to YAML config")
        p.add_argument("--force", action="store_true",
                       help="run despite admissibility-condition failure")
        p.add_argument("--seed", type=int, default=None,
                       help="override monte_carlo.seed")
        p.add_argument("--out", default=None, help="override output.dir")
        p.add_argument("--workers", type=int, default=None,
                       help="override worker thread count")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.force:
            cfg.force = True
        if args.seed is not None:
            cfg.monte_carlo.seed = args.seed
        if args.out is not None:
            cfg.output.dir = args.out
        if args.workers is not None:
            cfg.workers = args.workers
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    command = {"solve": cmd_solve, "mc": cmd_mc,
               "sweep": cmd_sweep, "validate": cmd_validate}[args.command]
    return command(cfg)


if __name__ == "__main__":
    sys.exit(main())
