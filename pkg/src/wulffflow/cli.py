"""Command-line front end.

``wulffflow {run,check,af,spectrum,oracle} --config PATH [--out DIR] [--seed N] [--quiet]``

Exit codes: 0 success, 1 configuration error or failed check, 2 flow stopped
before converging, 3 convexity lost.  Every invocation leaves ``summary.txt``
in the output directory.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from .config import RunConfig, build_anisotropy, build_body, build_grid, load_config
from .errors import AdmissibilityError, ConfigError, DomainError, WulffFlowError
from .io import write_final_state, write_flow_csv, write_obj, write_report, write_table

log = logging.getLogger("wulffflow")

EXIT_OK, EXIT_FAIL, EXIT_TIMEOUT, EXIT_CONVEXITY = 0, 1, 2, 3
RUN_EXIT = {"converged": EXIT_OK, "timeout": EXIT_TIMEOUT, "stiff": EXIT_TIMEOUT,
            "convexity_lost": EXIT_CONVEXITY}


class Outcome:
    def __init__(self, code: int, status: str, reason: str, **info):
        self.code, self.status, self.reason, self.info = code, status, reason, info


# run ---------------------------------------------------------------------------

def cmd_run(cfg: RunConfig, out: Path) -> Outcome:
    from .flow import make_solver
    from .spectral import fit_decay

    aniso = build_anisotropy(cfg)
    grid = build_grid(cfg)
    body = build_body(cfg, aniso)
    solver = make_solver(aniso, grid, cfg.flow.k, cfg.flow.parametrization)
    stride = cfg.output.snapshot_stride

    def snapshot(record, field):
        if stride and record.step % stride == 0:
            write_obj(out / "snapshots" / f"step_{record.step:08d}.obj", grid,
                      solver.surface_points(field))

    t0 = time.perf_counter()
    result = solver.run(solver.initial_field(body), cfg.flow, callback=snapshot)
    log.info("flow finished: %s (%d steps, %.1fs)", result.status, result.steps,
             time.perf_counter() - t0)
    write_flow_csv(out / "flow.csv", result.records, cfg.n)
    write_table(out / "decay.csv", ["t", "deviation"],
                [[r.t, r.deviation] for r in result.records])
    field = result.field
    try:
        support = solver.support_values(field)
    except WulffFlowError:
        support = np.full(grid.shape, np.nan)
    write_final_state(out / "final_state.csv", grid, field, support, solver.surface_points(field))
    if stride:
        write_obj(out / "snapshots" / "final.obj", grid, solver.surface_points(field))

    info = {"t": result.t, "steps": result.steps}
    if result.records:
        final = result.records[-1]
        info.update(r_bar=final.r_bar, deviation=final.deviation, sup_speed=final.sup_speed)
    times = [r.t for r in result.records]
    devs = [r.deviation for r in result.records]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fit = fit_decay(times, devs)
        info.update(fitted_rate=fit.rate, fit_r2=fit.r2)
    except DomainError as exc:
        info.update(fitted_rate="n/a", fit_note=str(exc))
    if result.status == "convexity_lost":
        node = result.bad_node
        j, kk = np.unravel_index(node, grid.shape)
        info.update(bad_node=node, bad_theta=float(grid.theta[j]),
                    bad_phi=float(grid.phi[kk]), bad_value=result.extra.get("value"))
    return Outcome(RUN_EXIT[result.status], result.status, result.message, **info)


# check -------------------------------------------------------------------------

def _order(coarse: float, fine: float) -> float:
    if fine <= 0 or coarse <= 0:
        return float("inf")
    return float(np.log2(coarse / fine))


def invariant_checks(cfg: RunConfig) -> list[dict]:
    """Run the invariant suite; each entry has name, tolerance, observed, passed."""
    from .chart import build_wulff_chart
    from .curvature import codazzi_norm, graph_geometry, newton_maclaurin_gap
    from .flow import make_solver
    from .grid import build_sphere_grid
    from .homogeneous import fibonacci_sphere
    from .spectral import build_operator

    checks: list[dict] = []

    def add(name, tol, observed, passed):
        checks.append({"check": name, "tolerance": tol, "observed": observed,
                       "passed": bool(passed)})

    try:
        aniso = build_anisotropy(cfg)
        floor = aniso.check_admissible()
        add("admission", "A_F > 0", floor, True)
    except AdmissibilityError as exc:
        add("admission", "A_F > 0", str(exc), False)
        return checks

    x = fibonacci_sphere(512, aniso.dim, seed=cfg.seed)
    add("q_normal", 1e-7, float(aniso.q_normal_residual(x).max()),
        aniso.q_normal_residual(x).max() < 1e-7)
    if aniso.family == "round":
        qmax = float(np.abs(aniso.tensor_q(x)).max())
        add("q_round_zero", 1e-10, qmax, qmax < 1e-10)

    body = build_body(cfg, aniso)
    g = cfg.grid
    fine = build_grid(cfg)
    coarse = build_sphere_grid(g.mode, max(16, g.n_theta // 2),
                               None if g.n_phi is None else max(32, g.n_phi // 2),
                               n=cfg.n, order=g.order)
    geoms = []
    for grid in (coarse, fine):
        gamma = np.log(body.radial(grid.x))
        geoms.append(graph_geometry(aniso, grid, gamma))
    if not geoms[1].convex:
        add("body_convex", "kappa > 0", geoms[1].kappa_floor, False)
        return checks
    from .functionals import report_radial

    reps = [report_radial(gm) for gm in geoms]
    for k in range(cfg.n):
        rel = [abs(r.relative_minkowski()[k]) for r in reps]
        order = _order(*rel)
        add(f"minkowski_{k}", 1e-3, rel[1], rel[1] < 1e-3)
        add(f"minkowski_{k}_order", 1.0, order, order >= 1.0 or rel[1] < 1e-10)
    gap = float(newton_maclaurin_gap(geoms[1].kappa).max())
    add("newton_maclaurin", 1e-10, gap, gap <= 1e-10)
    if aniso.family == "round":
        diff = float(np.abs(geoms[1].kappa - np.sort(geoms[1].isotropic_curvatures, -1)).max())
        add("round_reduction", 1e-10, diff, diff < 1e-10)

    cod = []
    for grid in (coarse, fine):
        chart = build_wulff_chart(aniso, grid)
        cod.append(codazzi_norm(chart, body.anisotropic_support(aniso, grid.x)))
    add("codazzi", "order >= 1", cod[1], _order(*cod) >= 1.0 or cod[1] < 1e-10)
    add("codazzi_order", 1.0, _order(*cod), _order(*cod) >= 1.0 or cod[1] < 1e-10)

    speeds = []
    for grid in (coarse, fine):
        solver = make_solver(aniso, grid, cfg.flow.k, cfg.flow.parametrization)
        speeds.append(solver.evaluate(solver.initial_field(_wulff_body(aniso)))[1])
    order = _order(*speeds)
    add("wulff_stationary", "order >= 1", speeds[1], order >= 1.0 or speeds[1] < 1e-10)

    small = build_sphere_grid(g.mode, 32, None, n=cfg.n, order=g.order)
    op = build_operator(build_wulff_chart(aniso, small))
    asym = op.weighted_asymmetry()
    kernel = float(np.abs(op.apply(np.ones(small.shape))).max())
    add("operator_symmetry", 1e-8, asym, asym < 1e-8)
    add("operator_kernel", 1e-8, kernel, kernel < 1e-8)
    return checks


def _wulff_body(aniso):
    from .bodies import wulff

    return wulff(aniso, 1.0)


def cmd_check(cfg: RunConfig, out: Path) -> Outcome:
    checks = invariant_checks(cfg)
    write_table(out / "checks.csv", ["check", "tolerance", "observed", "passed"], checks)
    lines = [(c["check"], f"{c['observed']} (tol {c['tolerance']}) "
              f"{'PASS' if c['passed'] else 'FAIL'}") for c in checks]
    write_report(out / "report.txt", lines)
    failed = [c["check"] for c in checks if not c["passed"]]
    for c in checks:
        log.info("%-22s %s", c["check"], "PASS" if c["passed"] else "FAIL")
    if failed:
        return Outcome(EXIT_FAIL, "failed", "failed checks: " + ", ".join(failed))
    return Outcome(EXIT_OK, "passed", f"all {len(checks)} checks passed")


# af ----------------------------------------------------------------------------

def af_battery(cfg: RunConfig, grid=None) -> list[dict]:
    from .bodies import random_body, wulff
    from .curvature import graph_geometry
    from .functionals import af_slack, report_radial

    aniso = build_anisotropy(cfg)
    grid = build_grid(cfg) if grid is None else grid
    wv = aniso.wulff_volume()
    n = cfg.n
    rng = np.random.default_rng(cfg.seed)
    bodies = [(f"random_{i}", random_body(rng, n, cfg.af.kind or None,
                                          axisymmetric=grid.axisymmetric))
              for i in range(cfg.af.count)]
    bodies += [(f"wulff_{r:g}", wulff(aniso, r)) for r in (0.7, 1.0, 1.6)]
    rows = []
    for label, body in bodies:
        geom = graph_geometry(aniso, grid, np.log(body.radial(grid.x)))
        rep = report_radial(geom)
        for k in range(0, n - 1):
            slack = af_slack(rep, k, wv)
            scale = float(rep.v[n - k])
            rows.append({"body": label, "name": body.name, "k": k, "slack": slack,
                         "scale": scale, "relative": slack / scale,
                         "convex": bool(geom.convex)})
    return rows


def cmd_af(cfg: RunConfig, out: Path) -> Outcome:
    rows = af_battery(cfg)
    write_table(out / "af.csv", ["body", "name", "k", "slack", "scale", "relative", "convex"], rows)
    tol = cfg.af.tolerance
    bad = [r for r in rows if r["slack"] < -tol * r["scale"]]
    eq = [r for r in rows if r["body"].startswith("wulff") and abs(r["relative"]) >= 1e-3]
    worst = min(r["relative"] for r in rows)
    info = {"bodies": len({r["body"] for r in rows}), "min_relative_slack": worst}
    if bad or eq:
        return Outcome(EXIT_FAIL, "failed",
                       f"{len(bad)} negative slacks, {len(eq)} equality-case misses", **info)
    return Outcome(EXIT_OK, "passed", "all slacks nonnegative within tolerance", **info)


# spectrum ----------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, out: Path) -> Outcome:
    from .chart import build_wulff_chart
    from .spectral import build_operator, predicted_rate

    aniso = build_anisotropy(cfg)
    grid = build_grid(cfg)
    op = build_operator(build_wulff_chart(aniso, grid))
    vals = op.spectrum(cfg.spectrum.count)
    lam = op.lambda1()
    rate = predicted_rate(lam, cfg.n, cfg.spectrum.r_bar)
    items = {"lambda1": lam, "r_bar": cfg.spectrum.r_bar, "predicted_rate": rate,
             "spectrum": " ".join(repr(float(v)) for v in vals),
             "weighted_asymmetry": op.weighted_asymmetry(),
             "kernel_residual": float(np.abs(op.apply(np.ones(grid.shape))).max()),
             "nodes": op.size, "mode": grid.mode}
    write_report(out / "report.txt", items)
    return Outcome(EXIT_OK, "done", f"lambda1 = {lam:.10g}", lambda1=lam, predicted_rate=rate)


# oracle ------------------------------------------------------------------------

def oracle_table(cfg: RunConfig) -> list[dict]:
    from .curvature import graph_geometry
    from .functionals import mc_mixed_volume, report_radial

    aniso = build_anisotropy(cfg)
    body = build_body(cfg, aniso)
    grid = build_grid(cfg)
    rep = report_radial(graph_geometry(aniso, grid, np.log(body.radial(grid.x))))
    o = cfg.oracle
    est = mc_mixed_volume(aniso, body, n_samples=o.samples, n_directions=o.directions,
                          eps_factor=o.eps_factor, seed=cfg.seed)
    rows = []
    for m in range(cfg.n + 2):
        surf = float(rep.v[m])
        mc, se = est[m]
        rel = abs(mc - surf) / abs(surf)
        rows.append({"m": m, "surface": surf, "monte_carlo": mc, "stderr": se,
                     "relative_error": rel,
                     "agree": bool(rel < o.rel_tol or abs(mc - surf) < o.sigmas * se)})
    return rows


def cmd_oracle(cfg: RunConfig, out: Path) -> Outcome:
    rows = oracle_table(cfg)
    write_table(out / "oracle.csv",
                ["m", "surface", "monte_carlo", "stderr", "relative_error", "agree"], rows)
    write_report(out / "report.txt",
                 [(f"V_{r['m']}", f"surface {r['surface']:.8g} | MC {r['monte_carlo']:.8g}"
                   f" +- {r['stderr']:.3g} | rel {r['relative_error']:.3g}") for r in rows])
    bad = [r["m"] for r in rows if not r["agree"]]
    if bad:
        return Outcome(EXIT_FAIL, "disagree", f"V_m disagree for m in {bad}")
    return Outcome(EXIT_OK, "agree", "all mixed volumes agree")


COMMANDS = {"run": cmd_run, "check": cmd_check, "af": cmd_af, "spectrum": cmd_spectrum,
            "oracle": cmd_oracle}


# entry point -------------------------------------------------------------------

def _threads():
    value = os.environ.get("WULFF_THREADS")
    if not value:
        return contextlib.nullcontext()
    try:
        limit = int(value)
    except ValueError:
        raise ConfigError(f"WULFF_THREADS must be an integer, got {value!r}") from None
    if limit < 1:
        raise ConfigError("WULFF_THREADS must be positive")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=limit)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wulffflow", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", type=Path, default=None, help="output directory (overrides output.dir)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (overrides seed)")
    p.add_argument("--quiet", action="store_true")
    return p


def _write_summary(out: Path, command: str, outcome: Outcome) -> None:
    items = {"command": command, "status": outcome.status, "exit_code": outcome.code,
             "reason": outcome.reason}
    items.update(outcome.info)
    write_report(out / "summary.txt", items)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    out = args.out or Path("out")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be nonnegative")
            cfg = cfg.with_seed(args.seed)
        if args.out is None:
            out = Path(cfg.output.dir)
        out.mkdir(parents=True, exist_ok=True)
        with _threads():
            outcome = COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        outcome = Outcome(EXIT_FAIL, "config_error", str(exc))
    except AdmissibilityError as exc:
        outcome = Outcome(EXIT_FAIL, "inadmissible", str(exc))
    except WulffFlowError as exc:
        outcome = Outcome(EXIT_FAIL, "error", f"{type(exc).__name__}: {exc}")
    except Exception as exc:  # still leave a summary behind
        log.exception("unexpected failure")
        outcome = Outcome(EXIT_FAIL, "internal_error", f"{type(exc).__name__}: {exc}")
    out.mkdir(parents=True, exist_ok=True)
    _write_summary(out, args.command, outcome)
    if not args.quiet:
        print(f"{args.command}: {outcome.status} ({outcome.reason})")
    return outcome.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
