"""Command-line orchestration.

Subcommands: exponent, solve, singular, harnack, barrier.  Each takes
--config <path> plus override flags and writes delimited outputs, JSON
reports and rendered figures into the output directory.  Exit code 0 means
every internal assertion passed; nonzero codes identify the failing module
(see MODULE_EXIT_CODES).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import barriers as bar
from . import config as cfgmod
from . import exponents as expo
from . import geometry as geo
from . import harnack as har
from . import plots
from . import singular as sng
from . import solver as slv

MODULE_EXIT_CODES = {
    "config": 2,
    "geometry": 3,
    "plaplace_solver": 4,
    "spherical_exponents": 5,
    "barriers": 6,
    "harnack_verifier": 7,
    "singular_solutions": 8,
    "io": 9,
}

_ERROR_MODULES = (
    (cfgmod.ConfigError, "config"),
    (geo.ConfigurationError, "config"),
    (geo.GeometryError, "geometry"),
    (slv.SolverError, "plaplace_solver"),
    (slv.InputError, "plaplace_solver"),
    (expo.ShootingError, "spherical_exponents"),
    (har.SamplingError, "harnack_verifier"),
    (sng.SchemeViolationError, "singular_solutions"),
)


class AssertionFailure(RuntimeError):
    def __init__(self, module, message):
        super().__init__(message)
        self.module = module


def _classify(exc):
    for klass, module in _ERROR_MODULES:
        if isinstance(exc, klass):
            return module
    return "io"


def _write_json(doc, path, cfg_hash):
    out = {"config_hash": cfg_hash}
    out.update(doc)
    with open(path, "w") as f:
        json.dump(out, f, indent=2, sort_keys=True)
        f.write("\n")


def _domain(cfg):
    if cfg.shape == "half-disk":
        return geo.DomainSpec.half_disk(cfg.radius)
    if cfg.shape == "sector":
        return geo.DomainSpec.sector(cfg.opening, cfg.radius)
    raise cfgmod.ConfigError(f"unsupported shape {cfg.shape!r} for this command")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_exponent(cfg, outdir, h):
    rows, profiles = [], []
    for p in cfg.p_values:
        for N in cfg.n_values:
            geometry = "planar-sector" if N == 2 else "axisymmetric-cap"
            limit = 2.0 * math.pi if N == 2 else math.pi
            for theta0 in cfg.theta0_values:
                if not (0.0 < theta0 < limit):
                    continue
                for kind in cfg.kinds:
                    for c in cfg.c_values:
                        rows.append((p, N, theta0, kind, c, geometry))
    records = []
    for (p, N, theta0, kind, c, geometry) in rows:
        prof = expo.exponent_for_opening(theta0, p, N, kind, c, geometry)
        records.append({"p": p, "N": N, "theta0": theta0, "kind": kind, "c": c,
                        "a": prof.a, "lambda": prof.lam})
        profiles.append(prof)
    table = outdir / "exponents.csv"
    with open(table, "w") as f:
        f.write(f"# config_hash={h}\n")
        f.write("p,N,theta0,kind,c,a,lambda\n")
        for r in records:
            f.write(f"{float(r['p'])!r},{r['N']},{float(r['theta0'])!r},{r['kind']},"
                    f"{float(r['c'])!r},{float(r['a'])!r},{float(r['lambda'])!r}\n")
    for k, prof in enumerate(profiles):
        prof.export_csv(outdir / f"profile_{k:03d}.csv",
                        header_comment=f"config_hash={h}")
    # c-monotonicity ladder: beta nondecreasing in c at fixed everything else
    anomalies = []
    groups = {}
    for r in records:
        groups.setdefault((r["p"], r["N"], r["theta0"], r["kind"]), []).append(r)
    for key, grp in sorted(groups.items()):
        grp = sorted(grp, key=lambda r: r["c"])
        for r0, r1 in zip(grp, grp[1:]):
            if r1["kind"] == "singular" and r1["a"] < r0["a"] - 1e-8:
                anomalies.append({"at": list(key), "c_low": r0["c"],
                                  "c_high": r1["c"], "a_low": r0["a"],
                                  "a_high": r1["a"]})
    _write_json({"rows": records, "c_monotonicity_anomalies": anomalies},
                outdir / "exponent_summary.json", h)
    plots.plot_profiles(profiles[: min(8, len(profiles))],
                        outdir / "profiles.png", title="angular profiles")
    return {"rows": len(records), "anomalies": len(anomalies)}


def cmd_solve(cfg, outdir, h):
    dom = _domain(cfg)
    prof = expo.exponent_for_opening(dom.opening, cfg.p, 2, "singular", cfg.c,
                                     "planar-sector")
    if cfg.shape == "half-disk":
        fld = sng.truncated_solve(dom, cfg.p, cfg.c, cfg.epsilon, profile=prof,
                                  n_r=cfg.n_r, n_theta=cfg.n_theta, tol=cfg.tol,
                                  grading=cfg.grading)
    else:
        grid = geo.build_polar_grid(dom, cfg.n_r, cfg.n_theta, cfg.epsilon, cfg.q)
        pot = slv.PotentialSpec.inverse_power(cfg.c) if cfg.c else \
            slv.PotentialSpec.zero()
        arc = prof.eta(grid.angles)
        fld = slv.solve_dirichlet(
            grid, cfg.p, pot,
            {"truncation-arc":
                lambda r, t: cfg.epsilon ** (-prof.a) * np.interp(t, grid.angles, arc),
             "dirichlet-zero": 0.0}, tol=cfg.tol)
    fld.to_csv(outdir / "field.csv", header_comment=f"config_hash={h}")
    fld.grid.export_csv(outdir / "grid.csv", header_comment=f"config_hash={h}")
    _write_json(fld.solver_log(), outdir / "solver_log.json", h)
    plots.plot_field(fld, outdir / "field.png",
                     title=f"p={cfg.p:g} c={cfg.c:g} eps={cfg.epsilon:g}")
    if fld.residual > cfg.tol:
        raise AssertionFailure("plaplace_solver",
                               f"final residual {fld.residual:.3e} above tol")
    return fld.solver_log()


def cmd_singular(cfg, outdir, h):
    dom = _domain(cfg)
    ladder = sng.run_truncation_ladder(dom, cfg.p, cfg.c, eps0=cfg.epsilon0,
                                       K=cfg.levels, n_r=cfg.n_r,
                                       n_theta=cfg.n_theta, tol=cfg.tol)
    limit, diag = sng.singular_limit(ladder)
    _write_json(sng.ladder_report_json(ladder, diag),
                outdir / "ladder_report.json", h)
    for k, f in enumerate(ladder.fields):
        f.to_csv(outdir / f"field_level{k}.csv", header_comment=f"config_hash={h}")
    verdict, ladder_r, ms = har.singularity_test(limit)
    blow = sng.blowup_rate(limit, ladder.profile)
    sng.blowup_csv(blow, outdir / "blowup.csv", header_comment=f"config_hash={h}")
    _write_json({"verdict": verdict, "m_radii": ladder_r, "m_values": ms,
                 "beta": ladder.profile.a, "diagnostics": diag,
                 "homothety": blow["homothety"]},
                outdir / "singular_summary.json", h)
    plots.plot_convergence(diag["convergence_diffs"], outdir / "convergence.png",
                           title="ladder convergence")
    plots.plot_decay_ladder(blow["radii_deviation"], outdir / "blowup.png",
                            ylabel="sup deviation", title="blow-up profile match")
    plots.plot_field(limit, outdir / "limit_field.png",
                     title=f"limit field p={cfg.p:g} c={cfg.c:g}")
    if not diag["converged"]:
        raise AssertionFailure("singular_solutions", "ladder did not converge")
    if verdict != "singular":
        raise AssertionFailure("singular_solutions",
                               f"singularity verdict {verdict!r}")
    devs = [d for _, d in blow["radii_deviation"]]
    if not all(d1 <= d0 * 1.05 for d0, d1 in zip(devs, devs[1:])):
        raise AssertionFailure("singular_solutions",
                               "blow-up deviations fail to decrease")
    return {"verdict": verdict, "beta": ladder.profile.a,
            "final_diff": diag["convergence_diffs"][-1]}


def cmd_harnack(cfg, outdir, h):
    dom = _domain(cfg)
    if len(cfg.field_files) >= 2:
        u1 = slv.ScalarField.from_csv(cfg.field_files[0], dom=dom)
        u2 = slv.ScalarField.from_csv(cfg.field_files[1], dom=dom)
        if u1.grid.n_r != u2.grid.n_r or u1.grid.n_theta != u2.grid.n_theta \
                or not np.allclose(u1.grid.radii, u2.grid.radii):
            raise slv.InputError("harnack requires fields on compatible grids")
    else:
        ladder1 = sng.run_truncation_ladder(dom, cfg.p, cfg.c, eps0=cfg.epsilon0,
                                            K=max(3, cfg.levels), n_r=cfg.n_r,
                                            n_theta=cfg.n_theta, tol=cfg.tol)
        u1, _ = sng.singular_limit(ladder1)
        ladder2 = sng.run_truncation_ladder(
            dom, cfg.p, cfg.c, eps0=cfg.epsilon0, K=max(3, cfg.levels),
            n_r=cfg.n_r, n_theta=cfg.n_theta, tol=cfg.tol,
            weight=lambda t: 1.0 + 0.75 * np.sin(t) ** 2)
        u2, _ = sng.singular_limit(ladder2, require_monotone=False)
    report = measure_harnack_suite(dom, u1, u2, r0=cfg.r0)
    report.validate()
    report.to_json(outdir / "harnack_report.json")
    report.ladder_csv(outdir / "harnack_ladder.csv",
                      header_comment=f"config_hash={h}")
    plots.plot_harnack_ladders(report, outdir / "harnack_ladders.png",
                               title="measured constants")
    bad = [rec for rec in report.records
           if not all(np.isfinite(v) and v > 0 for v in rec["constants"].values()
                      if not isinstance(v, list))]
    if bad:
        raise AssertionFailure("harnack_verifier",
                               f"non-finite constants in {bad[0]['estimate_id']}")
    return {"records": len(report.records)}


def measure_harnack_suite(dom, u1, u2, r0=0.25) -> har.HarnackReport:
    """All estimates of the verifier on a pair of singular solutions."""
    g = u1.grid
    R = g.outer_radius
    report = har.HarnackReport(grid_id=f"{g.n_r}x{g.n_theta}-eps{g.eps:g}")
    thQ = dom.opening / 4.0
    Q = (0.5 * R, 0.0)          # boundary point on the edge through the origin
    r_loc = R / 16.0
    P_int = geo.normal_point(dom, Q, 4.0 * r_loc, "inward")
    report.add("harn-int", {"c1": har.interior_harnack(u1, P_int, r_loc)},
               [r_loc], samples=1)
    c2 = har.chained_harnack(u1, Q, r_loc, 3)
    report.add("harn-h", {"c2": c2}, [r_loc], samples=1)
    delta, c3 = har.boundary_decay(u1, Q, r_loc)
    report.add("harn-hold", {"delta": delta, "c3": c3}, [r_loc])
    report.add("norm-est", {"c4": har.carleson_constant(u1, Q, r_loc)}, [r_loc])
    c6, n6, x6 = har.two_sided_slope(u1, Q, r_loc)
    report.add("norm-est2", {"c6": c6}, [r_loc], samples=n6, excluded=x6)
    # deep reference point: rho(A) >= R0 (built directly, not through the
    # normal tube whose radius is capped at R0)
    if dom.shape == "half-disk":
        A = (0.0, R / 2.0)
    else:
        A = (R / 2.0 * math.cos(thQ * 2.0), R / 2.0 * math.sin(thQ * 2.0))
    fit = har.apriori_alpha(u1, A)
    report.add("a-prior0", {"alpha": max(fit["alpha_upper"], 1e-12),
                            "c7": fit["c_upper"]}, fit["radii"])
    r_unif = (dom.R0 or R / 4.0) / 2.0
    c9, c9p, x9 = har.ratio_uniformity(u1, r_unif)
    report.add("unif1", {"c9": c9}, [r_unif], excluded=x9)
    report.add("unif1'", {"c9p": c9p}, [r_unif])
    c10, n10, x10 = har.boundary_harnack(u1, u2, Q, r_loc)
    report.add("bhi1", {"c10": c10}, [r_loc], samples=n10, excluded=x10)
    radii = []
    ladder = []
    for k in range(1, 6):
        r = R * 2.0 ** (-k)
        if r / 2.0 < 2.0 * g.eps:
            break
        c11, _, _ = har.annulus_ratio_bound(u1, u2, r)
        radii.append(r)
        ladder.append(c11)
    report.add("bhi2", {"c11": min(ladder), "ladder": ladder}, radii,
               samples=len(ladder))
    verdict, ladder_r, ms = har.singularity_test(u1)
    report.add("sing1", {"m_final": ms[-1] if ms else np.nan,
                         "ladder": ms}, ladder_r)
    k, dev = har.quotient_constancy(u1, u2, r0=r0)
    report.add("quotient-k", {"k": k, "deviation": max(dev, 1e-300)}, [r0])
    return report


def cmd_barrier(cfg, outdir, h):
    lower = bar.lower_barrier_params(cfg.p, cfg.dim, cfg.C0_tilde, r=cfg.barrier_r)
    low_rep = bar.certify_barriers(lower)
    pair = slv.eigen_annulus_radial(cfg.p, cfg.dim)
    upper = bar.upper_barrier_params(cfg.p, cfg.dim, cfg.C0_tilde,
                                     r=min(cfg.barrier_r, 0.5), eigenpair=pair)
    up_rep = bar.certify_barriers(upper)
    _write_json(low_rep.to_json(), outdir / "lower_certification.json", h)
    _write_json(up_rep.to_json(), outdir / "upper_certification.json", h)
    plots.plot_barrier(lower, lambda s: bar.lower_barrier_profile(lower, s),
                       low_rep, outdir / "lower_barrier.png",
                       title=f"lower barrier a={lower.a:.6f}")
    plots.plot_barrier(upper, lambda s: upper.scale * pair.phi_at(s / upper.rb),
                       up_rep, outdir / "upper_barrier.png",
                       title=f"upper barrier b={upper.b:g} lam1={pair.lam1:.4f}")
    if not low_rep.passed:
        raise AssertionFailure("barriers", "lower barrier certification failed")
    if not up_rep.passed:
        raise AssertionFailure("barriers", "upper barrier certification failed")
    return {"a": lower.a, "b": upper.b, "lambda1": pair.lam1,
            "lower_pass": low_rep.passed, "upper_pass": up_rep.passed}


COMMAND_FUNCS = {
    "exponent": cmd_exponent,
    "solve": cmd_solve,
    "singular": cmd_singular,
    "harnack": cmd_harnack,
    "barrier": cmd_barrier,
}


def build_parser():
    ap = argparse.ArgumentParser(
        prog="pharnack",
        description="Singular p-harmonic laboratory: exponents, barriers, "
                    "truncation ladders and Harnack-constant measurements.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in cfgmod.COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="INI config path")
        sp.add_argument("--p", type=float, default=None)
        sp.add_argument("--dim", type=int, default=None)
        sp.add_argument("--opening", default=None,
                        help="sector opening (accepts pi, pi/2, ...)")
        sp.add_argument("--c", type=float, default=None)
        sp.add_argument("--epsilon", type=float, default=None)
        sp.add_argument("--grid", default=None, metavar="NR,NTHETA")
        sp.add_argument("--out", default=None)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = cfgmod.load_config(args.config, args.command)
        else:
            cfg = cfgmod.RunConfig(command=args.command)
        cfg = cfgmod.apply_overrides(cfg, args)
        outdir = Path(cfg.out)
        outdir.mkdir(parents=True, exist_ok=True)
        h = cfgmod.config_hash(cfg)
        cfgmod.save_config(cfg, outdir / "resolved_config.ini")
        summary = COMMAND_FUNCS[cfg.command](cfg, outdir, h)
    except AssertionFailure as exc:
        body = {"error": str(exc), "module": exc.module, "command": args.command}
        print(json.dumps(body, sort_keys=True))
        return MODULE_EXIT_CODES[exc.module]
    except Exception as exc:   # noqa: BLE001 - single CLI boundary
        module = _classify(exc)
        body = {"error": str(exc), "module": module, "command": args.command}
        print(json.dumps(body, sort_keys=True))
        return MODULE_EXIT_CODES[module]
    print(json.dumps({"command": args.command, "config_hash": h,
                      "out": str(outdir), "summary": summary}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
