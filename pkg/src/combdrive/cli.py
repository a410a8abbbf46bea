"""Command-line surface.

Subcommands:

* ``solve``  - one configuration: solve both domains, print diagnostics JSON
* ``sweep``  - run a period sweep from a config, writing the report CSV
* ``limits`` - print the closed-form limit oracles for given parameters
* ``check``  - apply the acceptance rules to report CSVs, print verdict JSON
* ``plot``   - render convergence SVGs from a report CSV

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 acceptance-check failure.  Messages go to stderr, data to stdout or files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config as cfgmod
from .diagnostics import apriori_norms, force_boundary, force_volume
from .geometry import build_physical_domain, build_rescaled_domain, d_eps_limit
from .harness import (
    SweepConfigError,
    SweepReport,
    check_report,
    run_sweep,
)
from .homogenized import (
    corrector_norms,
    discrete_weak_averages,
    limit_energy,
    limit_force,
    weak_averages,
)
from .kernels import NonConvergenceError, SolverNaNError
from .mesh import MeshBudgetError, NodeClass, generate_mesh
from .params import (
    InvalidParamsError,
    OutsideProvenRegimeError,
    require_valid,
    validate,
)
from .solver import assemble, AnisotropicCoeffs, solve


def _limits_payload(params):
    payload = {
        "limit_force": limit_force(params),
        "limit_energy": limit_energy(params),
        "d_eps_limit": d_eps_limit(params),
    }
    wa = weak_averages(params)
    payload.update(
        limit_avg_phi_c2=wa.mean_phi_c2,
        limit_avg_dx2_c1=wa.mean_dx2_c1,
        limit_avg_dx2_c3=wa.mean_dx2_c3,
    )
    return payload


def _dump_field(field, path: Path):
    mesh = field.mesh
    xx, yy = mesh.node_coords()
    used = mesh.node_class.ravel() != int(NodeClass.UNUSED)
    with open(path, "w") as fh:
        fh.write("x1,x2,value\n")
        for x, y, v in zip(xx[used], yy[used], field.values[used]):
            fh.write(f"{x!r},{y!r},{v!r}\n")


def cmd_solve(args) -> int:
    cfg = cfgmod.load_config(args.config, args.set)
    params = cfgmod.build_params(cfg)
    require_valid(params)
    refine = cfgmod.build_refine(cfg)
    settings = cfgmod.build_solver_settings(cfg)
    out = Path(args.out)

    domain_r = build_rescaled_domain(params)
    domain_p = build_physical_domain(params)
    mesh_r = generate_mesh(domain_r, refine)
    mesh_p = generate_mesh(domain_p, refine)
    field_r = solve(assemble(mesh_r, AnisotropicCoeffs.rescaled(params)), settings)
    field_p = solve(assemble(mesh_p, AnisotropicCoeffs.physical()), settings)

    spec = cfgmod.build_cutoff(cfg, params)
    eps0 = cfg["force"]["epsilon0"]
    volt = cfg["force"]["voltage"]
    fv = force_volume(field_r, spec, params, eps0, volt)
    fb = force_boundary(field_p, params, eps0, volt)
    norms = apriori_norms(field_r, params)
    corr = corrector_norms(field_r, params) if params.alpha >= 2 else None
    avgs = discrete_weak_averages(field_r, params)

    payload = {
        "epsilon": params.epsilon,
        "alpha": params.alpha,
        "n": params.n,
        "dofs": int((mesh_r.node_class == int(NodeClass.FREE)).sum()),
        "iters_rescaled": field_r.iterations,
        "iters_physical": field_p.iterations,
        "residual_rescaled": field_r.residual,
        "residual_physical": field_p.residual,
        "force_volume": fv.scaled_integral,
        "force_boundary": fb.scaled_integral,
        "physical_force": fv.physical_force,
        "avg_phi_c2": avgs.mean_phi_c2,
        "avg_dx2_c1": avgs.mean_dx2_c1,
        "avg_dx2_c3": avgs.mean_dx2_c3,
        **norms.as_dict(),
    }
    if corr is not None:
        payload.update(corr_c1=corr.c1, corr_c2=corr.c2, corr_c3=corr.c3)
    if params.alpha >= 2:
        payload.update(_limits_payload(params))
    else:
        print("note: alpha < 2 is outside the proven regime; "
              "limit oracles omitted", file=sys.stderr)

    if args.dump_field:
        out.mkdir(parents=True, exist_ok=True)
        _dump_field(field_r, out / "field_rescaled.csv")
        _dump_field(field_p, out / "field_physical.csv")
    if args.dump_mesh:
        out.mkdir(parents=True, exist_ok=True)
        (out / "mesh_rescaled.json").write_text(mesh_r.to_json())
        (out / "mesh_physical.json").write_text(mesh_p.to_json())
        (out / "domain_rescaled.json").write_text(domain_r.to_json())
        (out / "domain_physical.json").write_text(domain_p.to_json())
    print(json.dumps(payload, indent=2))
    return 0


def cmd_sweep(args) -> int:
    cfg = cfgmod.load_config(args.config, args.set)
    params = cfgmod.build_params(cfg)
    require_valid(params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sweep_cfg = cfgmod.build_sweep_config(cfg, str(out / cfg["sweep"]["csv"]))
    report = run_sweep(sweep_cfg)
    failed = [r for r in report.rows if r["error"]]
    print(f"wrote {sweep_cfg.csv_path} ({len(report.rows)} rows)", file=sys.stderr)
    if failed:
        for r in failed:
            print(f"case n={r['n']} refine={r['refine']} failed: {r['error']}",
                  file=sys.stderr)
        return 2
    return 0


def cmd_limits(args) -> int:
    cfg = cfgmod.load_config(args.config, args.set)
    params = cfgmod.build_params(cfg)
    require_valid(params)
    print(json.dumps(_limits_payload(params), indent=2))
    return 0


def cmd_check(args) -> int:
    criteria = None
    if args.criteria:
        with open(args.criteria) as fh:
            criteria = json.load(fh)
    verdicts = []
    for path in args.report:
        report = SweepReport.from_csv(path)
        verdicts.extend(check_report(report, criteria))
    print(json.dumps(verdicts, indent=2))
    n_fail = sum(not v["pass"] for v in verdicts)
    if n_fail:
        print(f"{n_fail}/{len(verdicts)} criteria failed", file=sys.stderr)
        return 3
    print(f"all {len(verdicts)} criteria passed", file=sys.stderr)
    return 0


def cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "combdrive"
    import matplotlib.pyplot as plt

    report = SweepReport.from_csv(args.report)
    rows = [r for r in report.rows if not r["error"]]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    groups = {}
    for r in rows:
        groups.setdefault((r["alpha"], r["refine"], r["cutoff"]), []).append(r)

    fig, ax = plt.subplots(figsize=(6, 4))
    for (alpha, refine, cutoff), grp in sorted(groups.items()):
        grp = sorted(grp, key=lambda r: r["epsilon"])
        eps = [r["epsilon"] for r in grp]
        ax.plot(eps, [r["force_volume"] for r in grp], "o-",
                label=f"volume a={alpha:g} {cutoff}")
        ax.plot(eps, [r["force_boundary"] for r in grp], "s--",
                label=f"boundary a={alpha:g} {cutoff}")
        if grp and not _isnan(grp[0]["limit_force"]):
            ax.axhline(grp[0]["limit_force"], color="k", lw=0.8, ls=":")
    ax.set_xscale("log")
    ax.set_xlabel("period")
    ax.set_ylabel("scaled force integral")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out / "force_convergence.svg", metadata={"Date": None})
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    for (alpha, refine, cutoff), grp in sorted(groups.items()):
        grp = sorted(grp, key=lambda r: r["epsilon"])
        eps = [r["epsilon"] for r in grp]
        for col in ("corr_c1", "corr_c2", "corr_c3"):
            ax.loglog(eps, [r[col] for r in grp], "o-",
                      label=f"{col} a={alpha:g} {cutoff}")
    ax.set_xlabel("period")
    ax.set_ylabel("corrector mismatch")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out / "correctors.svg", metadata={"Date": None})
    plt.close(fig)
    print(f"wrote {out}/force_convergence.svg and {out}/correctors.svg",
          file=sys.stderr)
    return 0


def _isnan(x):
    return isinstance(x, float) and x != x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="combdrive",
        description="Comb-drive electrostatics: solves, force functionals, "
                    "and small-period convergence studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON configuration file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VAL",
                       help="override a config key (repeatable)")

    p = sub.add_parser("solve", help="solve one case and print diagnostics")
    common(p)
    p.add_argument("--dump-field", action="store_true",
                   help="write nodal fields as CSV")
    p.add_argument("--dump-mesh", action="store_true",
                   help="write mesh and domain dumps as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run a period sweep, write report CSV")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("limits", help="print closed-form limit oracles")
    common(p)
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("check", help="apply acceptance rules to report CSVs")
    p.add_argument("report", nargs="+", help="report CSV files")
    p.add_argument("--criteria", default=None,
                   help="JSON file overriding criterion thresholds")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("plot", help="render convergence SVGs from a report CSV")
    p.add_argument("report", help="report CSV file")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidParamsError, cfgmod.ConfigError, SweepConfigError,
            OutsideProvenRegimeError, MeshBudgetError, FileNotFoundError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NonConvergenceError, SolverNaNError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
