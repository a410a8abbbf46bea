"""Sweep orchestration, CSV reports, and acceptance checking.

One sweep case = one (n, refine-factor) pair: both domains are solved once,
all diagnostics and closed-form limits are evaluated, and one CSV row is
emitted per configured cutoff variant (only the volume force depends on the
cutoff; the solves are shared).  Rows are written in sorted
(n, refine, cutoff) order, so a repeated run reproduces the file bitwise
except for the wall-time column.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cutoff import CutoffSpec, Variant
from .diagnostics import (
    VACUUM_PERMITTIVITY,
    apriori_norms,
    force_boundary,
    force_volume,
)
from .homogenized import (
    corrector_norms,
    discrete_weak_averages,
    limit_energy,
    limit_force,
    weak_averages,
)
from .mesh import NodeClass, RefineSpec
from .params import CombParams, OutsideProvenRegimeError, validate
from .solver import SolverSettings, solve_physical, solve_rescaled

CSV_HEADER = (
    "epsilon,alpha,n,refine,cutoff,dofs,iters,force_volume,force_boundary,"
    "limit_force,energy,limit_energy,corr_c1,corr_c2,corr_c3,"
    "avg_phi_c2,limit_avg_phi_c2,avg_dx2_c1,limit_avg_dx2_c1,"
    "avg_dx2_c3,limit_avg_dx2_c3,"
    "norm_eps_dx1_c13,norm_dx2_c13,norm_grad_c2,norm_phi,walltime_s,error"
)
COLUMNS = CSV_HEADER.split(",")
_NUMERIC = [c for c in COLUMNS if c not in ("cutoff", "error", "n", "refine")]


@dataclass(frozen=True)
class SweepConfig:
    base: CombParams                       # n is replaced per case
    n_list: tuple[int, ...]
    refine: RefineSpec
    refine_factors: tuple[int, ...] = (1,)
    cutoffs: tuple[Variant, ...] = (Variant.TENSOR_LINEAR,)
    cutoff_margin: float = 1.0
    solver: SolverSettings = SolverSettings()
    epsilon0: float = VACUUM_PERMITTIVITY
    voltage: float = 1.0
    csv_path: str | None = None
    workers: int = 1


class SweepConfigError(ValueError):
    pass


def validate_sweep_config(config: SweepConfig) -> None:
    problems = validate(config.base)
    if problems:
        raise SweepConfigError("invalid base parameters: " + "; ".join(problems))
    ns = config.n_list
    if not ns:
        raise SweepConfigError("n list is empty")
    # monotonicity checks need >= 3 points along one study axis
    if len(ns) < 3 and len(config.refine_factors) < 3:
        raise SweepConfigError(
            "need at least 3 n values (period sweep) or "
            "3 refine factors (refinement study)"
        )
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise SweepConfigError("n list must be strictly increasing")
    if not config.refine_factors or any(f < 1 for f in config.refine_factors):
        raise SweepConfigError("refine factors must be positive")
    if not config.cutoffs:
        raise SweepConfigError("at least one cutoff variant is required")


@dataclass
class SweepReport:
    rows: list[dict] = field(default_factory=list)
    extras: dict = field(default_factory=dict)   # (n, refine) -> solve details

    def column(self, name: str, **match) -> list:
        out = []
        for row in self.rows:
            if all(row.get(k) == v for k, v in match.items()):
                out.append(row[name])
        return out

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write(format_csv(self.rows))

    @classmethod
    def from_csv(cls, path: str | Path) -> "SweepReport":
        with open(path) as fh:
            lines = fh.read().splitlines()
        if not lines or lines[0] != CSV_HEADER:
            raise ValueError("unrecognized report header")
        rows = []
        for line in lines[1:]:
            parts = line.split(",")
            row = dict(zip(COLUMNS, parts))
            for key in COLUMNS:
                if key in ("cutoff", "error"):
                    continue
                row[key] = int(row[key]) if key in ("n", "refine", "dofs", "iters") \
                    else float(row[key])
            rows.append(row)
        return cls(rows=rows)


def format_csv(rows: list[dict]) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        parts = []
        for key in COLUMNS:
            v = row[key]
            if key == "walltime_s":
                parts.append(f"{v:.3f}")
            elif isinstance(v, float):
                parts.append(repr(float(v)))
            else:
                parts.append(str(v))
        lines.append(",".join(parts))
    return "\n".join(lines) + "\n"


def _nan_row(params, factor, cutoff, message):
    row = {c: math.nan for c in COLUMNS}
    row.update(
        epsilon=params.epsilon, alpha=params.alpha, n=params.n,
        refine=factor, cutoff=cutoff.value, dofs=0, iters=0,
        walltime_s=0.0, error=message.replace(",", ";").replace("\n", " "),
    )
    return row


def _case_limits(params):
    try:
        lf = limit_force(params)
        le = limit_energy(params)
        wa = weak_averages(params)
        return lf, le, wa.mean_phi_c2, wa.mean_dx2_c1, wa.mean_dx2_c3
    except OutsideProvenRegimeError:
        return (math.nan,) * 5


def run_case(config: SweepConfig, n: int, factor: int) -> tuple[list[dict], dict]:
    """Solve one (n, refine) case and build its CSV rows (one per cutoff)."""
    params = config.base.with_n(n)
    refine = config.refine.with_factor(factor * config.refine.factor)
    t0 = time.perf_counter()
    try:
        rescaled = solve_rescaled(params, refine, config.solver)
        physical = solve_physical(params, refine, config.solver)
    except Exception as exc:  # per-case failures recorded, sweep continues
        rows = [_nan_row(params, factor, cut, f"{type(exc).__name__}: {exc}")
                for cut in sorted(config.cutoffs, key=lambda v: v.value)]
        return rows, {}

    fb = force_boundary(physical, params, config.epsilon0, config.voltage)
    norms = apriori_norms(rescaled, params)
    try:
        corr = corrector_norms(rescaled, params)
        c1, c2, c3 = corr.c1, corr.c2, corr.c3
    except OutsideProvenRegimeError:   # exploratory alpha < 2
        c1 = c2 = c3 = math.nan
    avgs = discrete_weak_averages(rescaled, params)
    lf, le, l_phi2, l_d1, l_d3 = _case_limits(params)
    walltime = time.perf_counter() - t0

    lo_r, hi_r = rescaled.used_minmax()
    lo_p, hi_p = physical.used_minmax()
    extras = {
        "phi_min": min(lo_r, lo_p), "phi_max": max(hi_r, hi_p),
        "rescaled_range": (lo_r, hi_r), "physical_range": (lo_p, hi_p),
    }

    rows = []
    for cut in sorted(config.cutoffs, key=lambda v: v.value):
        spec = CutoffSpec(params, cut, config.cutoff_margin)
        fv = force_volume(rescaled, spec, params, config.epsilon0, config.voltage)
        rows.append({
            "epsilon": params.epsilon, "alpha": params.alpha, "n": n,
            "refine": factor, "cutoff": cut.value,
            "dofs": int(np.count_nonzero(
                rescaled.mesh.node_class.ravel() == int(NodeClass.FREE))),
            "iters": rescaled.iterations + physical.iterations,
            "force_volume": fv.scaled_integral,
            "force_boundary": fb.scaled_integral,
            "limit_force": lf,
            "energy": norms.energy, "limit_energy": le,
            "corr_c1": corr.c1, "corr_c2": corr.c2, "corr_c3": corr.c3,
            "avg_phi_c2": avgs.mean_phi_c2, "limit_avg_phi_c2": l_phi2,
            "avg_dx2_c1": avgs.mean_dx2_c1, "limit_avg_dx2_c1": l_d1,
            "avg_dx2_c3": avgs.mean_dx2_c3, "limit_avg_dx2_c3": l_d3,
            "norm_eps_dx1_c13": norms.eps_dx1_c13,
            "norm_dx2_c13": norms.dx2_c13,
            "norm_grad_c2": norms.grad_c2,
            "norm_phi": norms.phi,
            "walltime_s": walltime,
            "error": "",
        })
    return rows, extras


def _case_worker(args):
    config, n, factor = args
    return (n, factor), run_case(config, n, factor)


def run_sweep(config: SweepConfig) -> SweepReport:
    """Run every case; write the CSV incrementally if a path is configured."""
    validate_sweep_config(config)
    cases = [(n, f) for n in config.n_list for f in config.refine_factors]
    cases.sort()
    report = SweepReport()

    fh = None
    if config.csv_path:
        fh = open(config.csv_path, "w")
        fh.write(CSV_HEADER + "\n")
    try:
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                results = dict(pool.map(
                    _case_worker,
                    [(config, n, f) for n, f in cases],
                ))
        else:
            results = {(n, f): run_case(config, n, f) for n, f in cases}
        for key in cases:
            rows, extras = results[key]
            report.rows.extend(rows)
            if extras:
                report.extras[key] = extras
            if fh is not None:
                for row in rows:
                    fh.write(format_csv([row]).splitlines()[1] + "\n")
                fh.flush()
    finally:
        if fh is not None:
            fh.close()
    return report


# --- acceptance checking -------------------------------------------------

#: criterion name -> threshold; overridable through check_report(criteria=...)
DEFAULT_THRESHOLDS = {
    "force_monotone": 1.0,         # successive |error| ratios must stay below
    "force_relerr": 0.15,          # at the largest n
    "corrector_monotone": 1.0,
    "corrector_half": 0.5,         # value at largest n vs value at second n
    "energy_relerr": 0.10,         # alpha = 2 only
    "avg_phi_c2_err": 0.05,        # alpha = 2 only, largest n
    "avg_dx2_err": 0.02,           # alpha = 2 only, largest n
    "norm_upper_band": 2.0,        # no norm may exceed 2x its coarsest value
    "prop_equality_final": 0.10,   # |fv-fb|/fv at the finest refinement
    "prop_equality_monotone": 1.0,
    "cutoff_gap_final": 0.02,
    "cutoff_gap_monotone": 1.0,
    "completeness": 0.0,           # missing/errored rows
}

_NORM_COLS = ("norm_eps_dx1_c13", "norm_dx2_c13", "norm_grad_c2", "norm_phi")


def _verdict(name, measured, threshold, ok):
    return {"name": name, "measured": measured, "threshold": threshold,
            "pass": bool(ok)}


def _ratios(values):
    return [b / a if a != 0 else math.inf for a, b in zip(values, values[1:])]


def check_report(report: SweepReport, criteria: dict | None = None) -> list[dict]:
    """Evaluate every criterion the report has data for.

    Returns one verdict object per criterion: {name, measured, threshold,
    pass}.  Sweep-style criteria run per (alpha, refine, cutoff) group with
    at least 3 n values; refinement-style criteria run per (alpha, n) group
    with at least 2 refine factors.
    """
    thresholds = dict(DEFAULT_THRESHOLDS)
    if criteria:
        unknown = set(criteria) - set(thresholds)
        if unknown:
            raise ValueError(f"unknown criteria: {sorted(unknown)}")
        thresholds.update(criteria)
    out = []

    rows = [r for r in report.rows if not r["error"]]
    n_err = len(report.rows) - len(rows)
    # limit_* columns may be NaN legitimately (alpha outside the proven regime)
    nan_rows = sum(
        any(isinstance(r[c], float) and math.isnan(r[c])
            for c in _NUMERIC if not c.startswith("limit_"))
        for r in rows
    )
    out.append(_verdict("completeness", float(n_err + nan_rows),
                        thresholds["completeness"], n_err + nan_rows == 0))

    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["alpha"], r["refine"], r["cutoff"]), []).append(r)

    for (alpha, refine, cutoff), grp in sorted(groups.items()):
        grp = sorted(grp, key=lambda r: r["n"])
        if len(grp) < 3 or math.isnan(grp[0]["limit_force"]):
            continue
        tagkey = f"a{alpha:g}_r{refine}_{cutoff}"
        limit = grp[0]["limit_force"]
        errs = [abs(r["force_volume"] - limit) for r in grp]
        tail = _ratios(errs[-3:])
        out.append(_verdict(f"force_monotone_{tagkey}", max(tail),
                            thresholds["force_monotone"],
                            max(tail) < thresholds["force_monotone"]))
        rel = errs[-1] / limit
        out.append(_verdict(f"force_relerr_{tagkey}", rel,
                            thresholds["force_relerr"],
                            rel <= thresholds["force_relerr"]))
        for col in ("corr_c1", "corr_c2", "corr_c3"):
            vals = [r[col] for r in grp]
            tail = _ratios(vals[-3:])
            out.append(_verdict(f"{col}_monotone_{tagkey}", max(tail),
                                thresholds["corrector_monotone"],
                                max(tail) < thresholds["corrector_monotone"]))
            half = vals[-1] / vals[1]
            out.append(_verdict(f"{col}_half_{tagkey}", half,
                                thresholds["corrector_half"],
                                half <= thresholds["corrector_half"]))
        if alpha == 2.0:
            le = grp[0]["limit_energy"]
            erel = abs(grp[-1]["energy"] - le) / le
            out.append(_verdict(f"energy_relerr_{tagkey}", erel,
                                thresholds["energy_relerr"],
                                erel <= thresholds["energy_relerr"]))
            last = grp[-1]
            e_phi = abs(last["avg_phi_c2"] - last["limit_avg_phi_c2"])
            out.append(_verdict(f"avg_phi_c2_err_{tagkey}", e_phi,
                                thresholds["avg_phi_c2_err"],
                                e_phi <= thresholds["avg_phi_c2_err"]))
            for col, lim_col in (("avg_dx2_c1", "limit_avg_dx2_c1"),
                                 ("avg_dx2_c3", "limit_avg_dx2_c3")):
                e = abs(last[col] - last[lim_col])
                out.append(_verdict(f"{col}_err_{tagkey}", e,
                                    thresholds["avg_dx2_err"],
                                    e <= thresholds["avg_dx2_err"]))
        for col in _NORM_COLS:
            vals = [r[col] for r in grp]
            band = max(vals) / vals[0]
            out.append(_verdict(f"{col}_band_{tagkey}", band,
                                thresholds["norm_upper_band"],
                                band <= thresholds["norm_upper_band"]))
        lims = {c: {r[c] for r in grp} for c in COLUMNS if c.startswith("limit_")}
        constant = all(len(v) == 1 for v in lims.values())
        out.append(_verdict(f"limits_constant_{tagkey}", float(not constant),
                            0.0, constant))

    # refinement-axis criteria
    rgroups: dict[tuple, list[dict]] = {}
    for r in rows:
        rgroups.setdefault((r["alpha"], r["n"], r["cutoff"]), []).append(r)
    for (alpha, n, cutoff), grp in sorted(rgroups.items()):
        grp = sorted(grp, key=lambda r: r["refine"])
        if len(grp) < 2:
            continue
        tagkey = f"a{alpha:g}_n{n}_{cutoff}"
        gaps = [abs(r["force_volume"] - r["force_boundary"]) / r["force_volume"]
                for r in grp]
        tail = _ratios(gaps)
        out.append(_verdict(f"prop_equality_monotone_{tagkey}", max(tail),
                            thresholds["prop_equality_monotone"],
                            max(tail) < thresholds["prop_equality_monotone"]))
        out.append(_verdict(f"prop_equality_final_{tagkey}", gaps[-1],
                            thresholds["prop_equality_final"],
                            gaps[-1] <= thresholds["prop_equality_final"]))

    cutnames = sorted({r["cutoff"] for r in rows})
    if len(cutnames) == 2:
        pair: dict[tuple, dict[str, float]] = {}
        for r in rows:
            pair.setdefault((r["alpha"], r["n"], r["refine"]), {})[r["cutoff"]] = \
                r["force_volume"]
        bygroup: dict[tuple, list[tuple[int, float]]] = {}
        for (alpha, n, refine), two in pair.items():
            if len(two) == 2:
                a, b = (two[c] for c in cutnames)
                bygroup.setdefault((alpha, n), []).append(
                    (refine, abs(a - b) / abs(a)))
        for (alpha, n), gaps in sorted(bygroup.items()):
            gaps.sort()
            vals = [g for _, g in gaps]
            tagkey = f"a{alpha:g}_n{n}"
            out.append(_verdict(f"cutoff_gap_final_{tagkey}", vals[-1],
                                thresholds["cutoff_gap_final"],
                                vals[-1] <= thresholds["cutoff_gap_final"]))
            if len(vals) >= 2:
                tail = _ratios(vals)
                out.append(_verdict(
                    f"cutoff_gap_monotone_{tagkey}", max(tail),
                    thresholds["cutoff_gap_monotone"],
                    max(tail) < thresholds["cutoff_gap_monotone"]))
    return out


def overall_pass(verdicts: list[dict]) -> bool:
    return all(v["pass"] for v in verdicts)
