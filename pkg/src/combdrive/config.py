"""JSON configuration: schema validation, dotted-key overrides, builders.

The schema is the nested DEFAULTS tree.  Unknown keys are rejected at every
level and override values are type-checked against the schema, so a typo in
a config file or a ``--set`` flag fails loudly instead of silently running
with defaults.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .mesh import RefineSpec
from .params import CombParams
from .solver import SolverSettings
from .cutoff import CutoffSpec, Variant
from .diagnostics import VACUUM_PERMITTIVITY

DEFAULTS = {
    "zeta": [0.2, 0.4, 0.6, 0.8],
    "L": 1.0,
    "l": [1.0, 4.0, 5.0],
    "alpha": 2.0,
    "n": 8,
    "refine": {
        "gap": 4,
        "zeta": 8,
        "middle": 16,
        "factor": 1,
        "grading": 3.0,
        "node_budget": 4_000_000,
    },
    "solver": {
        "tol": 1e-10,
        "max_iter": 200_000,
        "precond": "sgs",
    },
    "cutoff": {
        "variant": "tensor_linear",
        "margin": 1.0,
    },
    "force": {
        "epsilon0": VACUUM_PERMITTIVITY,
        "voltage": 1.0,
    },
    "sweep": {
        "n_list": [4, 8, 16, 32],
        "refine_factors": [1],
        "cutoffs": ["tensor_linear"],
        "csv": "report.csv",
        "workers": 1,
    },
}

_LIST_LENGTHS = {"zeta": 4, "l": 3}


class ConfigError(ValueError):
    pass


def _check_types(cfg, schema, path=""):
    for key, value in cfg.items():
        where = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"unknown config key: {where}")
        ref = schema[key]
        if isinstance(ref, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where} must be an object")
            _check_types(value, ref, where)
        elif isinstance(ref, list):
            if not isinstance(value, list):
                raise ConfigError(f"{where} must be a list")
            want = _LIST_LENGTHS.get(key)
            if want is not None and len(value) != want:
                raise ConfigError(f"{where} must have {want} entries")
            if ref and isinstance(ref[0], str):
                if not all(isinstance(v, str) for v in value):
                    raise ConfigError(f"{where} must contain strings")
            elif not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                         for v in value):
                raise ConfigError(f"{where} must contain numbers")
        elif isinstance(ref, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{where} must be a boolean")
        elif isinstance(ref, int):
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{where} must be an integer")
        elif isinstance(ref, float):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{where} must be a number")
        elif isinstance(ref, str):
            if not isinstance(value, str):
                raise ConfigError(f"{where} must be a string")


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def apply_overrides(cfg: dict, overrides: list[str]) -> dict:
    """Apply repeatable ``key.path=value`` overrides (values parsed as JSON)."""
    cfg = copy.deepcopy(cfg)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value: {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ConfigError(f"unknown config key: {key}")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"unknown config key: {key}")
        node[parts[-1]] = value
    return cfg


def load_config(path: str | Path | None = None,
                overrides: list[str] | None = None) -> dict:
    """Defaults, overlaid with a JSON file, overlaid with --set overrides."""
    cfg = {}
    if path is not None:
        with open(path) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config root must be a JSON object")
    _check_types(cfg, DEFAULTS)
    merged = _merge(DEFAULTS, cfg)
    if overrides:
        merged = apply_overrides(merged, overrides)
        _check_types(merged, DEFAULTS)
    return merged


def build_params(cfg: dict) -> CombParams:
    z = cfg["zeta"]
    l = cfg["l"]
    return CombParams(
        zeta1=float(z[0]), zeta2=float(z[1]), zeta3=float(z[2]), zeta4=float(z[3]),
        L=float(cfg["L"]),
        l1=float(l[0]), l2=float(l[1]), l3=float(l[2]),
        alpha=float(cfg["alpha"]),
        n=int(cfg["n"]),
    )


def build_refine(cfg: dict, factor: int | None = None) -> RefineSpec:
    r = cfg["refine"]
    return RefineSpec(
        gap=int(r["gap"]), zeta=int(r["zeta"]), middle=int(r["middle"]),
        factor=int(factor if factor is not None else r["factor"]),
        grading=float(r["grading"]),
        node_budget=int(r["node_budget"]),
    )


def build_solver_settings(cfg: dict) -> SolverSettings:
    s = cfg["solver"]
    return SolverSettings(
        tol=float(s["tol"]), max_iter=int(s["max_iter"]), precond=str(s["precond"]),
    )


def build_cutoff(cfg: dict, params: CombParams,
                 variant: str | None = None) -> CutoffSpec:
    c = cfg["cutoff"]
    return CutoffSpec(
        params=params,
        variant=Variant(variant if variant is not None else c["variant"]),
        margin=float(c["margin"]),
    )


def build_sweep_config(cfg: dict, csv_path: str | None = None):
    from .harness import SweepConfig

    params = build_params(cfg)
    sw = cfg["sweep"]
    return SweepConfig(
        base=params,
        n_list=tuple(int(n) for n in sw["n_list"]),
        refine=build_refine(cfg),
        refine_factors=tuple(int(f) for f in sw["refine_factors"]),
        cutoffs=tuple(Variant(c) for c in sw["cutoffs"]),
        cutoff_margin=float(cfg["cutoff"]["margin"]),
        solver=build_solver_settings(cfg),
        epsilon0=float(cfg["force"]["epsilon0"]),
        voltage=float(cfg["force"]["voltage"]),
        csv_path=csv_path,
        workers=int(sw["workers"]),
    )
