"""Run configuration, flat key-value config parsing, scenario execution with
CSV/JSON artifacts, and the refinement / regularization-sequence studies."""
from __future__ import annotations

import concurrent.futures
import csv
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import diagnostics
from .core import Grid1D, Params
from .initdata import (
    PRESET_NAMES,
    Profile,
    ScenarioSpec,
    ScenarioValidationError,
    build_scenario,
    preset_scenario,
)
from .solver import SchemeConfig, Trajectory, run

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class StudySpec:
    dx_refinement: tuple = ()
    n_sequence: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioSpec
    grid: Grid1D
    scheme: SchemeConfig = SchemeConfig()
    t_end: float = 0.02
    record_every: float = 0.002
    output_dir: str = "out"
    study: StudySpec = StudySpec()
    jump_x0: float = 0.0

    @property
    def params(self) -> Params:
        return self.scenario.params


# ---------------------------------------------------------------------------
# config text format: one `section.key = value` per line, '#' comments

_FLOAT_KEYS = {
    "params.mu", "params.alpha", "params.a", "params.gamma",
    "params.rho_bar", "params.theta",
    "grid.x_min", "grid.x_max",
    "scheme.cfl_safety",
    "run.t_end", "run.record_every", "run.jump_x0",
    "scenario.mollify_tau",
}
_INT_KEYS = {"grid.cells", "scheme.max_steps"}
_STR_KEYS = {
    "preset", "scenario.kind", "scheme.formulation", "scheme.flux",
    "scheme.limiter", "scheme.bc", "output.dir",
    "scenario.v0", "scenario.u0",
}
_LIST_KEYS = {
    "scenario.density_values", "scenario.density_breaks",
    "scenario.atoms", "study.dx_refinement", "study.n_sequence",
}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _LIST_KEYS


def _parse_profile(text: str) -> Profile:
    text = text.strip()
    if text == "zero":
        return Profile("zero")
    if text.startswith("gauss:"):
        center, amp, width = (float(v) for v in text[6:].split(","))
        return Profile("gauss", center=center, amplitude=amp, width=width)
    raise ValueError(f"unknown profile {text!r} (expected zero or "
                     "gauss:center,amplitude,width)")


def parse_config(text: str) -> RunConfig:
    """Parse and validate the flat key-value config format; raises
    ConfigError listing every offending field."""
    raw = {}
    errors = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        raw[key] = value
    if errors:
        raise ConfigError(errors)
    return config_from_mapping(raw)


def config_from_mapping(raw: dict) -> RunConfig:
    errors = []

    def take(key, default=None):
        if key not in raw:
            return default
        value = raw.pop(key)
        try:
            if key in _FLOAT_KEYS:
                if key == "scenario.mollify_tau" and value in ("auto", "grid"):
                    return None
                return float(value)
            if key in _INT_KEYS:
                return int(value)
            return value
        except ValueError:
            errors.append(f"{key}: cannot parse {value!r}")
            return default

    preset = take("preset")
    if preset is not None and preset not in PRESET_NAMES:
        errors.append(f"preset: unknown name {preset!r} "
                      f"(choose from {', '.join(PRESET_NAMES)})")
        preset = None

    base = preset_scenario(preset) if preset else None
    pdef = base.params if base else Params()
    pkw = {}
    for name, cur in (("mu", pdef.mu), ("alpha", pdef.alpha), ("a", pdef.a),
                      ("gamma", pdef.gamma), ("rho_bar", pdef.rho_bar),
                      ("theta", pdef.theta)):
        pkw[name] = take(f"params.{name}", cur)
    n_raw = raw.pop("params.n_reg", None)
    pkw["n_reg"] = math.inf if n_raw in (None, "inf") else float(n_raw)
    try:
        params = Params(**pkw)
    except ValueError as exc:
        errors.append(f"params: {exc}")
        params = Params()

    try:
        grid = Grid1D(x_min=take("grid.x_min", -20.0),
                      x_max=take("grid.x_max", 20.0),
                      cells=take("grid.cells", 1024))
    except ValueError as exc:
        errors.append(f"grid: {exc}")
        grid = Grid1D(-20.0, 20.0, 1024)

    kind = take("scenario.kind", base.kind if base else "custom")
    dv = take("scenario.density_values")
    db = take("scenario.density_breaks")
    atoms_raw = take("scenario.atoms")
    v0_raw = take("scenario.v0")
    u0_raw = take("scenario.u0")
    tau = take("scenario.mollify_tau", base.mollify_tau if base else None)

    try:
        v0 = _parse_profile(v0_raw) if v0_raw else (base.v0 if base else Profile("zero"))
        u0 = _parse_profile(u0_raw) if u0_raw else (base.u0 if base else Profile("zero"))
    except ValueError as exc:
        errors.append(f"scenario profile: {exc}")
        v0 = u0 = Profile("zero")

    def floats(text):
        return tuple(float(v) for v in text.split(",") if v.strip())

    density_values = floats(dv) if dv else (base.density_values if base
                                            else (params.rho_bar,))
    density_breaks = floats(db) if db else (base.density_breaks if base else ())
    if atoms_raw:
        atoms = tuple(tuple(float(v) for v in pair.split(":"))
                      for pair in atoms_raw.split(";") if pair.strip())
    else:
        atoms = base.momentum_atoms if base else ()

    scenario = ScenarioSpec(kind=kind, params=params,
                            density_breaks=density_breaks,
                            density_values=density_values,
                            v0=v0, u0=u0, momentum_atoms=atoms,
                            mollify_tau=tau)
    try:
        scenario.validate()
    except ScenarioValidationError as exc:
        errors.extend(exc.violations)

    try:
        scheme = SchemeConfig(
            formulation=take("scheme.formulation", "primitive"),
            cfl_safety=take("scheme.cfl_safety", 0.4),
            flux=take("scheme.flux", "rusanov"),
            limiter=take("scheme.limiter", "mc"),
            max_steps=take("scheme.max_steps", 5_000_000),
            bc=take("scheme.bc", "farfield"))
    except ValueError as exc:
        errors.append(f"scheme: {exc}")
        scheme = SchemeConfig()

    t_end = take("run.t_end", 0.02)
    record_every = take("run.record_every", 0.002)
    jump_x0 = take("run.jump_x0", 0.0)
    output_dir = take("output.dir", "out")

    dx_list = raw.pop("study.dx_refinement", None)
    n_list = raw.pop("study.n_sequence", None)
    dx_ref = tuple(int(v) for v in dx_list.split(",")) if dx_list else ()
    if dx_ref and list(dx_ref) != sorted(set(dx_ref)):
        errors.append("study.dx_refinement cell counts must be strictly increasing")
    n_seq = ()
    if n_list:
        n_seq = tuple(math.inf if v.strip() == "inf" else float(v)
                      for v in n_list.split(","))
    if t_end is not None and t_end <= 0:
        errors.append("run.t_end must be positive")

    for key in raw:
        errors.append(f"unknown key {key!r}")
    if errors:
        raise ConfigError(errors)
    return RunConfig(scenario=scenario, grid=grid, scheme=scheme,
                     t_end=t_end, record_every=record_every,
                     output_dir=output_dir,
                     study=StudySpec(dx_ref, n_seq), jump_x0=jump_x0)


def preset_config(name: str, **overrides) -> RunConfig:
    raw = {"preset": name}
    raw.update({k: str(v) for k, v in overrides.items()})
    return config_from_mapping(raw)


# ---------------------------------------------------------------------------
# execution and artifacts


def simulate(cfg: RunConfig) -> Trajectory:
    built = build_scenario(cfg.scenario, cfg.grid)
    initial = built.effective_state if cfg.scheme.formulation == "effective" \
        else built.state
    return run(initial, cfg.t_end, cfg.grid, cfg.params, cfg.scheme,
               record_every=cfg.record_every, jump_x0=cfg.jump_x0)


def verdicts_for(traj: Trajectory, cfg: RunConfig,
                 entropy_tol: float = 0.01, gronwall_tol: float = 0.05,
                 mass_tol: float = 1e-10) -> dict:
    records = traj.records
    bd0 = records[0].bd_entropy
    entropy_ok = all(r.bd_entropy <= bd0 * (1.0 + entropy_tol) + 1e-12
                     for r in records)
    _, gron_ok = diagnostics.gronwall_envelope(traj, cfg.params,
                                               tol=gronwall_tol)
    return {
        "entropy_decay": bool(entropy_ok),
        "gronwall": bool(gron_ok),
        "mass_balance": bool(traj.mass_error_accum <= mass_tol),
        "regularization_probe": "not-evaluated",
    }


def write_artifacts(traj: Trajectory, cfg: RunConfig, out_dir: str,
                    extra_summary: dict | None = None) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    cols = diagnostics.DiagnosticsRecord.csv_columns()
    with open(os.path.join(out_dir, "diagnostics.csv"), "w", newline="") as fh:
        fh.write(f"# nsvisc1d diagnostics schema v{SCHEMA_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(cols)
        for rec in traj.records:
            writer.writerow([repr(v) for v in rec.csv_row()])

    keep = _sparse_indices(len(traj.snapshots), 5)
    snaps = {
        "x": cfg.grid.centers().tolist(),
        "snapshots": [
            {"t": traj.snapshots[i][0].t,
             "rho": traj.snapshots[i][0].rho.tolist(),
             "m": traj.snapshots[i][0].m.tolist()}
            for i in keep
        ],
    }
    with open(os.path.join(out_dir, "snapshots.json"), "w") as fh:
        json.dump(snaps, fh)

    summary = {
        "status": traj.status,
        "steps": traj.steps,
        "cells": cfg.grid.cells,
        "t_final": traj.records[-1].t,
        "mass_error_max": traj.mass_error_max,
        "mass_error_accum": traj.mass_error_accum,
        "verdicts": verdicts_for(traj, cfg),
    }
    if extra_summary:
        summary.update(extra_summary)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary


def _sparse_indices(n: int, cap: int) -> list:
    if n <= cap:
        return list(range(n))
    idx = np.unique(np.linspace(0, n - 1, cap).astype(int))
    return idx.tolist()


def run_scenario(cfg: RunConfig, out_dir: str | None = None) -> int:
    """Execute one configured run and write diagnostics.csv, snapshots.json,
    summary.json; returns the process exit code."""
    out = out_dir or cfg.output_dir
    try:
        traj = simulate(cfg)
    except ScenarioValidationError as exc:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "summary.json"), "w") as fh:
            json.dump({"status": "validation_error",
                       "errors": exc.violations}, fh, indent=2)
        return EXIT_VALIDATION
    summary = write_artifacts(traj, cfg, out)
    return EXIT_OK if summary["status"] == "completed" else EXIT_SOLVER


# ---------------------------------------------------------------------------
# studies


def _study_worker(args):
    cfg, label = args
    traj = simulate(cfg)
    return label, cfg, traj


def _fan_out(jobs, workers: int | None = None):
    if workers == 1 or len(jobs) == 1:
        results = [_study_worker(j) for j in jobs]
    else:
        with concurrent.futures.ThreadPoolExecutor(
                max_workers=workers or min(4, len(jobs))) as pool:
            results = list(pool.map(_study_worker, jobs))
    # deterministic merge order, independent of completion order
    return sorted(results, key=lambda item: item[0])


def _inject_coarse(rho_coarse: np.ndarray, cells_fine: int) -> np.ndarray:
    ratio = cells_fine // len(rho_coarse)
    if ratio * len(rho_coarse) != cells_fine:
        raise ValueError("cell counts must nest")
    return np.repeat(rho_coarse, ratio)


@dataclass
class StudyRow:
    label: str
    cells: int
    dx: float
    l1_distance: float | None
    observed_order: float | None
    h1_phi1_initial: float
    h1_phi1_final: float
    verdicts: dict


def refinement_study(cfg: RunConfig, workers: int | None = None):
    """Run the scenario across study.dx_refinement cell counts and report the
    Cauchy L1 density distances at t_end plus observed orders."""
    if not cfg.study.dx_refinement:
        raise ConfigError(["study.dx_refinement is required"])
    jobs = []
    for cells in cfg.study.dx_refinement:
        grid = replace(cfg.grid, cells=cells)
        jobs.append((replace(cfg, grid=grid, study=StudySpec()), cells))
    results = _fan_out(jobs, workers)

    rows = []
    dists = []
    for k, (cells, rcfg, traj) in enumerate(results):
        dist = None
        if k > 0:
            _, ccfg, ctraj = results[k - 1]
            fine = traj.final_state.rho
            coarse = _inject_coarse(ctraj.final_state.rho, cells)
            dist = float(np.sum(np.abs(fine - coarse)) * rcfg.grid.dx)
        dists.append(dist)
        order = None
        if k > 1 and dists[k - 1] and dist:
            order = math.log2(dists[k - 1] / dist)
        rows.append(StudyRow(
            label=str(cells), cells=cells, dx=rcfg.grid.dx,
            l1_distance=dist, observed_order=order,
            h1_phi1_initial=traj.records[0].h1_phi1,
            h1_phi1_final=traj.records[-1].h1_phi1,
            verdicts=verdicts_for(traj, rcfg)))
    _attach_probe_trend(rows)
    return rows


def _attach_probe_trend(rows) -> None:
    # regularization probe: does h1_phi1 at t_end settle or keep growing
    # under refinement?
    if len(rows) < 2:
        return
    finals = [r.h1_phi1_final for r in rows]
    ratio = finals[-1] / finals[-2] if finals[-2] else math.inf
    trend = "persistent" if ratio >= 1.1 else "converged"
    for r in rows:
        r.verdicts = dict(r.verdicts)
        r.verdicts["regularization_probe"] = trend


def n_sequence_study(cfg: RunConfig, workers: int | None = None):
    """Re-run the scenario for each regularization index n (viscosity term
    rho**theta/n and mollification time 1/n) at fixed dx; reports the L1
    density distance of each run to the n = inf member at t_end."""
    if not cfg.study.n_sequence:
        raise ConfigError(["study.n_sequence is required"])
    jobs = []
    for idx, n in enumerate(cfg.study.n_sequence):
        params = replace(cfg.scenario.params, n_reg=n)
        tau = 0.0 if math.isinf(n) else 1.0 / n
        scen = replace(cfg.scenario, params=params, mollify_tau=tau)
        jobs.append((replace(cfg, scenario=scen, study=StudySpec()), idx))
    results = _fan_out(jobs, workers)

    ref = None
    for idx, rcfg, traj in results:
        if math.isinf(rcfg.scenario.params.n_reg):
            ref = traj.final_state.rho
    rows = []
    for idx, rcfg, traj in results:
        n = rcfg.scenario.params.n_reg
        dist = None
        if ref is not None and not math.isinf(n):
            dist = float(np.sum(np.abs(traj.final_state.rho - ref))
                         * rcfg.grid.dx)
        rows.append(StudyRow(
            label="inf" if math.isinf(n) else f"{n:g}",
            cells=rcfg.grid.cells, dx=rcfg.grid.dx,
            l1_distance=dist, observed_order=None,
            h1_phi1_initial=traj.records[0].h1_phi1,
            h1_phi1_final=traj.records[-1].h1_phi1,
            verdicts=verdicts_for(traj, rcfg)))
    return rows


def write_study(rows, out_dir: str, name: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    payload = [
        {"label": r.label, "cells": r.cells, "dx": r.dx,
         "l1_distance": r.l1_distance, "observed_order": r.observed_order,
         "h1_phi1_initial": r.h1_phi1_initial,
         "h1_phi1_final": r.h1_phi1_final, "verdicts": r.verdicts}
        for r in rows
    ]
    with open(os.path.join(out_dir, name), "w") as fh:
        json.dump(payload, fh, indent=2)
