"""Experiment orchestration: run, measure, and serialize to CSV + snapshots.

Every experiment writes a ``manifest.json`` (config echo, package version,
wall time, status) plus experiment-specific CSV tables with full-precision
scientific formatting (17 significant digits), so identical configs and
seeds reproduce byte-identical CSVs.  Exit status: 0 on completion, 2 on
configuration errors, 3 on numerical divergence.
"""

import json
import os
import subprocess
import time as _time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .cutoffs import build_cutoff_suite
from .diagnostics import (RadialDatum, XNormIndices, energy_growth_fit,
                          linear_decay_experiment, measure_x_components,
                          scattering_check)
from .errors import EmlabError
from .integrators import IntegratorConfig, run
from .model import (DiagState, PhysicalParams, diagonalize, random_state,
                    reconstruct, to_profiles)
from .resonance import (enumerate_interaction_specs, resonance_report,
                        verify_phase_lower_bound)
from .snapshots import save_snapshot
from .spectral import Grid3


def fmt(x):
    """Full-precision scientific formatting for reproducible CSVs."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.16e}"


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _intervals_str(intervals):
    return ";".join(f"{fmt(lo)}:{fmt(hi)}" for lo, hi in intervals)


def _version_string():
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=5,
                             cwd=os.path.dirname(os.path.abspath(__file__)))
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except Exception:
        pass
    return __version__


def _write_manifest(outdir, cfg, status, wall, outputs):
    manifest = {
        "experiment": cfg.experiment,
        "config": dict(sorted(cfg.values.items())),
        "version": _version_string(),
        "wall_time_s": wall,
        "status": status,
        "outputs": sorted(outputs),
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(cfg: ExperimentConfig):
    """Dispatch one experiment; returns the process exit code."""
    outdir = cfg.output_dir()
    os.makedirs(outdir, exist_ok=True)
    t0 = _time.monotonic()
    runner = {
        "simulate": _run_simulate,
        "linear-decay": _run_linear_decay,
        "resonances": _run_resonances,
        "phase-bound": _run_phase_bound,
        "cs-sweep": _run_cs_sweep,
        "scattering": _run_scattering,
    }[cfg.experiment]
    status, outputs = runner(cfg, outdir)
    _write_manifest(outdir, cfg, status, _time.monotonic() - t0, outputs)
    return 0 if status == "completed" else 3


def _grid_params(cfg):
    grid = Grid3(cfg["grid.box_length"], cfg["grid.points_per_axis"])
    params = PhysicalParams(cfg["physical.c_s"])
    return grid, params


def _integrator_config(cfg, grid):
    from .integrators import default_dt
    dt = cfg["integrator.dt"]
    scheme = cfg["integrator.scheme"]
    if dt == 0.0:
        dt = default_dt(grid, scheme)
    return IntegratorConfig(
        scheme=scheme, dt=dt, t_end=cfg["integrator.t_end"],
        snapshot_stride=cfg["integrator.snapshot_stride"],
        constraint_check_stride=cfg["integrator.constraint_check_stride"])


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _run_simulate(cfg, outdir):
    grid, params = _grid_params(cfg)
    icfg = _integrator_config(cfg, grid)
    state = random_state(grid, params, seed=cfg["ic.seed"],
                         amplitude=cfg["ic.amplitude"],
                         band_fraction=cfg["ic.band_fraction"])
    if icfg.scheme == "exponential-rk4":
        initial = diagonalize(state, params, tol=cfg["diagnostics.constraint_tol"])
    else:
        initial = state
    traj = run(initial, icfg, params)
    outputs = []

    rows = [(t,) + tuple(traj.norm_records[k][i] for k in sorted(traj.norm_records))
            for i, t in enumerate(traj.norm_times)]
    write_csv(os.path.join(outdir, "norms.csv"),
              ["time"] + sorted(traj.norm_records), rows)
    outputs.append("norms.csv")

    rows = [(t, traj.constraint_records["gauss"][i],
             traj.constraint_records["div_b"][i],
             traj.constraint_records["curl"][i])
            for i, t in enumerate(traj.constraint_times)]
    write_csv(os.path.join(outdir, "constraints.csv"),
              ["time", "gauss", "div_b", "curl"], rows)
    outputs.append("constraints.csv")

    growth = energy_growth_fit(traj, n_index=4, eps=cfg["ic.amplitude"])
    write_csv(os.path.join(outdir, "growth.csv"),
              ["growth_factor", "fitted_c0eps", "eps"],
              [(growth["growth_factor"], growth["fitted_c0eps"], growth["eps"])])
    outputs.append("growth.csv")

    for i, (t, snap) in enumerate(traj.snapshots):
        em = snap if not isinstance(snap, DiagState) else reconstruct(snap, params)
        name = f"snapshot_{i:05d}.emlab"
        save_snapshot(em, os.path.join(outdir, name))
        outputs.append(name)

    if cfg["diagnostics.x_norms"] and icfg.scheme == "exponential-rk4" \
            and traj.status == "completed" and len(traj.snapshots) > 1:
        report = resonance_report(params.c_s,
                                  search_radius=cfg["resonance.search_radius"],
                                  tol=cfg["resonance.tol"],
                                  seed_step=cfg["resonance.seed_step"],
                                  with_clouds=False)
        if report.separated:
            suite = build_cutoff_suite(report)
            idx = XNormIndices(cfg["diagnostics.sobolev_n"],
                               cfg["diagnostics.sobolev_npp"],
                               cfg["diagnostics.sobolev_np"],
                               cfg["diagnostics.delta1"])
            series = measure_x_components(traj, suite, params, idx)
            names = sorted(series.records)
            rows = [(t,) + tuple(series.records[k][i] for k in names)
                    for i, t in enumerate(series.times)]
            write_csv(os.path.join(outdir, "xnorms.csv"), ["time"] + names, rows)
            outputs.append("xnorms.csv")

    return traj.status, outputs


# ---------------------------------------------------------------------------
# linear-decay
# ---------------------------------------------------------------------------

def _run_linear_decay(cfg, outdir):
    speed = cfg.speed("decay.speed")
    datum = RadialDatum(sigma=cfg["decay.sigma"])
    times = np.geomspace(cfg["decay.t_min"], cfg["decay.t_max"],
                         cfg["decay.n_times"])
    fit_rows = []
    series_rows = []
    for p in cfg.pvalues("decay.p_values"):
        fit, ts, norms = linear_decay_experiment(p, speed=speed, datum=datum,
                                                 times=times)
        label = "inf" if p == np.inf else f"{p:g}"
        fit_rows.append((label, speed, fit.window[0], fit.window[1],
                         fit.exponent, fit.r_squared, fit.reliable))
        for t, v in zip(ts, norms):
            series_rows.append((label, speed, t, v))
    write_csv(os.path.join(outdir, "linear_decay.csv"),
              ["p", "speed", "t_min", "t_max", "exponent", "r_squared",
               "reliable"], fit_rows)
    write_csv(os.path.join(outdir, "linear_decay_series.csv"),
              ["p", "speed", "time", "norm"], series_rows)
    return "completed", ["linear_decay.csv", "linear_decay_series.csv"]


# ---------------------------------------------------------------------------
# resonances
# ---------------------------------------------------------------------------

def _report_rows(report):
    point_rows = []
    for spec in sorted(report.points, key=lambda s: s.label(report.c_s)):
        for s, r in report.points[spec]:
            from .resonance import phase_value_radial, phase_grad_radial
            point_rows.append((spec.label(report.c_s), spec.eps1, spec.eps2,
                               spec.k_speed, spec.l_speed, spec.m_speed, s, r,
                               abs(s - r),
                               abs(phase_value_radial(spec, s, r)),
                               abs(phase_grad_radial(spec, s, r))))
    return point_rows


def _run_resonances(cfg, outdir):
    grid, params = _grid_params(cfg)
    report = resonance_report(params.c_s,
                              search_radius=cfg["resonance.search_radius"],
                              tol=cfg["resonance.tol"],
                              seed_step=cfg["resonance.seed_step"],
                              cloud_step=cfg["resonance.cloud_step"],
                              with_clouds=cfg["resonance.with_clouds"])
    outputs = []
    write_csv(os.path.join(outdir, "resonance_points.csv"),
              ["spec", "eps1", "eps2", "k_speed", "l_speed", "m_speed",
               "s", "r", "s_minus_r", "phi_residual", "grad_residual"],
              _report_rows(report))
    outputs.append("resonance_points.csv")

    rows = [("O", lo, hi) for lo, hi in report.outcome_intervals]
    rows += [("G", lo, hi) for lo, hi in report.germ_intervals]
    write_csv(os.path.join(outdir, "resonance_sets.csv"),
              ["set", "lo", "hi"], rows)
    outputs.append("resonance_sets.csv")

    write_csv(os.path.join(outdir, "resonance_verdict.csv"),
              ["c_s", "n_resonance_points", "C_R", "separated", "delta0"],
              [(report.c_s, report.n_points, report.C_R, report.separated,
                report.delta0)])
    outputs.append("resonance_verdict.csv")

    if cfg["resonance.with_clouds"]:
        rows = []
        for kind, clouds in (("S", report.s_clouds), ("T", report.t_clouds)):
            for spec in sorted(clouds, key=lambda s: s.label(report.c_s)):
                for s, r in clouds[spec]:
                    rows.append((spec.label(report.c_s), kind, s, r))
        write_csv(os.path.join(outdir, "resonance_clouds.csv"),
                  ["spec", "set", "s", "r"], rows)
        outputs.append("resonance_clouds.csv")
    return "completed", outputs


# ---------------------------------------------------------------------------
# phase-bound
# ---------------------------------------------------------------------------

def _run_phase_bound(cfg, outdir):
    s_max = cfg["phase_bound.s_max"] or None
    result = verify_phase_lower_bound(
        cfg["physical.c_s"], cfg["phase_bound.c_r"], cfg["phase_bound.c0"],
        step=cfg["phase_bound.step"], s_max=s_max)
    write_csv(os.path.join(outdir, "phase_bound.csv"),
              ["c_s", "C_R", "C0", "min_phi", "bound", "pass"],
              [(result["c_s"], result["C_R"], result["C0"],
                result["min_phi"], result["bound"], result["passed"])])
    rows = [(spec.label(cfg["physical.c_s"]), rec["min_phi"],
             rec["sign_definite"])
            for spec, rec in sorted(result["per_phase"].items(),
                                    key=lambda kv: kv[0].label(cfg["physical.c_s"]))]
    write_csv(os.path.join(outdir, "phase_bound_per_phase.csv"),
              ["spec", "min_phi", "sign_definite"], rows)
    return "completed", ["phase_bound.csv", "phase_bound_per_phase.csv"]


# ---------------------------------------------------------------------------
# cs-sweep
# ---------------------------------------------------------------------------

def _sweep_one(args):
    c_s, search_radius, tol, seed_step = args
    rep = resonance_report(c_s, search_radius=search_radius, tol=tol,
                           seed_step=seed_step, with_clouds=False)
    return (c_s, rep.n_points, rep.C_R, _intervals_str(rep.outcome_intervals),
            _intervals_str(rep.germ_intervals), rep.separated, rep.delta0)


def _run_cs_sweep(cfg, outdir):
    jobs = [(c, cfg["resonance.search_radius"], cfg["resonance.tol"],
             cfg["resonance.seed_step"]) for c in cfg.floats("sweep.cs_values")]
    workers = cfg["sweep.workers"]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(job) for job in jobs]
    rows.sort(key=lambda row: row[0])
    write_csv(os.path.join(outdir, "cs_sweep.csv"),
              ["c_s", "n_resonance_points", "C_R", "O_intervals",
               "G_intervals", "separated", "delta0"], rows)
    return "completed", ["cs_sweep.csv"]


# ---------------------------------------------------------------------------
# scattering
# ---------------------------------------------------------------------------

def make_profile_forcing(grid, params, seed, amplitude):
    """Constant-in-profile forcing (a non-decaying source, negative control).

    In state variables the acoustic equation gains e^{it<D>_cs} f0, i.e. the
    profile derivative gains the fixed field f0, so profile increments grow
    linearly with the window length instead of converging.
    """
    rng = np.random.default_rng(seed)
    n = grid.n
    jx = grid.j1.reshape(n, 1, 1)
    jy = grid.j1.reshape(1, n, 1)
    jz = grid.j1.reshape(1, 1, n)
    band = (jx**2 + jy**2 + jz**2) <= (n / 8.0) ** 2
    f0 = grid.fft(rng.standard_normal((n, n, n))) * band
    f0[0, 0, 0] = 0.0
    w = 1.0 / grid.volume
    scale = amplitude / max(np.sqrt(w * np.sum(np.abs(f0) ** 2)), 1e-300)
    f0 *= scale
    zero_b = np.zeros((3, n, n, n), complex)
    phase = grid.bracket(params.c_s)

    def forcing(t):
        return np.exp(1j * t * phase) * f0, zero_b

    return forcing


def _run_scattering(cfg, outdir):
    grid, params = _grid_params(cfg)
    times = sorted(cfg.floats("scattering.times"))
    dt = cfg["integrator.dt"] or 0.05
    stride = max(int(round(times[0] / dt)), 1)
    icfg = IntegratorConfig(scheme="exponential-rk4", dt=dt, t_end=times[-1],
                            snapshot_stride=stride,
                            constraint_check_stride=cfg["integrator.constraint_check_stride"])
    state = random_state(grid, params, seed=cfg["ic.seed"],
                         amplitude=cfg["ic.amplitude"],
                         band_fraction=cfg["ic.band_fraction"])
    initial = diagonalize(state, params, tol=cfg["diagnostics.constraint_tol"])
    forcing = None
    if cfg["scattering.inject_forcing"]:
        forcing = make_profile_forcing(grid, params,
                                       seed=cfg["scattering.forcing_seed"],
                                       amplitude=cfg["ic.amplitude"] ** 2)
    traj = run(initial, icfg, params, forcing=forcing)
    if traj.status != "completed":
        return traj.status, []
    profiles = []
    for t in times:
        snap = traj.snapshot_at(t, tol=dt / 2.0)
        profiles.append(to_profiles(snap, params))
    result = scattering_check(profiles,
                              sobolev_index=cfg["diagnostics.sobolev_n"] - 2)
    rows = [(times[j], times[j + 1], inc)
            for j, inc in enumerate(result["increments"])]
    write_csv(os.path.join(outdir, "scattering_increments.csv"),
              ["t_lo", "t_hi", "increment_h_nm2"], rows)
    write_csv(os.path.join(outdir, "scattering_verdict.csv"),
              ["converging", "monotone", "final_over_first", "injected_forcing"],
              [(result["converging"], result["monotone"], result["ratio"],
                cfg["scattering.inject_forcing"])])
    return "completed", ["scattering_increments.csv", "scattering_verdict.csv"]
