"""Experiment drivers: single runs, refinement studies, stability raster, timing."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .. import cnfd, ssfm
from ..cnfd import StepFailure, steps_for
from ..diagnostics import (ConvergenceReport, TimeSeriesRecord, amplitude_theory,
                           conservation_errors, discrete_energy, relative_errors)
from ..grid import Field, Grid2D, grid_from_spacing, mass, norm
from ..groundstate import (GroundStateResult, SolitonICParams, aitem_solve,
                           build_soliton_ic, gaussian_vortex_ic,
                           gaussian_vortex_invariants, sech_seed)
from ..linsolve import NoConvergence
from .config import ConfigError, ExperimentConfig, check_ladder
from .snapshot import read_snapshot, write_snapshot

CONVERGENCE_COLUMNS = ("t", "h", "tau", "E2", "rate2", "E1", "rate1")
CONSERVATION_COLUMNS = ("t", "h", "tau", "E_mass", "E_energy", "rate")
STABILITY_COLUMNS = ("h", "tau", "E2", "band")
TIMING_COLUMNS = ("scheme", "h", "tau", "seconds")
TIMESERIES_COLUMNS = TimeSeriesRecord.COLUMNS
AMPLITUDE_COLUMNS = ("t", "A_numerical", "A_theory", "rel_dev")
GROUNDSTATE_COLUMNS = ("mu", "power", "residual", "iterations")


class CellTimeout(RuntimeError):
    pass


class LevelFailure(RuntimeError):
    """A solver failure inside one level of a refinement study."""


@dataclass(frozen=True)
class ConservationRow:
    t: float
    h: float
    tau: float
    mass_error: float
    energy_error: float
    rate: float


@dataclass(frozen=True)
class StabilityCell:
    h: float
    tau: float
    e2: float
    band: str


@dataclass(frozen=True)
class TimingRow:
    scheme: str
    h: float
    tau: float
    seconds: float


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _out_dir(cfg: ExperimentConfig, out) -> Path:
    p = Path(cfg.out if out is None else out)
    p.mkdir(parents=True, exist_ok=True)
    return p


# -- grids and initial data ---------------------------------------------------


def level_grid(cfg: ExperimentConfig, h: float) -> Grid2D:
    try:
        return grid_from_spacing(*cfg.domain, h)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


_GS_CACHE: Dict[tuple, GroundStateResult] = {}


def ground_state(cfg: ExperimentConfig, grid: Grid2D) -> GroundStateResult:
    """Ground state on the run grid, or on [-w, w]^2 with spacing gs_h when configured."""
    if cfg.gs_h is None and cfg.gs_half_width is None:
        gs_grid = grid
    else:
        w = 20.0 if cfg.gs_half_width is None else cfg.gs_half_width
        gs_grid = grid_from_spacing(-w, w, -w, w, grid.h if cfg.gs_h is None else cfg.gs_h)
    key = (gs_grid, cfg.lambda_, cfg.nu, cfg.gs_power, cfg.gs_tol, cfg.gs_maxiter,
           cfg.gs_shift, cfg.gs_dt)
    if key not in _GS_CACHE:
        _GS_CACHE[key] = aitem_solve(gs_grid, cfg.coeffs, cfg.gs_power, sech_seed(gs_grid),
                                     cfg.gs_tol, cfg.gs_maxiter, cfg.gs_shift, cfg.gs_dt)
    return _GS_CACHE[key]


def soliton_params(cfg: ExperimentConfig) -> SolitonICParams:
    return SolitonICParams(cfg.A0, cfg.x0, cfg.y0, cfg.d1, cfg.d2, cfg.alpha0)


def initial_condition(cfg: ExperimentConfig, grid: Grid2D) -> Field:
    if cfg.ic == "gaussian-vortex":
        return gaussian_vortex_ic(grid)
    if cfg.ic == "soliton":
        return build_soliton_ic(ground_state(cfg, grid).profile, soliton_params(cfg), grid)
    if cfg.ic == "file":
        u, _ = read_snapshot(cfg.ic_file)
        if u.grid != grid:
            raise ConfigError(f"snapshot grid {u.grid} does not match the run grid {grid}")
        return u
    rng = np.random.default_rng(cfg.seed)
    z = rng.standard_normal((grid.J - 1, grid.K - 1, 2)) @ np.array([1.0, 1j])
    return Field.from_interior(grid, cfg.random_amplitude * z)


def _sample_steps(times: Sequence[float], tau: float) -> Dict[int, float]:
    try:
        return {steps_for(t, tau): t for t in times}
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _params(cfg: ExperimentConfig, tau: float, t_final: Optional[float] = None):
    try:
        p = cfg.solver_params(tau, t_final)
        p.n_steps
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return p


def _map(cfg: ExperimentConfig, fn, args: List[tuple]) -> list:
    if cfg.workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(fn, *a) for a in args]
            return [f.result() for f in futures]
    return [fn(*a) for a in args]


def reference_tau(cfg: ExperimentConfig, taus: Sequence[float]) -> float:
    return cfg.ref_tau if cfg.ref_tau is not None else min(taus) / cfg.ref_factor


# -- single trajectories -----------------------------------------------------


def amplitude_series(record: TimeSeriesRecord, A0: float, mode: str = "peak") -> np.ndarray:
    """Numerical amplitude parameter: peak modulus (or sqrt of mass) relative to t = 0."""
    if mode == "peak":
        a = np.asarray(record.amplitude)
    elif mode == "mass":
        a = np.sqrt(np.asarray(record.mass))
    else:
        raise ValueError(f"unknown amplitude mode {mode!r}")
    return A0 * a / a[0]


def run_evolve(cfg: ExperimentConfig, out=None) -> TimeSeriesRecord:
    """CNFD trajectory on the first (h, tau) level; time series, snapshots, amplitude law."""
    out = _out_dir(cfg, out)
    h, tau = cfg.h[0], cfg.tau[0]
    grid = level_grid(cfg, h)
    u0 = initial_condition(cfg, grid)
    params = _params(cfg, tau)
    samples = _sample_steps(cfg.times, tau)
    coeffs = cfg.coeffs
    rec = TimeSeriesRecord()
    rec.record(0.0, u0, coeffs)
    write_snapshot(out / "snapshot_t0.cqs", u0, 0.0)

    def observer(n, u, report):
        rec.record(n * tau, u, coeffs, report.fixed_point_iters)
        if n in samples:
            write_snapshot(out / f"snapshot_n{n}.cqs", u, samples[n])

    cnfd.evolve(u0, params, observer)
    write_csv(out / "timeseries.csv", TIMESERIES_COLUMNS, rec.rows())
    if cfg.ic == "soliton":
        write_csv(out / "amplitude.csv", AMPLITUDE_COLUMNS, amplitude_rows(cfg, grid, rec))
    return rec


def amplitude_rows(cfg: ExperimentConfig, grid: Grid2D, rec: TimeSeriesRecord):
    v0 = ground_state(cfg, grid).profile
    a_num = amplitude_series(rec, cfg.A0, cfg.amplitude)
    a_th = amplitude_theory(np.asarray(rec.times), cfg.A0, cfg.epsilon, v0)
    dev = np.abs(a_num - a_th) / a_th
    return list(zip(rec.times, a_num, a_th, dev))


def run_ssfm_ref(cfg: ExperimentConfig, out=None) -> TimeSeriesRecord:
    """Split-step reference trajectory on the first (h, tau) level."""
    out = _out_dir(cfg, out)
    h, tau = cfg.h[0], cfg.tau[0]
    grid = level_grid(cfg, h)
    u0 = initial_condition(cfg, grid)
    params = _params(cfg, tau)
    samples = _sample_steps(cfg.times, tau)
    coeffs = cfg.coeffs
    rec = TimeSeriesRecord()
    rec.record(0.0, u0, coeffs)

    def observer(n, u):
        rec.record(n * tau, u, coeffs)
        if n in samples:
            write_snapshot(out / f"ssfm_n{n}.cqs", u, samples[n])

    ssfm.evolve_ssfm(u0, params, ssfm.make_plan(grid), observer)
    write_csv(out / "timeseries.csv", TIMESERIES_COLUMNS, rec.rows())
    return rec


def run_groundstate(cfg: ExperimentConfig, out=None) -> GroundStateResult:
    out = _out_dir(cfg, out)
    res = ground_state(cfg, level_grid(cfg, cfg.h[0]))
    write_snapshot(out / "groundstate.cqs", res.profile, 0.0)
    write_csv(out / "groundstate.csv", GROUNDSTATE_COLUMNS,
              [(res.mu, res.power, res.residual, res.iterations)])
    return res


# -- refinement studies ------------------------------------------------------


def _cnfd_samples(cfg: ExperimentConfig, u0: Field, tau: float, times) -> Dict[float, Field]:
    samples = _sample_steps(times, tau)
    got: Dict[float, Field] = {}

    def observer(n, u, report):
        if n in samples:
            got[samples[n]] = u

    cnfd.evolve(u0, _params(cfg, tau, max(times)), observer)
    return got


def _ssfm_samples(cfg: ExperimentConfig, u0: Field, tau: float, times) -> Dict[float, Field]:
    samples = _sample_steps(times, tau)
    got: Dict[float, Field] = {}

    def observer(n, u):
        if n in samples:
            got[samples[n]] = u

    ssfm.evolve_ssfm(u0, _params(cfg, tau, max(times)), ssfm.make_plan(u0.grid), observer)
    return got


def convergence_level(cfg: ExperimentConfig, h: float, tau: float,
                      ref_tau: float) -> Dict[float, Tuple[float, float]]:
    grid = level_grid(cfg, h)
    u0 = initial_condition(cfg, grid)
    times = cfg.times
    try:
        num = _cnfd_samples(cfg, u0, tau, times)
    except (StepFailure, NoConvergence) as exc:
        raise LevelFailure(f"level h={h}, tau={tau}: {exc}") from exc
    ref = _ssfm_samples(cfg, u0, ref_tau, times)
    return {t: relative_errors(num[t], ref[t]) for t in times}


def convergence_reports(cfg: ExperimentConfig) -> Dict[float, ConvergenceReport]:
    check_ladder(cfg.h, cfg.tau)
    ref_tau = reference_tau(cfg, cfg.tau)
    errs = _map(cfg, convergence_level, [(cfg, h, tau, ref_tau) for h, tau in cfg.levels])
    return {t: ConvergenceReport(cfg.levels, [e[t][0] for e in errs], [e[t][1] for e in errs])
            for t in cfg.times}


def run_convergence_study(cfg: ExperimentConfig, out=None) -> ConvergenceReport:
    """CNFD errors against the split-step reference over an (h, tau) ladder.

    Writes convergence.csv with one row per (sample time, level) and returns
    the report at the final sample time.
    """
    out = _out_dir(cfg, out)
    reports = convergence_reports(cfg)
    rows = [(t, *r) for t, rep in reports.items() for r in rep.rows()]
    write_csv(out / "convergence.csv", CONVERGENCE_COLUMNS, rows)
    return reports[cfg.times[-1]]


def continuous_invariants(cfg: ExperimentConfig) -> Tuple[float, float]:
    """Mass and energy of the continuous initial datum.

    Closed forms for the Gaussian vortex; otherwise discrete sums on a grid
    four times finer than the finest level.
    """
    if cfg.ic == "gaussian-vortex":
        return gaussian_vortex_invariants(cfg.coeffs)
    fine = level_grid(cfg, min(cfg.h) / 4)
    u = initial_condition(cfg, fine)
    return mass(u), discrete_energy(u, cfg.coeffs)


def conservation_level(cfg: ExperimentConfig, h: float, tau: float, times,
                       ref: Tuple[float, float]) -> Dict[float, Tuple[float, float]]:
    u0 = initial_condition(cfg, level_grid(cfg, h))
    try:
        got = _cnfd_samples(cfg, u0, tau, times)
    except (StepFailure, NoConvergence) as exc:
        raise LevelFailure(f"level h={h}, tau={tau}: {exc}") from exc
    return {t: conservation_errors(got[t], ref[0], ref[1], cfg.coeffs) for t in times}


def run_conservation_study(cfg: ExperimentConfig, out=None) -> List[ConservationRow]:
    """Mass/energy errors against the continuous invariants for the undamped problem."""
    if cfg.epsilon != 0:
        raise ConfigError("the conservation study requires epsilon = 0")
    check_ladder(cfg.h, cfg.tau)
    out = _out_dir(cfg, out)
    times = cfg.times if cfg.sample_times else [cfg.t_final * q for q in (0.25, 0.5, 0.75, 1.0)]
    ref = continuous_invariants(cfg)
    errs = _map(cfg, conservation_level, [(cfg, h, tau, times, ref) for h, tau in cfg.levels])
    rows = []
    n = len(cfg.levels)
    for t in times:
        for i, (h, tau) in enumerate(cfg.levels):
            em, ee = errs[i][t]
            rate = math.log2(ee / errs[i + 1][t][1]) if i < n - 1 else math.nan
            rows.append(ConservationRow(t, h, tau, em, ee, rate))
    write_csv(out / "conservation.csv", CONSERVATION_COLUMNS,
              [(r.t, r.h, r.tau, r.mass_error, r.energy_error, r.rate) for r in rows])
    return rows


# -- stability raster ------------------------------------------------------------


def band_of(e2: float) -> str:
    if not math.isfinite(e2):
        return "diverged"
    if e2 <= 0.05:
        return "<=0.05"
    if e2 <= 0.1:
        return "<=0.1"
    if e2 <= 0.5:
        return "<=0.5"
    return ">0.5"


def stability_row(cfg: ExperimentConfig, h: float, taus: Sequence[float],
                  ref_tau: float) -> List[StabilityCell]:
    grid = level_grid(cfg, h)
    u0 = initial_condition(cfg, grid)
    ref = ssfm.evolve_ssfm(u0, _params(cfg, ref_tau), ssfm.make_plan(grid))
    cells = []
    for tau in taus:
        deadline = time.monotonic() + cfg.cell_timeout

        def watchdog(n, u, report):
            if time.monotonic() > deadline:
                raise CellTimeout()

        try:
            u = cnfd.evolve(u0, _params(cfg, tau), watchdog)
            e2 = relative_errors(u, ref)[0]
            cells.append(StabilityCell(h, tau, e2, band_of(e2)))
        except CellTimeout:
            cells.append(StabilityCell(h, tau, math.nan, "timeout"))
        except (StepFailure, NoConvergence, FloatingPointError):
            cells.append(StabilityCell(h, tau, math.nan, "diverged"))
    return cells


def run_stability_map(cfg: ExperimentConfig, out=None) -> List[StabilityCell]:
    """Relative error band for every (h, tau) in the raster cfg.h x cfg.tau at t_final."""
    if not cfg.h or not cfg.tau:
        raise ConfigError("empty (h, tau) range")
    for tau in cfg.tau:
        _params(cfg, tau)
    out = _out_dir(cfg, out)
    ref_tau = reference_tau(cfg, cfg.tau)
    _params(cfg, ref_tau)
    rows = _map(cfg, stability_row, [(cfg, h, cfg.tau, ref_tau) for h in cfg.h])
    cells = [c for row in rows for c in row]
    write_csv(out / "stabmap.csv", STABILITY_COLUMNS, [(c.h, c.tau, c.e2, c.band) for c in cells])
    return cells


# -- timing -------------------------------------------------------------------


def run_timing(cfg: ExperimentConfig, out=None) -> List[TimingRow]:
    """Wall-clock seconds of CNFD and split-step runs at matched (h, tau) up to t_final."""
    out = _out_dir(cfg, out)
    rows = []
    for h, tau in cfg.levels:
        grid = level_grid(cfg, h)
        u0 = initial_condition(cfg, grid)
        params = _params(cfg, tau)
        t0 = time.perf_counter()
        cnfd.evolve(u0, params)
        t1 = time.perf_counter()
        ssfm.evolve_ssfm(u0, params, ssfm.make_plan(grid))
        t2 = time.perf_counter()
        rows += [TimingRow("CNFD", h, tau, t1 - t0), TimingRow("SSFM", h, tau, t2 - t1)]
    write_csv(out / "timing.csv", TIMING_COLUMNS, [(r.scheme, r.h, r.tau, r.seconds) for r in rows])
    return rows


RUNNERS = {
    "evolve": run_evolve,
    "groundstate": run_groundstate,
    "converge": run_convergence_study,
    "conserve": run_conservation_study,
    "stabmap": run_stability_map,
    "ssfm-ref": run_ssfm_ref,
    "timing": run_timing,
}


def run_experiment(cfg: ExperimentConfig, out=None):
    return RUNNERS[cfg.experiment](cfg, out)
