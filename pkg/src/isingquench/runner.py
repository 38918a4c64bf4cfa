"""Seeded ensemble execution and the simulate/make-synthetic entry points.

Realizations are independent tasks distributed over a process pool;
results are reduced in realization-index order, so outputs are identical
for any worker count.  Each realization's stream is keyed by
(master seed, ensemble index, realization index).
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .classical import (
    ClassicalModelSpec,
    QuenchSchedule,
    default_equilibration_updates,
    ensemble_average,
    run_quench_realization,
)
from .config import ExperimentConfig
from .errors import ConfigError
from .io import write_series
from .lattice import LatticeGeometry
from .manifest import write_manifest
from .quantum import QuantumModelSpec, run_quantum_quench
from .scaling import CriticalConstants, derive_constants
from .series import EnsembleSeries, SeriesLabel
from .synthetic import make_synthetic_series

_CHUNK = 64  # realizations per worker task


def constants_from_config(config: ExperimentConfig) -> CriticalConstants:
    return derive_constants(
        family=config.family, d=config.d, eta=config.eta, z=config.z,
        J=config.J, critical_point=config.critical_point,
    )


def _run_chunk(args) -> tuple[int, np.ndarray]:
    spec, schedule, n_equil, stream_key, start, count = args
    rows = np.empty((count, len(schedule.record_times)), dtype=np.int64)
    for i in range(count):
        traj = run_quench_realization(spec, schedule, n_equil, (*stream_key, start + i))
        rows[i] = traj.M_values
    return start, rows


def run_classical_ensemble(
    spec: ClassicalModelSpec,
    schedule: QuenchSchedule,
    n_realizations: int,
    n_equil: int | None = None,
    stream_key: tuple[int, ...] = (0,),
    threads: int = 1,
) -> EnsembleSeries:
    """Ensemble-averaged <M^2(t)> from seeded parallel quench realizations."""
    if n_equil is None:
        n_equil = default_equilibration_updates(spec.geometry)
    chunks = [
        (spec, schedule, n_equil, stream_key, start, min(_CHUNK, n_realizations - start))
        for start in range(0, n_realizations, _CHUNK)
    ]
    n_workers = threads if threads >= 1 else (os.cpu_count() or 1)
    results: dict[int, np.ndarray] = {}
    if n_workers == 1 or len(chunks) == 1:
        for chunk in chunks:
            start, rows = _run_chunk(chunk)
            results[start] = rows
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for start, rows in pool.map(_run_chunk, chunks):
                results[start] = rows
    m_values = np.vstack([results[start] for start in sorted(results)])
    m2 = m_values.astype(np.float64) ** 2
    mean = m2.mean(axis=0)
    if n_realizations > 1:
        stderr = m2.std(axis=0, ddof=1) / np.sqrt(n_realizations)
    else:
        stderr = np.zeros_like(mean)
    label = SeriesLabel(
        family="classical", d=spec.geometry.d, L=spec.geometry.L, h=spec.h
    )
    return EnsembleSeries(
        label=label,
        times=np.asarray(schedule.record_times, dtype=np.float64),
        mean_M2=mean,
        stderr_M2=stderr,
        n_realizations=n_realizations,
        time_unit="t_MCS",
    )


def simulate_classical(config: ExperimentConfig, out_dir) -> Path:
    """Run the configured classical ensembles; write series files + manifest."""
    if config.family != "classical":
        raise ConfigError("[model] family: simulate-classical needs family = classical")
    constants = constants_from_config(config)
    out_dir = Path(out_dir)
    schedule = QuenchSchedule.log_spaced(
        int(round(config.t_max)), config.points_per_decade_time
    )
    t0 = time.perf_counter()
    files, counts = [], {}
    for ens_idx, (L, h) in enumerate(
        (L, h) for L in config.L_values for h in config.h_values
    ):
        spec = ClassicalModelSpec(
            geometry=LatticeGeometry(d=config.d, L=L),
            J=config.J,
            T=constants.critical_point * config.J,
            h=h,
        )
        series = run_classical_ensemble(
            spec, schedule, config.n_realizations,
            n_equil=config.n_equil,
            stream_key=(config.seed, ens_idx),
            threads=config.threads,
        )
        path = write_series(series, out_dir / f"{series.label.filename_stem()}.csv")
        files.append(path)
        counts[series.label.filename_stem()] = config.n_realizations
    write_manifest(out_dir, config, constants, files, counts,
                   wall_clock_seconds=time.perf_counter() - t0)
    return out_dir


def quantum_record_times(t_max: float, points_per_decade: int) -> np.ndarray:
    """0 plus log-spaced times (units 1/J) from ~t_max/100 up to t_max."""
    t_lo = min(0.1, t_max / 100.0)
    n = max(2, int(np.ceil(points_per_decade * np.log10(t_max / t_lo))) + 1)
    grid = np.geomspace(t_lo, t_max, n)
    return np.concatenate([[0.0], grid])


def simulate_quantum(config: ExperimentConfig, out_dir) -> Path:
    """Run the configured deterministic quantum quenches; write series + manifest."""
    if config.family != "quantum":
        raise ConfigError("[model] family: simulate-quantum needs family = quantum")
    constants = constants_from_config(config)
    out_dir = Path(out_dir)
    times = quantum_record_times(config.t_max, config.points_per_decade_time)
    t0 = time.perf_counter()
    files, counts = [], {}
    for L in config.L_values:
        for h in config.h_values:
            spec = QuantumModelSpec(
                geometry=LatticeGeometry(d=config.d, L=L),
                J=config.J,
                g=constants.critical_point * config.J,
                h=h,
            )
            series = run_quantum_quench(spec, times)
            path = write_series(series, out_dir / f"{series.label.filename_stem()}.csv")
            files.append(path)
            counts[series.label.filename_stem()] = 1
    write_manifest(out_dir, config, constants, files, counts,
                   wall_clock_seconds=time.perf_counter() - t0)
    return out_dir


def make_synthetic_files(config: ExperimentConfig, out_dir) -> Path:
    """Emit exactly-collapsing synthetic fixtures for the analysis pipeline."""
    constants = constants_from_config(config)
    out_dir = Path(out_dir)
    t0 = time.perf_counter()
    series_list = make_synthetic_series(
        constants,
        w_star=config.w_star,
        L_values=config.L_values,
        h_values=config.h_values,
        scaling_function=config.scaling_function,
        noise=config.noise,
        points_per_curve=config.points_per_curve,
        x_span=(config.x_lo, config.x_hi),
        seed=config.seed,
    )
    files, counts = [], {}
    for series in series_list:
        path = write_series(series, out_dir / f"{series.label.filename_stem()}.csv")
        files.append(path)
        counts[series.label.filename_stem()] = 1
    write_manifest(out_dir, config, constants, files, counts,
                   wall_clock_seconds=time.perf_counter() - t0)
    return out_dir
