"""Series persistence: CSV tables with a JSON metadata sidecar per file.

CSV format: comma-separated, '.' decimal, UTF-8, mandatory header
``time,mean_M2,stderr_M2,n``.  Floats are written with shortest
round-trip precision so identical runs produce identical bytes.
"""

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AnalysisError
from .series import EnsembleSeries, SeriesLabel

SERIES_HEADER = ["time", "mean_M2", "stderr_M2", "n"]


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".meta.json")


def write_series(series: EnsembleSeries, csv_path) -> Path:
    """Write one series as CSV plus its metadata sidecar."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SERIES_HEADER)
        for t, m2, err in zip(series.times, series.mean_M2, series.stderr_M2):
            writer.writerow([repr(float(t)), repr(float(m2)), repr(float(err)),
                             series.n_realizations])
    meta = {
        "schema": "isingquench-series-v1",
        "family": series.label.family,
        "d": series.label.d,
        "L": series.label.L,
        "h": series.label.h,
        "time_unit": series.time_unit,
        "n_realizations": series.n_realizations,
        "code_version": __version__,
    }
    with open(sidecar_path(csv_path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path


def read_series(csv_path) -> EnsembleSeries:
    """Load a series CSV together with its sidecar metadata."""
    csv_path = Path(csv_path)
    side = sidecar_path(csv_path)
    if not side.exists():
        raise AnalysisError(f"series file {csv_path} has no metadata sidecar {side.name}")
    with open(side, encoding="utf-8") as fh:
        meta = json.load(fh)
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SERIES_HEADER:
            raise AnalysisError(
                f"{csv_path}: expected header {','.join(SERIES_HEADER)}, got {','.join(header)}"
            )
        rows = [(float(r[0]), float(r[1]), float(r[2]), int(r[3])) for r in reader]
    if not rows:
        raise AnalysisError(f"{csv_path}: no data rows")
    times, mean, stderr, counts = (np.array(col) for col in zip(*rows))
    label = SeriesLabel(family=meta["family"], d=int(meta["d"]),
                        L=int(meta["L"]), h=float(meta["h"]))
    return EnsembleSeries(
        label=label,
        times=times,
        mean_M2=mean,
        stderr_M2=stderr,
        n_realizations=int(counts[0]),
        time_unit=meta["time_unit"],
    )


def collect_series_paths(inputs) -> list[Path]:
    """Expand files and directories into a sorted list of series CSVs."""
    paths: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.glob("series_*.csv")))
        elif p.suffix == ".csv":
            paths.append(p)
        else:
            raise AnalysisError(f"{p}: not a series CSV or directory")
    if not paths:
        raise AnalysisError("no series files found in the given inputs")
    return paths
