"""Ensemble-averaged observable series: the central data product handed
from the simulation engines to the scaling/collapse analysis."""

from dataclasses import dataclass, field

import numpy as np

TIME_UNIT_SWEEPS = "t_MCS"
TIME_UNIT_JT = "Jt"
VALID_TIME_UNITS = (TIME_UNIT_SWEEPS, TIME_UNIT_JT)


@dataclass(frozen=True)
class SeriesLabel:
    """Identifies one (model family, dimension, size, field) curve."""

    family: str  # "classical" or "quantum"
    d: int
    L: int
    h: float

    def __post_init__(self):
        if self.family not in ("classical", "quantum"):
            raise ValueError(f"unknown model family {self.family!r}")

    def filename_stem(self) -> str:
        return f"series_{self.family}_d{self.d}_L{self.L:03d}_h{self.h:.6g}"


@dataclass(eq=False)
class EnsembleSeries:
    """<M^2(t)> versus time with standard errors and realization count.

    The time axis carries an explicit unit tag (Monte Carlo sweeps for
    classical runs, Jt for quantum runs) so the two families cannot be
    mixed silently in analysis.
    """

    label: SeriesLabel
    times: np.ndarray = field(repr=False)
    mean_M2: np.ndarray = field(repr=False)
    stderr_M2: np.ndarray = field(repr=False)
    n_realizations: int
    time_unit: str

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.mean_M2 = np.asarray(self.mean_M2, dtype=np.float64)
        self.stderr_M2 = np.asarray(self.stderr_M2, dtype=np.float64)
        if not (self.times.shape == self.mean_M2.shape == self.stderr_M2.shape):
            raise ValueError("times, mean_M2 and stderr_M2 must have equal length")
        if self.times.ndim != 1:
            raise ValueError("series arrays must be one-dimensional")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if np.any(self.stderr_M2 < 0):
            raise ValueError("stderr_M2 must be nonnegative")
        n_max = self.label.L ** self.label.d
        if np.any(self.mean_M2 < 0) or np.any(self.mean_M2 > n_max**2):
            raise ValueError("mean_M2 must lie in [0, N^2]")
        if self.time_unit not in VALID_TIME_UNITS:
            raise ValueError(f"time_unit must be one of {VALID_TIME_UNITS}")
