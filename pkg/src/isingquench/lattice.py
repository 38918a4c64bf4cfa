"""Geometry, spin storage, and local/global observables for periodic
hypercubic Ising lattices in arbitrary dimension.

Site indexing is row-major over coordinates with axis 0 slowest, so a
site index maps to coordinates via repeated divmod by L.  This order is
fixed: trajectories must be reproducible bit-for-bit across runs.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class LatticeGeometry:
    """A d-dimensional periodic hypercubic lattice with L sites per axis.

    L = 2 is accepted for tests but degenerate: the two periodic
    neighbors along each axis coincide, giving double bonds.
    """

    d: int
    L: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.L < 2:
            raise ValueError(f"linear size must be >= 2, got {self.L}")

    @property
    def N(self) -> int:
        return self.L**self.d

    @property
    def n_bonds(self) -> int:
        return self.d * self.N

    def site_coords(self, site: int) -> tuple[int, ...]:
        """Coordinates of a site index, axis 0 slowest."""
        coords = []
        for _ in range(self.d):
            site, c = divmod(site, self.L)
            coords.append(c)
        return tuple(reversed(coords))

    def coords_site(self, coords) -> int:
        site = 0
        for c in coords:
            site = site * self.L + (c % self.L)
        return site


@lru_cache(maxsize=32)
def neighbor_table(geometry: LatticeGeometry) -> np.ndarray:
    """(N, 2d) int32 table of periodic neighbors.

    Column order: (-axis0, +axis0, -axis1, +axis1, ...).  The table is
    cached per geometry and must be treated as read-only.
    """
    shape = (geometry.L,) * geometry.d
    idx = np.arange(geometry.N, dtype=np.int32).reshape(shape)
    cols = []
    for axis in range(geometry.d):
        cols.append(np.roll(idx, 1, axis=axis).ravel())   # -step along axis
        cols.append(np.roll(idx, -1, axis=axis).ravel())  # +step along axis
    table = np.stack(cols, axis=1)
    table.setflags(write=False)
    return table


def neighbor_indices(geometry: LatticeGeometry, site: int) -> list[int]:
    """The 2d periodic neighbors of a site, in fixed (-/+ per axis) order."""
    if not 0 <= site < geometry.N:
        raise ValueError(f"site index {site} out of range for N={geometry.N}")
    return [int(j) for j in neighbor_table(geometry)[site]]


@dataclass
class SpinConfiguration:
    """A +-1 spin state on a lattice. Spins are stored as int8."""

    geometry: LatticeGeometry
    spins: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.spins = np.ascontiguousarray(self.spins, dtype=np.int8)
        if self.spins.shape != (self.geometry.N,):
            raise ValueError(
                f"spin array has shape {self.spins.shape}, expected ({self.geometry.N},)"
            )
        if not np.all(np.abs(self.spins) == 1):
            raise ValueError("spins must all be -1 or +1")

    def copy(self) -> "SpinConfiguration":
        return SpinConfiguration(self.geometry, self.spins.copy())


def uniform_configuration(geometry: LatticeGeometry, value: int = 1) -> SpinConfiguration:
    if value not in (-1, 1):
        raise ValueError("spin value must be -1 or +1")
    return SpinConfiguration(geometry, np.full(geometry.N, value, dtype=np.int8))


def random_configuration(geometry: LatticeGeometry, rng: np.random.Generator) -> SpinConfiguration:
    spins = (2 * rng.integers(0, 2, size=geometry.N) - 1).astype(np.int8)
    return SpinConfiguration(geometry, spins)


def total_magnetization(config: SpinConfiguration) -> int:
    """M = sum_i s_i; the order parameter of the quench protocol."""
    return int(config.spins.sum(dtype=np.int64))


def bond_energy(config: SpinConfiguration, J: float) -> float:
    """-J sum_<ij> s_i s_j with every periodic bond counted once.

    Bonds are enumerated as (site, +axis neighbor) for each axis, so for
    L = 2 the doubled periodic bonds are both counted, matching the
    neighbor table used by the dynamics.
    """
    if J <= 0:
        raise ValueError(f"coupling J must be positive, got {J}")
    s = config.spins.astype(np.int64)
    nbrs = neighbor_table(config.geometry)
    aligned = 0
    for axis in range(config.geometry.d):
        aligned += int(np.dot(s, s[nbrs[:, 2 * axis + 1]]))
    return -J * aligned


def local_field_sum(config: SpinConfiguration, site: int) -> int:
    """Sum of the 2d neighboring spins of a site; in [-2d, +2d]."""
    if not 0 <= site < config.geometry.N:
        raise ValueError(f"site index {site} out of range for N={config.geometry.N}")
    return int(config.spins[neighbor_table(config.geometry)[site]].sum(dtype=np.int64))
