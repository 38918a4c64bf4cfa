import numpy as np
import pytest

from isingquench.lattice import (
    LatticeGeometry,
    SpinConfiguration,
    bond_energy,
    local_field_sum,
    neighbor_indices,
    neighbor_table,
    random_configuration,
    total_magnetization,
    uniform_configuration,
)


def coord_neighbors(d, L, site):
    """Independent coordinate-arithmetic oracle for the neighbor set."""
    coords = []
    s = site
    for _ in range(d):
        s, c = divmod(s, L)
        coords.append(c)
    coords = list(reversed(coords))
    out = []
    for axis in range(d):
        for step in (-1, +1):
            nb = list(coords)
            nb[axis] = (nb[axis] + step) % L
            idx = 0
            for c in nb:
                idx = idx * L + c
            out.append(idx)
    return out


def test_geometry_counts():
    geo = LatticeGeometry(d=3, L=4)
    assert geo.N == 64
    assert geo.n_bonds == 3 * 64


def test_geometry_validation():
    with pytest.raises(ValueError):
        LatticeGeometry(d=0, L=4)
    with pytest.raises(ValueError):
        LatticeGeometry(d=2, L=1)


def test_ring_neighbors_wrap():
    geo = LatticeGeometry(d=1, L=4)
    assert neighbor_indices(geo, 0) == [3, 1]


def test_center_neighbors_3x3():
    # center of a 3x3 lattice, order (-axis0, +axis0, -axis1, +axis1)
    geo = LatticeGeometry(d=2, L=3)
    assert neighbor_indices(geo, 4) == [1, 7, 3, 5]


def test_neighbors_match_coordinate_oracle():
    geo = LatticeGeometry(d=3, L=4)
    for site in range(geo.N):
        assert neighbor_indices(geo, site) == coord_neighbors(3, 4, site)


def test_neighbor_relation_symmetric():
    for d, L in ((2, 4), (3, 3), (4, 3)):
        geo = LatticeGeometry(d=d, L=L)
        nbrs = neighbor_table(geo)
        for site in range(geo.N):
            row = neighbor_indices(geo, site)
            assert len(row) == 2 * d
            assert len(set(row)) == 2 * d  # distinct for L >= 3
            for j in row:
                assert site in neighbor_indices(geo, j)


def test_neighbor_site_range_checked():
    geo = LatticeGeometry(d=2, L=3)
    with pytest.raises(ValueError):
        neighbor_indices(geo, 9)
    with pytest.raises(ValueError):
        neighbor_indices(geo, -1)


def test_magnetization_uniform_and_balanced():
    geo = LatticeGeometry(d=2, L=4)
    assert total_magnetization(uniform_configuration(geo)) == 16
    spins = np.array([1] * 8 + [-1] * 8, dtype=np.int8)
    assert total_magnetization(SpinConfiguration(geo, spins)) == 0


def test_magnetization_matches_resummation():
    rng = np.random.default_rng(7)
    config = random_configuration(LatticeGeometry(d=3, L=4), rng)
    assert total_magnetization(config) == sum(int(s) for s in config.spins)
    assert total_magnetization(config) % 2 == config.geometry.N % 2


def test_bond_energy_aligned():
    config = uniform_configuration(LatticeGeometry(d=3, L=4))
    assert bond_energy(config, J=1.0) == -192.0


def test_bond_energy_staggered_2d():
    geo = LatticeGeometry(d=2, L=4)
    spins = np.empty(geo.N, dtype=np.int8)
    for site in range(geo.N):
        r, c = divmod(site, geo.L)
        spins[site] = 1 if (r + c) % 2 == 0 else -1
    assert bond_energy(SpinConfiguration(geo, spins), J=1.0) == 32.0


def bond_enumeration_energy(config, J):
    """Oracle: enumerate all d*N bonds explicitly."""
    geo = config.geometry
    total = 0
    for site in range(geo.N):
        row = neighbor_indices(geo, site)
        for axis in range(geo.d):
            total += int(config.spins[site]) * int(config.spins[row[2 * axis + 1]])
    return -J * total


def test_bond_energy_matches_enumeration_oracle():
    rng = np.random.default_rng(3)
    for d, L in ((2, 4), (3, 3)):
        config = random_configuration(LatticeGeometry(d=d, L=L), rng)
        assert bond_energy(config, J=1.7) == pytest.approx(
            bond_enumeration_energy(config, 1.7), abs=1e-10
        )


def test_local_field_limits_and_oracle():
    rng = np.random.default_rng(5)
    up = uniform_configuration(LatticeGeometry(d=2, L=4))
    assert local_field_sum(up, 3) == 4
    down = uniform_configuration(LatticeGeometry(d=3, L=3), value=-1)
    assert local_field_sum(down, 0) == -6
    config = random_configuration(LatticeGeometry(d=3, L=4), rng)
    for site in (0, 17, 63):
        expected = sum(int(config.spins[j]) for j in neighbor_indices(config.geometry, site))
        assert local_field_sum(config, site) == expected
    with pytest.raises(ValueError):
        local_field_sum(config, config.geometry.N)


def test_single_flip_energy_identity():
    rng = np.random.default_rng(11)
    config = random_configuration(LatticeGeometry(d=2, L=4), rng)
    J = 1.3
    base = bond_energy(config, J)
    for site in range(config.geometry.N):
        flipped = config.copy()
        flipped.spins[site] = -flipped.spins[site]
        de = bond_energy(flipped, J) - base
        assert de == pytest.approx(2 * J * config.spins[site] * local_field_sum(config, site))


def test_global_flip_and_translation_invariance():
    rng = np.random.default_rng(13)
    geo = LatticeGeometry(d=2, L=4)
    config = random_configuration(geo, rng)
    e = bond_energy(config, 1.0)
    m = total_magnetization(config)
    mirrored = SpinConfiguration(geo, -config.spins)
    assert bond_energy(mirrored, 1.0) == e
    assert total_magnetization(mirrored) == -m
    grid = config.spins.reshape(geo.L, geo.L)
    for axis in (0, 1):
        shifted = SpinConfiguration(geo, np.roll(grid, 1, axis=axis).ravel())
        assert bond_energy(shifted, 1.0) == e


def test_spin_values_validated():
    geo = LatticeGeometry(d=1, L=4)
    with pytest.raises(ValueError):
        SpinConfiguration(geo, np.array([1, 0, 1, -1], dtype=np.int8))
    with pytest.raises(ValueError):
        SpinConfiguration(geo, np.ones(5, dtype=np.int8))
