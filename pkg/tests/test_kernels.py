"""Backend contract: the compiled core and the pure-Python fallback must
produce bit-identical trajectories from the same generator state."""

import numpy as np
import pytest

from isingquench import kernels
from isingquench.classical import (
    ClassicalModelSpec,
    glauber_flip_table,
    wolff_bond_probability,
)
from isingquench.kernels import _mc_py
from isingquench.lattice import LatticeGeometry, neighbor_table, random_configuration

needs_cython = pytest.mark.skipif(
    kernels.BACKEND != "cython", reason="compiled kernel backend not available"
)


def _rng(trial):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([99, trial])))


@needs_cython
@pytest.mark.parametrize("d,L", [(1, 8), (2, 5), (3, 4)])
def test_glauber_backends_bit_identical(d, L):
    from isingquench.kernels import _mc

    geo = LatticeGeometry(d=d, L=L)
    spec = ClassicalModelSpec(geo, J=1.0, T=3.0, h=0.2)
    nbrs = neighbor_table(geo)
    table = glauber_flip_table(spec)
    for trial in range(3):
        r1, r2 = _rng(trial), _rng(trial)
        c1 = random_configuration(geo, r1)
        c2 = random_configuration(geo, r2)
        _mc.glauber_sweeps(c1.spins, nbrs, table, 25, r1)
        _mc_py.glauber_sweeps(c2.spins, nbrs, table, 25, r2)
        assert np.array_equal(c1.spins, c2.spins)
        # streams must also be in the same state afterwards
        assert r1.random() == r2.random()


@needs_cython
@pytest.mark.parametrize("d,L", [(2, 5), (3, 4)])
def test_wolff_backends_bit_identical(d, L):
    from isingquench.kernels import _mc

    geo = LatticeGeometry(d=d, L=L)
    spec = ClassicalModelSpec(geo, J=1.0, T=2.5, h=0.0)
    nbrs = neighbor_table(geo)
    p_add = wolff_bond_probability(spec)
    for trial in range(3):
        r1, r2 = _rng(trial), _rng(trial)
        c1 = random_configuration(geo, r1)
        c2 = random_configuration(geo, r2)
        f1 = _mc.wolff_updates(c1.spins, nbrs, p_add, 40, r1)
        f2 = _mc_py.wolff_updates(c2.spins, nbrs, p_add, 40, r2)
        assert f1 == f2
        assert np.array_equal(c1.spins, c2.spins)
        assert r1.random() == r2.random()


def test_glauber_preserves_spin_values():
    geo = LatticeGeometry(d=2, L=4)
    spec = ClassicalModelSpec(geo, J=1.0, T=2.0, h=0.5)
    rng = _rng(0)
    config = random_configuration(geo, rng)
    kernels.glauber_sweeps(config.spins, neighbor_table(geo), glauber_flip_table(spec), 10, rng)
    assert set(np.unique(config.spins)) <= {-1, 1}


def test_wolff_flips_whole_cluster():
    # at p_add = 1 every aligned component flips: from all-up, one update
    # flips the entire lattice
    geo = LatticeGeometry(d=2, L=4)
    rng = _rng(1)
    spins = np.ones(geo.N, dtype=np.int8)
    flipped = kernels.wolff_updates(spins, neighbor_table(geo), 1.0, 1, rng)
    assert flipped == geo.N
    assert np.all(spins == -1)


def test_wolff_zero_padd_flips_single_site():
    geo = LatticeGeometry(d=2, L=4)
    rng = _rng(2)
    spins = np.ones(geo.N, dtype=np.int8)
    flipped = kernels.wolff_updates(spins, neighbor_table(geo), 0.0, 1, rng)
    assert flipped == 1
    assert np.sum(spins == -1) == 1
