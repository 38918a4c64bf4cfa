import itertools
import math

import numpy as np
import pytest

from isingquench.classical import (
    ClassicalModelSpec,
    QuenchSchedule,
    Trajectory,
    ensemble_average,
    equilibrium_m2_samples,
    glauber_flip_table,
    glauber_sweep,
    realization_rng,
    run_quench_realization,
    wolff_bond_probability,
    wolff_equilibrate,
)
from isingquench.errors import ProtocolError
from isingquench.lattice import (
    LatticeGeometry,
    SpinConfiguration,
    bond_energy,
    random_configuration,
    total_magnetization,
)
from isingquench.series import SeriesLabel

T_C_3D = 4.5115


def spec_2x2(T=3.0, h=0.0):
    return ClassicalModelSpec(LatticeGeometry(d=2, L=2), J=1.0, T=T, h=h)


def test_spec_validation_and_beta():
    spec = ClassicalModelSpec(LatticeGeometry(d=3, L=4), J=1.0, T=T_C_3D, h=0.1)
    assert spec.beta * spec.T == 1.0
    with pytest.raises(ValueError):
        ClassicalModelSpec(LatticeGeometry(d=2, L=4), J=1.0, T=2.0, h=-0.1)
    with pytest.raises(ValueError):
        ClassicalModelSpec(LatticeGeometry(d=2, L=4), J=-1.0, T=2.0)


def test_wolff_bond_probability_at_tc():
    spec = ClassicalModelSpec(LatticeGeometry(d=3, L=4), J=1.0, T=T_C_3D)
    assert wolff_bond_probability(spec) == pytest.approx(1 - math.exp(-2 / T_C_3D))
    assert wolff_bond_probability(spec) == pytest.approx(0.3581, abs=2e-4)


def test_glauber_rates():
    spec = ClassicalModelSpec(LatticeGeometry(d=3, L=4), J=1.0, T=T_C_3D, h=0.0)
    table = glauber_flip_table(spec)
    twod = 6
    for s in (-1, 1):
        for m_idx in range(twod + 1):
            m = -twod + 2 * m_idx
            dE = 2 * s * (spec.J * m)
            expected = 1.0 / (1.0 + math.exp(spec.beta * dE))
            assert table[((s + 1) >> 1) * (twod + 1) + m_idx] == pytest.approx(expected)
    # balanced neighborhood: dE = 0 at m = 0, h = 0
    assert table[0 * 7 + 3] == 0.5
    assert table[1 * 7 + 3] == 0.5
    # aligned spin with all 6 neighbors up: dE = 12 J
    assert table[1 * 7 + 6] == pytest.approx(1 / (1 + math.exp(12 / T_C_3D)))
    assert table[1 * 7 + 6] == pytest.approx(0.0655, abs=2e-4)


def test_glauber_degenerate_rate_is_half():
    # with 2d even neighbor sums, dE = 0 occurs at m = 0, h = 0
    spec = ClassicalModelSpec(LatticeGeometry(d=2, L=4), J=1.0, T=2.0, h=0.0)
    table = glauber_flip_table(spec)
    assert table[0 * 5 + 2] == 0.5  # s = -1, m = 0
    assert table[1 * 5 + 2] == 0.5  # s = +1, m = 0


def test_detailed_balance_identity():
    spec = ClassicalModelSpec(LatticeGeometry(d=3, L=4), J=1.0, T=T_C_3D, h=0.3)
    table = glauber_flip_table(spec)
    twod = 6
    for s in (-1, 1):
        for m_idx in range(twod + 1):
            m = -twod + 2 * m_idx
            dE = 2 * s * (spec.J * m + spec.h)
            p_fwd = table[((s + 1) >> 1) * (twod + 1) + m_idx]
            p_rev = table[((-s + 1) >> 1) * (twod + 1) + m_idx]
            assert p_fwd / p_rev == pytest.approx(math.exp(-spec.beta * dE), rel=1e-12)


def test_wolff_requires_zero_field():
    spec = spec_2x2(h=0.1)
    rng = realization_rng(0, 0)
    config = random_configuration(spec.geometry, rng)
    with pytest.raises(ProtocolError):
        wolff_equilibrate(config, spec, 10, rng)


def test_wolff_infinite_temperature_single_site_clusters():
    # beta -> 0 gives p_add -> 0: every cluster is one site
    spec = ClassicalModelSpec(LatticeGeometry(d=2, L=4), J=1.0, T=1e12)
    assert wolff_bond_probability(spec) == pytest.approx(0.0, abs=1e-11)


def enumerate_gibbs(spec):
    """Exact Gibbs weights over all 2^N states of a tiny lattice."""
    geo = spec.geometry
    weights = {}
    for assignment in itertools.product((-1, 1), repeat=geo.N):
        config = SpinConfiguration(geo, np.array(assignment, dtype=np.int8))
        energy = bond_energy(config, spec.J) - spec.h * total_magnetization(config)
        weights[assignment] = math.exp(-spec.beta * energy)
    total = sum(weights.values())
    return {k: v / total for k, v in weights.items()}


def state_key(spins):
    return tuple(int(s) for s in spins)


@pytest.mark.parametrize("update", ["glauber", "wolff"])
def test_tiny_lattice_samples_exact_gibbs(update):
    """Long runs on a 2x2 lattice match the enumerated Gibbs distribution."""
    from isingquench import kernels
    from isingquench.lattice import neighbor_table

    spec = spec_2x2(T=3.0)
    exact = enumerate_gibbs(spec)
    nbrs = neighbor_table(spec.geometry)
    rng = realization_rng(2024, 0 if update == "glauber" else 1)
    config = random_configuration(spec.geometry, rng)
    table = glauber_flip_table(spec)
    p_add = wolff_bond_probability(spec)
    counts: dict = {}
    n_steps = 60_000
    for _ in range(n_steps):
        if update == "glauber":
            kernels.glauber_sweeps(config.spins, nbrs, table, 1, rng)
        else:
            kernels.wolff_updates(config.spins, nbrs, p_add, 1, rng)
        key = state_key(config.spins)
        counts[key] = counts.get(key, 0) + 1
    for key, p in exact.items():
        observed = counts.get(key, 0) / n_steps
        # 3 standard errors, inflated x3 for autocorrelation
        sigma = math.sqrt(p * (1 - p) / n_steps)
        assert abs(observed - p) < 9 * sigma + 1e-4, f"state {key}"


def test_schedule_log_spaced():
    sched = QuenchSchedule.log_spaced(100, points_per_decade=10)
    assert sched.record_times[0] == 0
    assert sched.record_times[-1] == 100
    assert sched.t_max == 100
    assert all(b > a for a, b in zip(sched.record_times, sched.record_times[1:]))
    with pytest.raises(ValueError):
        QuenchSchedule((1, 2, 3))
    with pytest.raises(ValueError):
        QuenchSchedule((0, 2, 2))


def test_identical_seeds_give_bit_identical_trajectories():
    spec = ClassicalModelSpec(LatticeGeometry(d=2, L=6), J=1.0, T=2.27, h=0.2)
    schedule = QuenchSchedule.log_spaced(20)
    t1 = run_quench_realization(spec, schedule, n_equil=30, seed=(7, 3))
    t2 = run_quench_realization(spec, schedule, n_equil=30, seed=(7, 3))
    assert np.array_equal(t1.M_values, t2.M_values)
    t3 = run_quench_realization(spec, schedule, n_equil=30, seed=(7, 4))
    assert not np.array_equal(t1.M_values, t3.M_values)


def test_trajectory_m2_is_square_of_m():
    spec = ClassicalModelSpec(LatticeGeometry(d=2, L=4), J=1.0, T=2.27, h=0.1)
    traj = run_quench_realization(spec, QuenchSchedule.log_spaced(10), 20, seed=1)
    assert np.array_equal(traj.M2_values, traj.M_values.astype(float) ** 2)


def test_ensemble_average_single_and_pair():
    schedule = QuenchSchedule((0, 1))
    label = SeriesLabel("classical", 2, 4, 0.1)
    t1 = Trajectory(schedule, np.array([4, 2]), seed=(0,))
    series = ensemble_average([t1], label)
    assert np.array_equal(series.mean_M2, [16.0, 4.0])
    assert np.array_equal(series.stderr_M2, [0.0, 0.0])
    t2 = Trajectory(schedule, np.array([2, 0]), seed=(1,))
    series = ensemble_average([t1, t2], label)
    assert np.array_equal(series.mean_M2, [(16 + 4) / 2, 2.0])
    assert series.stderr_M2[0] == pytest.approx(abs(16 - 4) / 2)
    assert series.stderr_M2[1] == pytest.approx(abs(4 - 0) / 2)


def test_ensemble_average_matches_brute_force():
    rng = np.random.default_rng(0)
    schedule = QuenchSchedule((0, 1, 2))
    label = SeriesLabel("classical", 2, 4, 0.0)
    trajectories = [
        Trajectory(schedule, rng.integers(-16, 17, size=3), seed=(i,)) for i in range(100)
    ]
    series = ensemble_average(trajectories, label)
    m2 = np.array([t.M2_values for t in trajectories])
    assert series.mean_M2 == pytest.approx(m2.mean(axis=0))
    assert series.stderr_M2 == pytest.approx(m2.std(axis=0, ddof=1) / 10.0)


def test_ensemble_average_rejects_mismatched_schedules():
    t1 = Trajectory(QuenchSchedule((0, 1)), np.array([0, 0]), seed=(0,))
    t2 = Trajectory(QuenchSchedule((0, 2)), np.array([0, 0]), seed=(1,))
    with pytest.raises(ValueError):
        ensemble_average([t1, t2], SeriesLabel("classical", 2, 4, 0.0))


def test_zero_field_ensemble_is_stationary_and_symmetric():
    """Detailed balance: with h = 0 the Wolff-prepared ensemble is left
    statistically invariant by Glauber evolution, and <M> stays 0."""
    spec = ClassicalModelSpec(LatticeGeometry(d=2, L=8), J=1.0, T=2.269, h=0.0)
    schedule = QuenchSchedule((0, 30))
    n = 600
    m = np.empty((n, 2))
    for i in range(n):
        traj = run_quench_realization(spec, schedule, n_equil=160, seed=(555, i))
        m[i] = traj.M_values
    m2 = m**2
    mean0, mean1 = m2.mean(axis=0)
    err = np.hypot(*(m2.std(axis=0, ddof=1) / math.sqrt(n)))
    assert abs(mean1 - mean0) < 3 * err
    for col in range(2):
        m_err = m[:, col].std(ddof=1) / math.sqrt(n)
        assert abs(m[:, col].mean()) < 3 * m_err


def test_glauber_sweep_value_semantics():
    spec = ClassicalModelSpec(LatticeGeometry(d=2, L=4), J=1.0, T=2.5, h=0.1)
    rng = realization_rng(1, 0)
    config = random_configuration(spec.geometry, rng)
    before = config.spins.copy()
    out = glauber_sweep(config, spec, rng)
    assert np.array_equal(config.spins, before)
    assert out is not config


def test_equilibrium_sampler_validates():
    spec = spec_2x2(h=0.2)
    with pytest.raises(ProtocolError):
        equilibrium_m2_samples(spec, 10, realization_rng(0, 0))
