"""Fast invariant battery behind the `validate` CLI subcommand.

Each check prints one PASS/FAIL line; the suite is meant to finish in
seconds and to catch broken installs (miscompiled kernels, RNG drift,
exponent-table typos) rather than to replace the full test suite.
"""

import math

import numpy as np

from . import kernels
from .classical import (
    ClassicalModelSpec,
    glauber_flip_table,
    wolff_bond_probability,
)
from .collapse import estimate_w, CollapseWindow
from .kernels import _mc_py
from .lattice import (
    LatticeGeometry,
    bond_energy,
    local_field_sum,
    neighbor_indices,
    neighbor_table,
    random_configuration,
    total_magnetization,
)
from .quantum import QuantumModelSpec, apply_hamiltonian, evolve, ground_state, measure_M2
from .scaling import DEFAULT_CONSTANTS, derive_constants
from .synthetic import make_synthetic_series


def _check_lattice() -> str | None:
    for d, L in ((1, 4), (2, 3), (3, 4), (4, 3)):
        geo = LatticeGeometry(d=d, L=L)
        if geo.N != L**d:
            return f"N != L^d for d={d}, L={L}"
        nbrs = neighbor_table(geo)
        for site in range(geo.N):
            row = neighbor_indices(geo, site)
            if len(row) != 2 * d:
                return f"site {site} has {len(row)} neighbors, expected {2*d}"
            if L >= 3 and len(set(row)) != 2 * d:
                return f"duplicate neighbors at site {site} for L={L}"
            for j in row:
                if site not in neighbor_indices(geo, j):
                    return f"neighbor relation not symmetric at ({site}, {j})"
    return None


def _check_flip_energy_identity() -> str | None:
    rng = np.random.default_rng(11)
    for d, L in ((2, 4), (3, 3)):
        geo = LatticeGeometry(d=d, L=L)
        config = random_configuration(geo, rng)
        e0 = bond_energy(config, J=1.3)
        for site in range(geo.N):
            flipped = config.copy()
            flipped.spins[site] = -flipped.spins[site]
            de = bond_energy(flipped, J=1.3) - e0
            expected = 2 * 1.3 * config.spins[site] * local_field_sum(config, site)
            if abs(de - expected) > 1e-9:
                return f"single-flip energy identity broken at site {site} (d={d})"
        mirrored = config.copy()
        np.negative(mirrored.spins, out=mirrored.spins)
        if bond_energy(mirrored, 1.3) != e0:
            return "bond energy not invariant under global flip"
        if total_magnetization(mirrored) != -total_magnetization(config):
            return "magnetization does not negate under global flip"
    return None


def _check_detailed_balance() -> str | None:
    spec = ClassicalModelSpec(LatticeGeometry(d=3, L=4), J=1.0, T=4.5115, h=0.2)
    twod = 6
    table = glauber_flip_table(spec)
    for s in (-1, 1):
        for m_idx in range(twod + 1):
            m = -twod + 2 * m_idx
            dE = 2.0 * s * (spec.J * m + spec.h)
            p_fwd = table[((s + 1) >> 1) * (twod + 1) + m_idx]
            # reverse move: flipped spin sees the same neighbors
            p_rev = table[((-s + 1) >> 1) * (twod + 1) + m_idx]
            if abs(p_fwd / p_rev - math.exp(-spec.beta * dE)) > 1e-12:
                return f"detailed balance violated at s={s}, m={m}"
    return None


def _check_backend_equivalence() -> str | None:
    if kernels.BACKEND != "cython":
        return None  # nothing to compare against
    geo = LatticeGeometry(d=2, L=5)
    spec = ClassicalModelSpec(geo, J=1.0, T=2.5, h=0.1)
    nbrs = neighbor_table(geo)
    table = glauber_flip_table(spec)
    p_add = wolff_bond_probability(spec.with_field(0.0))
    for trial in range(3):
        r1 = np.random.Generator(np.random.Philox(np.random.SeedSequence([5, trial])))
        r2 = np.random.Generator(np.random.Philox(np.random.SeedSequence([5, trial])))
        c1 = random_configuration(geo, r1)
        c2 = random_configuration(geo, r2)
        kernels.glauber_sweeps(c1.spins, nbrs, table, 10, r1)
        _mc_py.glauber_sweeps(c2.spins, nbrs, table, 10, r2)
        kernels.wolff_updates(c1.spins, nbrs, p_add, 10, r1)
        _mc_py.wolff_updates(c2.spins, nbrs, p_add, 10, r2)
        if not np.array_equal(c1.spins, c2.spins):
            return "compiled and pure-Python kernels diverged"
    return None


def _check_exponent_identities() -> str | None:
    for (family, d) in DEFAULT_CONSTANTS:
        c = derive_constants(family, d)
        if family == "quantum":
            kappa, y_h = d + 2 - c.z - c.eta, (d + c.z + 2 - c.eta) / 2
        else:
            kappa, y_h = d + 2 - c.eta, (d + 2 - c.eta) / 2
        if c.kappa != kappa or c.y_h != y_h:
            return f"kappa/y_h identity broken for ({family}, d={d})"
    return None


def _check_percentiles() -> str | None:
    values = np.array([0.84, 0.85, 0.86, 0.87, 0.88])
    q16, q84 = np.percentile(values, [16, 84])
    if abs(np.median(values) - 0.86) > 1e-12:
        return "median estimator broken"
    if abs((q84 - q16) / 2 - 0.0136) > 1e-12:
        return "central quantile width broken"
    return None


def _check_quantum() -> str | None:
    spec = QuantumModelSpec(LatticeGeometry(d=1, L=4), J=1.0, g=1.0, h=0.1)
    rng = np.random.default_rng(2)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    expect = np.vdot(psi, apply_hamiltonian(spec, psi))
    if abs(expect.imag) > 1e-12 * abs(expect):
        return "<H> not real (Hermiticity broken)"
    energy, gs = ground_state(spec.with_field(0.0))
    phi = evolve(gs, spec, 1.0, tol=1e-10)
    if abs(np.linalg.norm(phi) - 1.0) > 1e-10:
        return "norm not conserved by the propagator"
    plus = np.full(16, 0.25, dtype=complex)  # all spins along +x
    if abs(measure_M2(plus) - 4.0) > 1e-12:
        return "<M^2> of the product |+> state should equal N"
    return None


def _check_synthetic_recovery() -> str | None:
    constants = derive_constants("classical", 3)
    series = make_synthetic_series(constants, w_star=1.0, L_values=(10, 14),
                                   h_values=(0.05, 0.2), points_per_curve=120)
    windows = [CollapseWindow(b, g) for b in (0.1, 0.25, 0.4) for g in (0.7, 1.0)]
    result = estimate_w(series, constants, windows=windows)
    if abs(result.w_rep - 1.0) > 0.05:
        return f"synthetic w* = 1.0 recovered as {result.w_rep:.3f}"
    return None


CHECKS = [
    ("lattice geometry and neighbor symmetry", _check_lattice),
    ("single-flip energy identity and flip symmetry", _check_flip_energy_identity),
    ("Glauber detailed balance", _check_detailed_balance),
    ("kernel backend equivalence", _check_backend_equivalence),
    ("kappa / y_h exponent identities", _check_exponent_identities),
    ("median and quantile-width estimators", _check_percentiles),
    ("quantum Hermiticity, norm conservation, product-state M^2", _check_quantum),
    ("synthetic collapse recovery", _check_synthetic_recovery),
]


def run_selfcheck(print_fn=print) -> bool:
    ok = True
    for name, check in CHECKS:
        problem = check()
        if problem is None:
            print_fn(f"PASS  {name}")
        else:
            print_fn(f"FAIL  {name}: {problem}")
            ok = False
    return ok
