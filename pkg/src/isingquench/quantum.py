"""Exact small-system engine for the critical transverse-field Ising model:
matrix-free Hamiltonian application, Lanczos ground states, and adaptive
Krylov real-time propagation after the longitudinal-field quench.

Basis convention: computational sigma^z basis with the site-0 spin stored
in the lowest bit of the state index; bit value 0 means spin up (+1).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import CapacityError, NumericalError, ProtocolError
from .lattice import LatticeGeometry, neighbor_table
from .series import TIME_UNIT_JT, EnsembleSeries, SeriesLabel

MAX_SITES = 24  # 2^N state vectors beyond this exceed the memory budget
GROUND_STATE_RESIDUAL = 1e-8
GROUND_STATE_M_TOL = 1e-8


@dataclass(frozen=True)
class QuantumModelSpec:
    """Geometry, couplings and quench field for one quantum run.

    The transverse field g is normally the critical coupling; h is the
    longitudinal quench field switched on at t = 0.
    """

    geometry: LatticeGeometry
    J: float
    g: float
    h: float = 0.0

    def __post_init__(self):
        if self.geometry.d not in (1, 2):
            raise ValueError(f"quantum lattices support d in {{1, 2}}, got d={self.geometry.d}")
        if self.geometry.N > MAX_SITES:
            raise CapacityError(
                f"N = {self.geometry.N} sites exceeds the representable budget "
                f"of {MAX_SITES} (state vector would need 2^{self.geometry.N} amplitudes)"
            )
        if self.J <= 0 or self.g <= 0:
            raise ValueError("J and g must be positive")
        if self.h < 0:
            raise ValueError("field must be nonnegative (h >= 0 w.l.o.g.)")

    @property
    def n_sites(self) -> int:
        return self.geometry.N

    def bond_list(self) -> tuple[tuple[int, int], ...]:
        """Each periodic bond once, as (site, +axis neighbor) pairs."""
        nbrs = neighbor_table(self.geometry)
        return tuple(
            (i, int(nbrs[i, 2 * axis + 1]))
            for axis in range(self.geometry.d)
            for i in range(self.geometry.N)
        )

    def with_field(self, h: float) -> "QuantumModelSpec":
        return QuantumModelSpec(self.geometry, self.J, self.g, h)


class TfimOperator:
    """Matrix-free H = -J sum_<ij> Z_i Z_j - g sum_i X_i - h sum_i Z_i."""

    def __init__(self, n_sites: int, bonds, J: float, g: float, h: float):
        self.n_sites = n_sites
        self.dim = 1 << n_sites
        self.J = J
        self.g = g
        self.h = h
        states = np.arange(self.dim, dtype=np.uint32)
        # z_i z_j = 1 - 2 (b_i XOR b_j); accumulate the XOR count per bond
        antialigned = np.zeros(self.dim, dtype=np.int32)
        for i, j in bonds:
            antialigned += ((states >> i) ^ (states >> j)) & 1
        self.zz_diag = (len(bonds) - 2 * antialigned).astype(np.float64)
        popcount = np.bitwise_count(states).astype(np.int64)
        self.m_diag = (n_sites - 2 * popcount).astype(np.float64)
        self._diag = -J * self.zz_diag - h * self.m_diag

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """H |psi>, applied without forming the matrix."""
        if psi.shape != (self.dim,):
            raise ValueError(f"state has shape {psi.shape}, expected ({self.dim},)")
        out = self._diag * psi
        for i in range(self.n_sites):
            # X_i permutes amplitudes by flipping bit i
            block = psi.reshape(-1, 2, 1 << i)
            out.reshape(-1, 2, 1 << i)[...] += -self.g * block[:, ::-1, :]
        return out

    def as_linear_operator(self) -> scipy.sparse.linalg.LinearOperator:
        return scipy.sparse.linalg.LinearOperator(
            (self.dim, self.dim), matvec=self.apply, dtype=np.complex128
        )


@lru_cache(maxsize=8)
def _cached_operator(spec: QuantumModelSpec) -> TfimOperator:
    return TfimOperator(spec.n_sites, spec.bond_list(), spec.J, spec.g, spec.h)


def apply_hamiltonian(spec: QuantumModelSpec, state: np.ndarray) -> np.ndarray:
    """H |psi> for the full post-quench Hamiltonian of `spec`."""
    return _cached_operator(spec).apply(np.asarray(state, dtype=np.complex128))


def measure_M(state: np.ndarray) -> float:
    """<M> = sum_s |psi(s)|^2 M(s)."""
    op = _m_diag_for(state)
    return float(np.real(np.vdot(state, op * state)))


def measure_M2(state: np.ndarray) -> float:
    """<M^2> = sum_s |psi(s)|^2 M(s)^2; lies in [0, N^2]."""
    op = _m_diag_for(state)
    return float(np.real(np.vdot(state, op * op * state)))


def measure_zz(state: np.ndarray, i: int, j: int) -> float:
    """Equal-time correlator <Z_i Z_j>."""
    idx = np.arange(state.shape[0], dtype=np.uint32)
    zz = 1.0 - 2.0 * (((idx >> i) ^ (idx >> j)) & 1)
    return float(np.real(np.vdot(state, zz * state)))


def energy_expectation(spec: QuantumModelSpec, state: np.ndarray) -> float:
    return float(np.real(np.vdot(state, apply_hamiltonian(spec, state))))


def _n_sites_for(state) -> int:
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError(f"state length {dim} is not a power of two")
    return n


def _m_diag_for(state) -> np.ndarray:
    n = _n_sites_for(state)
    idx = np.arange(state.shape[0], dtype=np.uint32)
    return (n - 2 * np.bitwise_count(idx).astype(np.int64)).astype(np.float64)


def ground_state(spec: QuantumModelSpec, maxiter: int | None = None) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of the critical Hamiltonian (h must be 0).

    Uses an implicitly restarted Lanczos solver on the matrix-free
    operator, targeting the two lowest states; the returned state is
    checked to be the Z2-even one via <M> ~ 0 and to satisfy
    ||H psi - E psi|| <= 1e-8.
    """
    if spec.h != 0.0:
        raise ProtocolError("the pre-quench state is the h = 0 critical ground state")
    op = _cached_operator(spec)
    if op.dim < 4:
        dense = hamiltonian_columns(spec)
        energies, vectors = np.linalg.eigh(dense)
        return float(energies[0]), vectors[:, 0].astype(np.complex128)
    v0 = np.full(op.dim, 1.0 / np.sqrt(op.dim))  # Z2-even start
    try:
        energies, vectors = scipy.sparse.linalg.eigsh(
            op.as_linear_operator(), k=2, which="SA", v0=v0,
            maxiter=maxiter, tol=0,
        )
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        raise NumericalError(f"ground-state Lanczos did not converge: {exc}") from exc
    order = np.argsort(energies)
    energy = float(energies[order[0]])
    psi = vectors[:, order[0]].astype(np.complex128)
    psi /= np.linalg.norm(psi)
    residual = np.linalg.norm(op.apply(psi) - energy * psi)
    if residual > GROUND_STATE_RESIDUAL * max(1.0, abs(energy)):
        raise NumericalError(
            f"ground-state residual {residual:.3e} exceeds "
            f"{GROUND_STATE_RESIDUAL:.0e} * |E| = {GROUND_STATE_RESIDUAL * abs(energy):.3e}"
        )
    m_expect = measure_M(psi)
    if abs(m_expect) > GROUND_STATE_M_TOL * spec.n_sites:
        raise NumericalError(
            f"returned state has <M> = {m_expect:.3e}; expected the Z2-even "
            "ground state (near-degeneracy with the odd state?)"
        )
    return energy, psi


def hamiltonian_columns(spec: QuantumModelSpec) -> np.ndarray:
    """Dense matrix assembled column-by-column from the matrix-free apply.

    Exponentially large; intended for tiny systems (guards at 2^14).
    """
    op = _cached_operator(spec)
    if op.dim > 1 << 14:
        raise CapacityError("dense assembly limited to N <= 14 sites")
    cols = np.empty((op.dim, op.dim), dtype=np.complex128)
    basis = np.zeros(op.dim, dtype=np.complex128)
    for s in range(op.dim):
        basis[s] = 1.0
        cols[:, s] = op.apply(basis)
        basis[s] = 0.0
    return cols


def _krylov_step(op: TfimOperator, psi: np.ndarray, dt: float, tol: float,
                 m_max: int) -> tuple[np.ndarray, bool]:
    """One Lanczos approximation of exp(-i dt H) psi.

    Returns (result, converged); converged is False when the residual
    estimate stays above tol at the Krylov dimension budget.
    """
    norm0 = np.linalg.norm(psi)
    m_max = min(m_max, op.dim)
    V = np.empty((m_max, op.dim), dtype=np.complex128)
    alphas = np.empty(m_max)
    betas = np.empty(max(m_max - 1, 1))
    V[0] = psi / norm0
    w = op.apply(V[0])
    alphas[0] = np.real(np.vdot(V[0], w))
    w -= alphas[0] * V[0]
    for j in range(1, m_max + 1):
        lam, U = scipy.linalg.eigh_tridiagonal(alphas[:j], betas[: j - 1])
        u = U @ (np.exp(-1j * dt * lam) * U[0, :])
        beta_next = np.linalg.norm(w)
        # generalized-residual estimate for the Lanczos exponential
        err = beta_next * abs(u[-1]) * abs(dt)
        if err <= tol or beta_next <= 1e-14 * max(1.0, abs(alphas[:j]).max()):
            return norm0 * (u @ V[:j]), True
        if j == m_max:
            return norm0 * (u @ V[:j]), False
        betas[j - 1] = beta_next
        V[j] = w / beta_next
        w = op.apply(V[j])
        alphas[j] = np.real(np.vdot(V[j], w))
        w -= alphas[j] * V[j] + beta_next * V[j - 1]
        # full reorthogonalization; cheap at these dimensions and avoids
        # ghost eigenvalues over long evolutions
        w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
    raise AssertionError("unreachable")


def evolve(state: np.ndarray, spec: QuantumModelSpec, dt: float,
           tol: float = 1e-10, m_max: int = 32) -> np.ndarray:
    """exp(-i H dt) |psi> via adaptive Krylov propagation.

    Substeps are halved until the local error estimate meets the tolerance
    budget; unreachable tolerance raises NumericalError.
    """
    psi = np.asarray(state, dtype=np.complex128)
    if dt == 0.0:
        return psi.copy()
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    op = _cached_operator(spec)
    remaining = float(dt)
    tau = float(dt)
    min_tau = dt * 2.0**-30
    while remaining > 0.0:
        tau = min(tau, remaining)
        phi, ok = _krylov_step(op, psi, tau, tol * (tau / dt), m_max)
        if not ok:
            tau *= 0.5
            if tau < min_tau:
                raise NumericalError(
                    f"Krylov propagation cannot reach tol={tol:.1e} within "
                    f"m_max={m_max} even at substep {tau:.3e}"
                )
            continue
        psi = phi
        psi /= np.linalg.norm(psi)  # guard against slow drift over many steps
        remaining -= tau
        tau *= 1.5  # try growing again after a successful step
    return psi


def run_quantum_quench(
    spec: QuantumModelSpec, record_times, tol: float = 1e-10
) -> EnsembleSeries:
    """Prepare the critical ground state, quench to field h, record <M^2(t)>.

    Deterministic: a single realization with zero standard errors, times
    in units of 1/J.
    """
    times = np.asarray(record_times, dtype=np.float64)
    if times.ndim != 1 or len(times) == 0 or times[0] != 0.0:
        raise ValueError("record times must start at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("record times must be strictly increasing")
    _, psi = ground_state(spec.with_field(0.0))
    m2 = np.empty_like(times)
    m2[0] = measure_M2(psi)
    for k in range(1, len(times)):
        psi = evolve(psi, spec, times[k] - times[k - 1], tol=tol)
        m2[k] = measure_M2(psi)
    label = SeriesLabel(family="quantum", d=spec.geometry.d, L=spec.geometry.L, h=spec.h)
    return EnsembleSeries(
        label=label,
        times=times,
        mean_M2=m2,
        stderr_M2=np.zeros_like(times),
        n_realizations=1,
        time_unit=TIME_UNIT_JT,
    )
