"""Exact number-basis evolution used as ground truth for the other paths.

The three-well Hamiltonian conserves the total atom number, so a Fock input
|0, N, 0> is propagated inside the fixed-N sector of dimension
(N+1)(N+2)/2. The two-mode beamsplitter is handled the same way, one total
photon number sector at a time.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.linalg import eigh, expm
from scipy.special import gammaln
from scipy.stats import poisson

from src.constants import BS_TAIL_TOLERANCE, DENSE_DIMENSION_LIMIT, ODE_ATOL, ODE_RTOL
from src.errors import ConfigError
from src.model.moments import MomentSet, moment_layout

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-10
NEIGHBOURS = ((0, 1), (1, 2))


class FockBasis:
    """Occupation triples (n1, n2, n3) with n1 + n2 + n3 = total."""

    def __init__(self, total: int):
        if total < 0 or int(total) != total:
            raise ConfigError(f"total atom number must be a non-negative integer, got {total}")
        self.total = int(total)
        self.states: List[Tuple[int, int, int]] = [
            (n1, n2, self.total - n1 - n2)
            for n1 in range(self.total + 1)
            for n2 in range(self.total - n1 + 1)
        ]
        self.index: Dict[Tuple[int, int, int], int] = {s: k for k, s in enumerate(self.states)}
        self.occupations = np.array(self.states, dtype=float).reshape(-1, 3)
        self._transfers: Dict[Tuple[int, int], sparse.csr_matrix] = {}

    @property
    def dimension(self) -> int:
        """Number of occupation triples, (N+1)(N+2)/2."""
        return len(self.states)

    def transfer(self, i: int, j: int) -> sparse.csr_matrix:
        """Sparse matrix of a_i^dag a_j (0-based modes)."""
        key = (i, j)
        if key not in self._transfers:
            if i == j:
                matrix = sparse.diags(self.occupations[:, i]).tocsr()
            else:
                rows, cols, vals = [], [], []
                for col, state in enumerate(self.states):
                    if state[j] == 0:
                        continue
                    target = list(state)
                    target[j] -= 1
                    target[i] += 1
                    rows.append(self.index[tuple(target)])
                    cols.append(col)
                    vals.append(math.sqrt(state[j] * (state[i] + 1)))
                matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(self.dimension, self.dimension))
            self._transfers[key] = matrix
        return self._transfers[key]


@dataclass
class FockState:
    """Complex amplitudes over a FockBasis."""
    basis: FockBasis
    amplitudes: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.dimension,):
            raise ValueError(
                f"expected {self.basis.dimension} amplitudes, got shape {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def fock_initial_state(basis: FockBasis) -> FockState:
    """All atoms in the middle well."""
    amplitudes = np.zeros(basis.dimension, dtype=complex)
    amplitudes[basis.index[(0, basis.total, 0)]] = 1.0
    return FockState(basis, amplitudes)


def hamiltonian_matrix(basis: FockBasis, J: float, chi: float) -> sparse.csr_matrix:
    """
    Sparse Hamiltonian chi sum n_j(n_j - 1) + J (a1^dag a2 + a2^dag a3 + h.c.) on one sector.

    Args:
        basis: Fixed-N occupation basis
        J: Tunneling rate
        chi: Collisional nonlinearity

    Returns:
        sparse.csr_matrix: Hermitian matrix of size basis.dimension
    """
    n = basis.occupations
    interaction = sparse.diags(chi * np.sum(n * (n - 1.0), axis=1))
    hopping = sum(basis.transfer(i, j) + basis.transfer(j, i) for i, j in NEIGHBOURS)
    return (interaction + J * hopping).tocsr()


def hamiltonian_apply(state: FockState, J: float, chi: float) -> FockState:
    """Schrodinger derivative d(psi)/dt = -i H psi."""
    H = hamiltonian_matrix(state.basis, J, chi)
    return FockState(state.basis, -1j * (H @ state.amplitudes), state.t)


def _check_norm(state: FockState):
    drift = abs(state.norm() - 1.0)
    if drift > NORM_TOLERANCE:
        logger.warning(f"Norm drifted by {drift:.2e} at t={state.t:g}")


def evolve(state0: FockState, t: float, J: float, chi: float) -> FockState:
    """Propagate by t with a dense exponential, or DOP853 for large sectors."""
    if t == 0:
        return FockState(state0.basis, state0.amplitudes.copy(), state0.t)
    H = hamiltonian_matrix(state0.basis, J, chi)
    if state0.basis.dimension <= DENSE_DIMENSION_LIMIT:
        amplitudes = expm(-1j * t * H.toarray()) @ state0.amplitudes
    else:
        solution = solve_ivp(
            lambda _, y: -1j * (H @ y), (0.0, t), state0.amplitudes,
            method='DOP853', rtol=ODE_RTOL, atol=ODE_ATOL,
        )
        amplitudes = solution.y[:, -1]
    state = FockState(state0.basis, amplitudes, state0.t + t)
    _check_norm(state)
    return state


def moments(state: FockState) -> MomentSet:
    """Exact single-time moments of a fixed-N state.

    a_j and a_i a_j map the N-atom sector onto N-1 and N-2, which are
    orthogonal to it, so first and anomalous moments are identically zero
    and their slots are left unset.
    """
    basis = state.basis
    layout = moment_layout(3)
    psi = state.amplitudes
    probabilities = state.probabilities()
    n = basis.occupations
    row = np.zeros(layout.size, dtype=complex)
    for i in range(3):
        for j in range(3):
            row[layout.adag_a(i + 1, j + 1)] = np.vdot(psi, basis.transfer(i, j) @ psi)
        row[layout.factorial(i + 1)] = probabilities @ (n[:, i] * (n[:, i] - 1.0))
        for j in range(i + 1, 3):
            row[layout.number_pair(i + 1, j + 1)] = probabilities @ (n[:, i] * n[:, j])
    return MomentSet(time=[state.t], values=row[None, :], modes=3)


def evolve_series(state0: FockState, times, J: float, chi: float) -> MomentSet:
    """Exact moments on a whole time grid."""
    times = np.asarray(times, dtype=float)
    basis = state0.basis
    H = hamiltonian_matrix(basis, J, chi)
    logger.info(f"Exact evolution: N={basis.total}, dimension {basis.dimension}, {times.size} times")
    if basis.dimension <= DENSE_DIMENSION_LIMIT:
        energies, vectors = eigh(H.toarray())
        coefficients = vectors.conj().T @ state0.amplitudes
        phases = np.exp(-1j * np.outer(times, energies))
        trajectory = (phases * coefficients) @ vectors.T
    else:
        solution = solve_ivp(
            lambda _, y: -1j * (H @ y), (0.0, float(times.max(initial=0.0))), state0.amplitudes,
            method='DOP853', t_eval=times, rtol=ODE_RTOL, atol=ODE_ATOL,
        )
        trajectory = solution.y.T
    rows = []
    for t, amplitudes in zip(times, trajectory):
        state = FockState(basis, amplitudes, state0.t + t)
        _check_norm(state)
        rows.append(moments(state).values[0])
    return MomentSet(time=times + state0.t, values=np.array(rows), modes=3)


@dataclass(frozen=True)
class FockInput:
    n: int


@dataclass(frozen=True)
class CoherentInput:
    beta: complex
    cutoff: Optional[int] = None

    def resolved_cutoff(self) -> int:
        if self.cutoff is not None:
            return self.cutoff
        amplitude = abs(self.beta)
        return int(math.ceil(amplitude ** 2 + 10.0 * amplitude + 20.0))


@dataclass(frozen=True)
class SqueezedVacuumInput:
    """Squeezed vacuum with V(X) = exp(-r), V(Y) = exp(r)."""
    r: float
    cutoff: Optional[int] = None

    def resolved_cutoff(self) -> int:
        if self.cutoff is not None:
            return self.cutoff
        return int(math.ceil(20.0 + 10.0 * math.sinh(self.r) ** 2))


BsInputState = Union[FockInput, CoherentInput, SqueezedVacuumInput]


@dataclass
class BsExactResult:
    """Exact two-mode output moments and the probability lost to truncation."""
    moments: MomentSet
    cutoff: int
    tail_mass: float


def _input_amplitudes(source: BsInputState) -> Tuple[np.ndarray, float]:
    """Number-state amplitudes of the port-a input and its neglected tail mass."""
    if isinstance(source, FockInput):
        if source.n < 0 or int(source.n) != source.n:
            raise ConfigError(f"Fock input needs a non-negative integer, got {source.n}")
        amplitudes = np.zeros(int(source.n) + 1, dtype=complex)
        amplitudes[-1] = 1.0
        return amplitudes, 0.0

    if isinstance(source, CoherentInput):
        cutoff = source.resolved_cutoff()
        n = np.arange(cutoff + 1)
        mean = abs(source.beta) ** 2
        if mean == 0:
            amplitudes = np.zeros(cutoff + 1, dtype=complex)
            amplitudes[0] = 1.0
            return amplitudes, 0.0
        log_magnitude = -0.5 * mean + n * math.log(abs(source.beta)) - 0.5 * gammaln(n + 1)
        amplitudes = np.exp(log_magnitude) * np.exp(1j * n * np.angle(source.beta))
        return amplitudes, float(poisson.sf(cutoff, mean))

    if isinstance(source, SqueezedVacuumInput):
        if source.r < 0:
            raise ConfigError(f"squeeze parameter must be non-negative, got {source.r}")
        cutoff = source.resolved_cutoff()
        amplitudes = np.zeros(cutoff + 1, dtype=complex)
        s = 0.5 * source.r
        if s == 0:
            amplitudes[0] = 1.0
            return amplitudes, 0.0
        m = np.arange(cutoff // 2 + 1)
        log_magnitude = (
            -0.5 * math.log(math.cosh(s)) + m * math.log(math.tanh(s))
            + 0.5 * gammaln(2 * m + 1) - m * math.log(2.0) - gammaln(m + 1)
        )
        amplitudes[2 * m] = (-1.0) ** m * np.exp(log_magnitude)
        return amplitudes, max(0.0, 1.0 - float(np.sum(np.abs(amplitudes) ** 2)))

    raise ConfigError(f"unsupported beamsplitter input {source!r}")


def _lower(psi: np.ndarray, axis: int) -> np.ndarray:
    """Apply the annihilation operator of one mode to a (n_a, n_b) amplitude grid."""
    out = np.zeros_like(psi)
    factors = np.sqrt(np.arange(1, psi.shape[axis]))
    if axis == 0:
        out[:-1, :] = factors[:, None] * psi[1:, :]
    else:
        out[:, :-1] = factors[None, :] * psi[:, 1:]
    return out


def _mix_sector(total: int, theta: float) -> np.ndarray:
    """exp(theta (a^dag b - a b^dag)) on the states |k, total - k>."""
    k = np.arange(total)
    raise_a = np.sqrt((k + 1.0) * (total - k))
    generator = np.zeros((total + 1, total + 1))
    generator[k + 1, k] = raise_a
    generator[k, k + 1] = -raise_a
    return expm(theta * generator)


def bs_exact(source: BsInputState, eta: float = 0.5) -> BsExactResult:
    """Output moments of a lossless beamsplitter with vacuum in port b.

    The output modes are a_out = sqrt(eta) a + sqrt(1 - eta) b and
    b_out = sqrt(eta) b - sqrt(1 - eta) a.
    """
    if not 0.0 <= eta <= 1.0:
        raise ConfigError(f"eta must lie in [0, 1], got {eta}")
    amplitudes, tail = _input_amplitudes(source)
    if tail > BS_TAIL_TOLERANCE:
        logger.warning(f"Beamsplitter truncation tail mass {tail:.2e} exceeds {BS_TAIL_TOLERANCE:.0e}")
    cutoff = amplitudes.size - 1
    theta = math.acos(math.sqrt(eta))

    psi = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    for total, amplitude in enumerate(amplitudes):
        if amplitude == 0:
            continue
        column = _mix_sector(total, theta)[:, total] * amplitude
        k = np.arange(total + 1)
        psi[k, total - k] += column

    layout = moment_layout(2)
    lowered = [_lower(psi, 0), _lower(psi, 1)]
    row = np.zeros(layout.size, dtype=complex)
    for i in range(2):
        row[layout.a(i + 1)] = np.vdot(psi, lowered[i])
        row[layout.adag(i + 1)] = np.conj(row[layout.a(i + 1)])
        for j in range(2):
            row[layout.adag_a(i + 1, j + 1)] = np.vdot(lowered[i], lowered[j])
        for j in range(i, 2):
            pair = np.vdot(psi, _lower(lowered[j], i))
            row[layout.a_a(i + 1, j + 1)] = pair
            row[layout.adag_adag(i + 1, j + 1)] = np.conj(pair)
        twice = _lower(lowered[i], i)
        row[layout.factorial(i + 1)] = np.vdot(twice, twice)
    both = _lower(lowered[1], 0)
    row[layout.number_pair(1, 2)] = np.vdot(both, both)

    logger.debug(f"Beamsplitter oracle: cutoff {cutoff}, tail mass {tail:.2e}")
    return BsExactResult(
        moments=MomentSet(time=[0.0], values=row[None, :], modes=2),
        cutoff=cutoff,
        tail_mass=tail,
    )
