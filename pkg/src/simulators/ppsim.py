"""Positive-P stochastic ensembles for the three-well Bose-Hubbard splitter."""
import cmath
import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.constants import (
    BLOCKS_PER_CHUNK,
    DIVERGENCE_FACTOR,
    MAX_DIVERGED_FRACTION,
    MIDPOINT_ITERATIONS,
    TRAJECTORY_BLOCK_SIZE,
)
from src.errors import DivergenceError
from src.model.config import ComplexAmplitude, InitialState, SystemConfig
from src.model.moments import MomentSet, moment_layout
from src.simulators import kernels
from src.simulators.jit import set_worker_threads
from src.simulators.rng import TrajectoryStream, seed_key

logger = logging.getLogger(__name__)

SCHEME_CODES = {'euler': kernels.SCHEME_EULER, 'midpoint': kernels.SCHEME_MIDPOINT}


@dataclass
class TrajectoryState:
    """Phase-space amplitudes of one trajectory.

    alpha and alpha_plus are independent complex variables; they are only
    conjugate to each other on average.
    """
    alpha: np.ndarray
    alpha_plus: np.ndarray
    t: float = 0.0
    diverged: bool = False

    @classmethod
    def from_vector(cls, y: np.ndarray, t: float = 0.0, diverged: bool = False) -> 'TrajectoryState':
        y = np.asarray(y, dtype=complex)
        return cls(alpha=y[0::2].copy(), alpha_plus=y[1::2].copy(), t=t, diverged=diverged)

    def to_vector(self) -> np.ndarray:
        """Interleaved (alpha1, alpha1+, alpha2, alpha2+, alpha3, alpha3+)."""
        y = np.empty(kernels.STATE_SIZE, dtype=complex)
        y[0::2] = self.alpha
        y[1::2] = self.alpha_plus
        return y

    def components(self) -> List[ComplexAmplitude]:
        return [ComplexAmplitude.from_complex(z) for z in self.to_vector()]

    def is_finite(self) -> bool:
        return all(c.is_finite() for c in self.components())


@dataclass(frozen=True)
class NoiseVector:
    """Six standard normal draws driving one step of one trajectory."""
    eta: np.ndarray = field(default_factory=lambda: np.zeros(kernels.STATE_SIZE))

    def __post_init__(self):
        if np.shape(self.eta) != (kernels.STATE_SIZE,):
            raise ValueError(f"eta must have six entries, got shape {np.shape(self.eta)}")


def noise_roots(chi: float):
    """Principal square roots of -2i*chi and 2i*chi."""
    return cmath.sqrt(-2j * chi), cmath.sqrt(2j * chi)


def divergence_bound(n_atoms: float) -> float:
    """Magnitude above which a trajectory component counts as diverged."""
    return DIVERGENCE_FACTOR * math.sqrt(max(float(n_atoms), 1.0))


def sample_initial(config: SystemConfig, stream: TrajectoryStream) -> TrajectoryState:
    """Initial amplitudes of one trajectory: vacuum in wells 1 and 3.

    A coherent well 2 is a delta distribution at sqrt(N). A Fock well 2 is
    sampled from its Husimi function plus a complex Gaussian displacement,
    which reproduces every normally ordered moment of |N> in the mean.
    """
    y = np.zeros(kernels.STATE_SIZE, dtype=complex)
    kernels.sample_initial_into(
        y, config.initial_state is InitialState.FOCK, float(config.n_atoms),
        stream.k0, stream.k1, stream.tlo, stream.thi,
    )
    return TrajectoryState.from_vector(y)


def drift(state: TrajectoryState, config: SystemConfig) -> np.ndarray:
    """
    Ito drift of one trajectory.

    Args:
        state: Current phase-space amplitudes
        config: System parameters (J and chi are used)

    Returns:
        np.ndarray: Six complex derivatives in interleaved order
    """
    out = np.empty(kernels.STATE_SIZE, dtype=complex)
    kernels.drift_into(state.to_vector(), float(config.J), float(config.chi), out)
    return out


def noise_amplitudes(state: TrajectoryState, config: SystemConfig) -> np.ndarray:
    """
    Multiplicative noise factors sqrt(-2i chi) alpha_j^2 and sqrt(2i chi) alpha_j+^2.

    Args:
        state: Current phase-space amplitudes
        config: System parameters (chi is used)

    Returns:
        np.ndarray: Six complex factors in interleaved order, zero when chi = 0
    """
    root_minus, root_plus = noise_roots(config.chi)
    out = np.empty(kernels.STATE_SIZE, dtype=complex)
    kernels.noise_into(state.to_vector(), root_minus, root_plus, out)
    return out


def step(state: TrajectoryState, dt: float, noise: NoiseVector, config: SystemConfig) -> TrajectoryState:
    """One Ito Euler-Maruyama step; blow-up sets the diverged flag."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    y = state.to_vector()
    out = np.empty_like(y)
    root_minus, root_plus = noise_roots(config.chi)
    kernels.euler_step(
        y, dt, np.asarray(noise.eta, dtype=float), float(config.J), float(config.chi),
        root_minus, root_plus, np.empty_like(y), np.empty_like(y), out,
    )
    diverged = state.diverged or kernels.is_diverged(out, divergence_bound(config.n_atoms))
    return TrajectoryState.from_vector(out, t=state.t + dt, diverged=diverged)


class MomentAccumulator:
    """Merges per-block sums in block order with Chan's mean/scatter update.

    Each block mean is treated as one observation weighted by its trajectory
    count, so M2 / (blocks - 1) estimates the single-trajectory covariance and
    dividing again by the trajectory count gives the covariance of the mean.
    """

    def __init__(self, n_grid: int, size: int):
        self.count = 0
        self.blocks = 0
        self.diverged = 0
        self.mean = np.zeros((n_grid, 2 * size))
        self.m2 = np.zeros((n_grid, 2 * size, 2 * size))

    def add_chunk(self, sums: np.ndarray, used: np.ndarray, diverged: np.ndarray):
        self.diverged += int(diverged.sum())
        populated = used > 0
        if not populated.any():
            return
        counts = used[populated].astype(float)
        means = sums[populated] / counts[:, None, None]
        split = np.concatenate([means.real, means.imag], axis=-1)

        n_chunk = counts.sum()
        chunk_mean = np.einsum('b,bti->ti', counts, split) / n_chunk
        deviation = split - chunk_mean
        chunk_m2 = np.einsum('b,bti,btj->tij', counts, deviation, deviation)

        total = self.count + n_chunk
        delta = chunk_mean - self.mean
        self.m2 += chunk_m2 + (self.count * n_chunk / total) * np.einsum('ti,tj->tij', delta, delta)
        self.mean += delta * (n_chunk / total)
        self.count = int(total)
        self.blocks += int(populated.sum())

    def values(self) -> np.ndarray:
        size = self.mean.shape[1] // 2
        return self.mean[:, :size] + 1j * self.mean[:, size:]

    def covariance(self) -> np.ndarray:
        if self.blocks < 2:
            logger.warning(
                f"Only {self.blocks} populated trajectory block(s); standard errors are undefined"
            )
            return np.full_like(self.m2, np.nan)
        return self.m2 / (self.blocks - 1) / self.count


def run_ensemble(config: SystemConfig) -> MomentSet:
    """Integrate config.n_traj trajectories and average their moment products.

    Raises:
        DivergenceError: If more than 1% of trajectories diverge
    """
    layout = moment_layout(3)
    threads = set_worker_threads(config.workers)
    k0, k1 = seed_key(config.seed)
    root_minus, root_plus = noise_roots(config.chi)
    bound = divergence_bound(config.n_atoms)
    n_grid = config.n_grid
    n_blocks = -(-config.n_traj // TRAJECTORY_BLOCK_SIZE)
    accumulator = MomentAccumulator(n_grid, layout.size)

    logger.info(
        f"Running {config.n_traj} trajectories ({config.initial_state.value}, N={config.n_atoms}, "
        f"J={config.J}, chi={config.chi}, dt={config.dt}, scheme={config.scheme}) on {threads} thread(s)"
    )
    started = time.perf_counter()
    for first in range(0, n_blocks, BLOCKS_PER_CHUNK):
        count = min(BLOCKS_PER_CHUNK, n_blocks - first)
        sums, used, diverged = kernels.integrate_blocks(
            first, count, TRAJECTORY_BLOCK_SIZE, config.n_traj, k0, k1,
            float(config.J), float(config.chi), float(config.n_atoms),
            config.initial_state is InitialState.FOCK,
            float(config.dt), config.steps_per_sample, n_grid, bound,
            SCHEME_CODES[config.scheme], MIDPOINT_ITERATIONS, root_minus, root_plus,
        )
        accumulator.add_chunk(sums, used, diverged)
        done = min((first + count) * TRAJECTORY_BLOCK_SIZE, config.n_traj)
        logger.debug(f"Integrated {done}/{config.n_traj} trajectories")

    elapsed = time.perf_counter() - started
    n_diverged = accumulator.diverged
    logger.info(f"Ensemble finished in {elapsed:.1f}s; {n_diverged} trajectories diverged")
    if n_diverged > MAX_DIVERGED_FRACTION * config.n_traj or accumulator.count == 0:
        raise DivergenceError(
            f"{n_diverged} of {config.n_traj} trajectories diverged "
            f"(limit {MAX_DIVERGED_FRACTION:.0%}); reduce chi, N or dt"
        )
    if n_diverged:
        logger.warning(f"Excluded {n_diverged} diverged trajectories from the averages")

    moments = MomentSet(
        time=config.time_grid(),
        values=accumulator.values(),
        modes=3,
        covariance=accumulator.covariance(),
        n_traj_used=accumulator.count,
        n_diverged=n_diverged,
    )
    worst = float(np.max(moments.imaginary_population_ratio(), initial=0.0))
    logger.debug(f"Largest |Im <N_j>| is {worst:.2f} standard errors")
    return moments


def integrate_single(config: SystemConfig, index: int = 0, scheme: Optional[str] = None) -> MomentSet:
    """Sampled products of one trajectory on the output grid (no averaging)."""
    layout = moment_layout(3)
    buffer = np.zeros((config.n_grid, layout.size), dtype=complex)
    k0, k1 = seed_key(config.seed)
    root_minus, root_plus = noise_roots(config.chi)
    ok = kernels.integrate_trajectory(
        index, k0, k1, float(config.J), float(config.chi), float(config.n_atoms),
        config.initial_state is InitialState.FOCK, float(config.dt), config.steps_per_sample,
        config.n_grid, divergence_bound(config.n_atoms),
        SCHEME_CODES[scheme or config.scheme], MIDPOINT_ITERATIONS, root_minus, root_plus, buffer,
    )
    if not ok:
        raise DivergenceError(f"trajectory {index} diverged")
    return MomentSet(time=config.time_grid(), values=buffer, modes=3, n_traj_used=1)
