"""Physical model parameters and shared value types for the three-well splitter."""
import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.constants import (
    DEFAULT_DT,
    DEFAULT_GRID_STEP,
    DEFAULT_SCHEME,
    DEFAULT_SEED,
    DEFAULT_T_MAX,
    DEFAULT_TRAJECTORIES,
    SCHEMES,
)
from src.errors import ConfigError

SEED_LIMIT = 2 ** 64


class InitialState(str, enum.Enum):
    """Quantum state of the atoms initially in the middle well."""
    FOCK = 'fock'
    COHERENT = 'coherent'

    @classmethod
    def parse(cls, value) -> 'InitialState':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigError(f"Unknown initial state '{value}' (expected fock or coherent)")


@dataclass(frozen=True)
class OmegaRate:
    """Splitting frequency of the non-interacting system, omega = sqrt(2) J."""
    omega: float

    @classmethod
    def from_tunneling(cls, J: float) -> 'OmegaRate':
        return cls(math.sqrt(2.0) * J)

    @property
    def period(self) -> float:
        """Revival period 2*pi/omega (infinite for J = 0)."""
        return math.inf if self.omega == 0 else 2.0 * math.pi / self.omega


@dataclass(frozen=True)
class ComplexAmplitude:
    """One phase-space amplitude split into real and imaginary parts."""
    re: float
    im: float

    @classmethod
    def from_complex(cls, z: complex) -> 'ComplexAmplitude':
        return cls(float(z.real), float(z.imag))

    def to_complex(self) -> complex:
        return complex(self.re, self.im)

    def is_finite(self) -> bool:
        return math.isfinite(self.re) and math.isfinite(self.im)


@dataclass(frozen=True)
class SystemConfig:
    """Physical and numerical parameters of one run.

    Args:
        J: Tunneling rate between neighbouring wells
        chi: Collisional nonlinearity
        n_atoms: Mean initial atom number in well 2 (integer for Fock inputs)
        initial_state: Quantum state of well 2 at t = 0
        t_max: End of the time grid
        dt: Integration step of the stochastic equations
        n_traj: Number of stochastic trajectories
        seed: 64-bit seed of the trajectory random streams
        grid_step: Spacing of the output time grid (a multiple of dt)
        workers: Worker threads for the ensemble (None uses every core)
        scheme: Stochastic integration scheme, 'euler' or 'midpoint'
    """
    J: float
    chi: float
    n_atoms: float
    initial_state: InitialState
    t_max: float = DEFAULT_T_MAX
    dt: float = DEFAULT_DT
    n_traj: int = DEFAULT_TRAJECTORIES
    seed: int = DEFAULT_SEED
    grid_step: float = DEFAULT_GRID_STEP
    workers: Optional[int] = None
    scheme: str = DEFAULT_SCHEME

    def __post_init__(self):
        object.__setattr__(self, 'initial_state', InitialState.parse(self.initial_state))
        for name in ('J', 'chi', 'n_atoms', 't_max', 'dt', 'grid_step'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"{name} must be a finite number, got {value!r}")
        if self.J < 0:
            raise ConfigError(f"J must be non-negative, got {self.J}")
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_max < 0:
            raise ConfigError(f"t_max must be non-negative, got {self.t_max}")
        if self.grid_step <= 0:
            raise ConfigError(f"grid_step must be positive, got {self.grid_step}")
        if self.n_atoms < 0:
            raise ConfigError(f"n_atoms must be non-negative, got {self.n_atoms}")
        if self.initial_state is InitialState.FOCK and float(self.n_atoms) != int(self.n_atoms):
            raise ConfigError(f"n_atoms must be an integer for a Fock input, got {self.n_atoms}")
        if not isinstance(self.n_traj, int) or self.n_traj < 1:
            raise ConfigError(f"n_traj must be a positive integer, got {self.n_traj!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.workers is not None and (not isinstance(self.workers, int) or self.workers < 1):
            raise ConfigError(f"workers must be a positive integer, got {self.workers!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        ratio = self.grid_step / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError(f"grid_step ({self.grid_step}) must be an integer multiple of dt ({self.dt})")

    @property
    def omega(self) -> OmegaRate:
        return OmegaRate.from_tunneling(self.J)

    @property
    def steps_per_sample(self) -> int:
        return int(round(self.grid_step / self.dt))

    @property
    def n_grid(self) -> int:
        return int(math.floor(self.t_max / self.grid_step + 1e-9)) + 1

    def time_grid(self) -> np.ndarray:
        return np.arange(self.n_grid) * self.grid_step


@dataclass(frozen=True)
class InitialMoments:
    """Moments of the initial state that the closed forms depend on.

    Wells 1 and 3 start in vacuum, so only well 2 carries non-trivial values.
    quad_vars is ordered (V(X1), V(Y1), V(X2), V(Y2), V(X3), V(Y3)).
    """
    mean_n: float
    var_n: float
    quad_vars: Tuple[float, float, float, float, float, float]
    amplitude: complex = 0j
    pair_moment: complex = 0j

    def __post_init__(self):
        if self.var_n < 0:
            raise ConfigError(f"var_n must be non-negative, got {self.var_n}")
        if len(self.quad_vars) != 6 or any(v < 0 for v in self.quad_vars):
            raise ConfigError(f"quad_vars must be six non-negative values, got {self.quad_vars}")

    @property
    def factorial_moment(self) -> float:
        """<a2^dag^2 a2^2> at t = 0."""
        return self.var_n + self.mean_n ** 2 - self.mean_n

    def vx(self, well: int) -> float:
        return self.quad_vars[2 * (well - 1)]

    def vy(self, well: int) -> float:
        return self.quad_vars[2 * (well - 1) + 1]


def initial_moments(config: SystemConfig) -> InitialMoments:
    """Moments of vacuum wells 1, 3 and the chosen well-2 state."""
    n = float(config.n_atoms)
    if config.initial_state is InitialState.FOCK:
        var_n = 0.0
        v2 = 2.0 * n + 1.0
        amplitude = 0j
        pair = 0j
    else:
        var_n = n
        v2 = 1.0
        amplitude = complex(math.sqrt(n), 0.0)
        pair = complex(n, 0.0)
    return InitialMoments(
        mean_n=n,
        var_n=var_n,
        quad_vars=(1.0, 1.0, v2, v2, 1.0, 1.0),
        amplitude=amplitude,
        pair_moment=pair,
    )
