"""Ensemble-averaged normally ordered moments and their flat layout.

Every moment set, whether sampled from positive-P trajectories, synthesized
from the closed forms or read off an exact state vector, stores the same flat
vector of complex products per time point:

    <a_j>                          M entries
    <a_j^dag>                      M entries
    <a_i^dag a_j>                  M*M entries (row i, column j)
    <a_i a_j>, i <= j              M(M+1)/2 entries
    <a_i^dag a_j^dag>, i <= j      M(M+1)/2 entries
    <a_j^dag^2 a_j^2>              M entries
    <a_i^dag a_i a_j^dag a_j>, i<j M(M-1)/2 entries

Modes are 1-based in the public accessors.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MomentLayout:
    """Index map of the flat moment vector for a given number of modes."""
    modes: int
    offsets: Dict[str, int] = field(init=False)
    size: int = field(init=False)

    def __post_init__(self):
        m = self.modes
        pairs = m * (m + 1) // 2
        blocks = [
            ('a', m),
            ('adag', m),
            ('adag_a', m * m),
            ('a_a', pairs),
            ('adag_adag', pairs),
            ('factorial', m),
            ('number_pair', m * (m - 1) // 2),
        ]
        offsets = {}
        position = 0
        for name, width in blocks:
            offsets[name] = position
            position += width
        object.__setattr__(self, 'offsets', offsets)
        object.__setattr__(self, 'size', position)

    def _check(self, *modes: int):
        for mode in modes:
            if not 1 <= mode <= self.modes:
                raise IndexError(f"mode {mode} outside 1..{self.modes}")

    def _pair_index(self, i: int, j: int) -> int:
        """Index of the unordered pair (i, j), i <= j, among upper-triangular pairs."""
        i, j = min(i, j) - 1, max(i, j) - 1
        return i * self.modes - i * (i - 1) // 2 + (j - i)

    def _strict_pair_index(self, i: int, j: int) -> int:
        i, j = min(i, j) - 1, max(i, j) - 1
        return i * (2 * self.modes - i - 1) // 2 + (j - i - 1)

    def a(self, j: int) -> int:
        self._check(j)
        return self.offsets['a'] + j - 1

    def adag(self, j: int) -> int:
        self._check(j)
        return self.offsets['adag'] + j - 1

    def adag_a(self, i: int, j: int) -> int:
        self._check(i, j)
        return self.offsets['adag_a'] + (i - 1) * self.modes + (j - 1)

    def a_a(self, i: int, j: int) -> int:
        self._check(i, j)
        return self.offsets['a_a'] + self._pair_index(i, j)

    def adag_adag(self, i: int, j: int) -> int:
        self._check(i, j)
        return self.offsets['adag_adag'] + self._pair_index(i, j)

    def factorial(self, j: int) -> int:
        self._check(j)
        return self.offsets['factorial'] + j - 1

    def number_pair(self, i: int, j: int) -> int:
        self._check(i, j)
        if i == j:
            raise IndexError("number_pair needs two distinct modes; use factorial for i == j")
        return self.offsets['number_pair'] + self._strict_pair_index(i, j)


class MomentView:
    """Named access to a (T, K) complex array laid out by a MomentLayout."""

    def __init__(self, values: np.ndarray, layout: MomentLayout):
        self.values = values
        self.layout = layout

    def a(self, j: int) -> np.ndarray:
        return self.values[:, self.layout.a(j)]

    def adag(self, j: int) -> np.ndarray:
        return self.values[:, self.layout.adag(j)]

    def adag_a(self, i: int, j: int) -> np.ndarray:
        return self.values[:, self.layout.adag_a(i, j)]

    def a_a(self, i: int, j: int) -> np.ndarray:
        return self.values[:, self.layout.a_a(i, j)]

    def adag_adag(self, i: int, j: int) -> np.ndarray:
        return self.values[:, self.layout.adag_adag(i, j)]

    def factorial(self, j: int) -> np.ndarray:
        return self.values[:, self.layout.factorial(j)]

    def number_pair(self, i: int, j: int) -> np.ndarray:
        """<a_i^dag a_i a_j^dag a_j> for i != j (the operators commute)."""
        return self.values[:, self.layout.number_pair(i, j)]

    def population(self, j: int) -> np.ndarray:
        return self.adag_a(j, j).real


@dataclass
class MomentSet:
    """Moments on a time grid, with the covariance of their ensemble means.

    Args:
        time: Time grid, shape (T,)
        values: Flat moment vectors, shape (T, K), complex
        modes: Number of bosonic modes described
        covariance: Covariance of the estimated means over the real/imaginary
            split [Re v, Im v], shape (T, 2K, 2K); None for exact moments
        n_traj_used: Trajectories contributing to the averages
        n_diverged: Trajectories flagged as diverged and excluded
    """
    time: np.ndarray
    values: np.ndarray
    modes: int = 3
    covariance: Optional[np.ndarray] = None
    n_traj_used: int = 0
    n_diverged: int = 0

    def __post_init__(self):
        self.time = np.asarray(self.time, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2 or self.values.shape != (self.time.size, self.layout.size):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"({self.time.size}, {self.layout.size})"
            )
        if self.covariance is not None:
            k2 = 2 * self.layout.size
            if self.covariance.shape != (self.time.size, k2, k2):
                raise ValueError(f"covariance shape {self.covariance.shape} is not (T, {k2}, {k2})")

    @property
    def layout(self) -> MomentLayout:
        return moment_layout(self.modes)

    @property
    def view(self) -> MomentView:
        return MomentView(self.values, self.layout)

    @property
    def is_exact(self) -> bool:
        return self.covariance is None

    def standard_errors(self) -> np.ndarray:
        """Standard error of every entry as a complex array (SE of Re) + i (SE of Im)."""
        if self.covariance is None:
            return np.zeros_like(self.values)
        k = self.layout.size
        diag = np.clip(np.diagonal(self.covariance, axis1=1, axis2=2), 0.0, None)
        return np.sqrt(diag[:, :k]) + 1j * np.sqrt(diag[:, k:])

    def imaginary_population_ratio(self) -> np.ndarray:
        """|Im <a_j^dag a_j>| in units of its standard error, shape (T, M).

        Exact moments have real populations and give zeros.
        """
        indices = [self.layout.adag_a(j, j) for j in range(1, self.modes + 1)]
        if self.covariance is None:
            return np.zeros((self.time.size, self.modes))
        imaginary = np.abs(self.values[:, indices].imag)
        errors = self.standard_errors()[:, indices].imag
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.where(errors > 0, imaginary / errors, 0.0)


_LAYOUTS: Dict[int, MomentLayout] = {}


def moment_layout(modes: int) -> MomentLayout:
    """Shared layout instance for the given number of modes."""
    if modes not in _LAYOUTS:
        _LAYOUTS[modes] = MomentLayout(modes)
    return _LAYOUTS[modes]
