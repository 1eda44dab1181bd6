"""Closed-form results for the non-interacting (chi = 0) three-well splitter.

With chi = 0 the Heisenberg equations are linear, a(t) = U(t) a(0), and every
moment follows from U(t) and the moments of the initial state. Wells 1 and 3
start in vacuum throughout, so only the well-2 statistics enter.
"""
import logging
import math
from dataclasses import dataclass, fields
from typing import Dict, Optional, Tuple

import numpy as np

from src.analyzers.criteria import criteria_report, inferred_product
from src.model.config import InitialMoments, OmegaRate, SystemConfig, initial_moments
from src.model.moments import MomentSet, moment_layout

logger = logging.getLogger(__name__)

SQRT_HALF = 1.0 / math.sqrt(2.0)


def _trig(t, omega: OmegaRate):
    phase = omega.omega * np.asarray(t, dtype=float)
    return np.cos(phase), np.sin(phase)


@dataclass(frozen=True)
class ModeCoeffs:
    """U(t) with a_i(t) = sum_k U[i, k] a_k(0)."""
    matrix: np.ndarray

    def unitarity_residual(self) -> float:
        return float(np.linalg.norm(self.matrix.conj().T @ self.matrix - np.eye(3)))

    def __getitem__(self, index):
        return self.matrix[index]


def coefficient_series(t, omega: OmegaRate) -> np.ndarray:
    """U(t) stacked over a time array, shape t.shape + (3, 3)."""
    c, s = _trig(t, omega)
    off = -1j * SQRT_HALF * s
    outer = 0.5 * (c + 1.0)
    inner = 0.5 * (c - 1.0)
    return np.stack([
        np.stack([outer + 0j, off, inner + 0j], axis=-1),
        np.stack([off, c + 0j, off], axis=-1),
        np.stack([inner + 0j, off, outer + 0j], axis=-1),
    ], axis=-2)


def mode_coeffs(t: float, omega: OmegaRate) -> ModeCoeffs:
    """
    Linear mode transfer coefficients at a single time.

    Args:
        t: Evolution time, finite
        omega: Splitting frequency

    Returns:
        ModeCoeffs: 3x3 matrix U with a_i(t) = sum_j U_ij a_j(0)

    Raises:
        ValueError: If t is not finite
    """
    if not math.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    return ModeCoeffs(coefficient_series(float(t), omega))


def populations(t, config: SystemConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Well populations; valid for chi = 0 whatever config.chi says."""
    c, s = _trig(t, config.omega)
    n = float(config.n_atoms)
    side = 0.5 * s ** 2 * n
    return side, c ** 2 * n, side


def number_variances(t, moments: InitialMoments, omega: OmegaRate):
    """(V(N1), V(N2), V(N3), V(N1 - N3)).

    Each atom leaves well 2 for well 1 or well 3 with probability sin^2/2
    apiece, so the imbalance variance is sin^2 <N2(0)> whatever the input
    number statistics.
    """
    c, s = _trig(t, omega)
    n, v = moments.mean_n, moments.var_n
    side = 0.25 * (s ** 4 * v + (1.0 - c ** 4) * n)
    middle = c ** 4 * v + 0.25 * np.sin(2.0 * omega.omega * np.asarray(t, dtype=float)) ** 2 * n
    imbalance = s ** 2 * n
    return side, middle, side, imbalance


def xi13(t, moments: InitialMoments, omega: OmegaRate):
    """Hillery-Zubairy correlation between wells 1 and 3 without collisions."""
    _, s = _trig(t, omega)
    return 0.25 * s ** 4 * (moments.mean_n - moments.var_n)


def sigma13(t, moments: InitialMoments, omega: OmegaRate):
    """Steering correlation; equal to xi13 - <N1>/2 and never positive."""
    _, s = _trig(t, omega)
    s2 = s ** 2
    return 0.25 * s2 * (s2 - 1.0) * moments.mean_n - 0.25 * moments.var_n * s2 ** 2


def quadrature_variances(t, moments: InitialMoments, omega: OmegaRate):
    """(V(X1), V(Y1), V(X2), V(Y2), V(X3), V(Y3))."""
    c, s = _trig(t, omega)
    vx = [moments.vx(w) for w in (1, 2, 3)]
    vy = [moments.vy(w) for w in (1, 2, 3)]
    plus = 0.25 * (c + 1.0) ** 2
    minus = 0.25 * (c - 1.0) ** 2
    half = 0.5 * s ** 2
    return (
        plus * vx[0] + half * vy[1] + minus * vx[2],
        plus * vy[0] + half * vx[1] + minus * vy[2],
        half * vy[0] + c ** 2 * vx[1] + half * vy[2],
        half * vx[0] + c ** 2 * vy[1] + half * vx[2],
        minus * vx[0] + half * vy[1] + plus * vx[2],
        minus * vy[0] + half * vx[1] + plus * vy[2],
    )


def quadrature_covariances(t, moments: InitialMoments, omega: OmegaRate):
    """(V(X1, X3), V(Y1, Y3))."""
    c, s = _trig(t, omega)
    edge = 0.25 * (c ** 2 - 1.0)
    half = 0.5 * s ** 2
    return (
        edge * (moments.vx(1) + moments.vx(3)) + half * moments.vy(2),
        edge * (moments.vy(1) + moments.vy(3)) + half * moments.vx(2),
    )


def quadrature_covariances_pair(t, moments: InitialMoments, omega: OmegaRate, i: int, j: int):
    """(V(Xi, Xj), V(Yi, Yj)) for any pair of wells.

    Uses X_i(t) = sum_k Re U_ik X_k(0) - Im U_ik Y_k(0) with independent
    initial wells whose symmetrized X-Y correlations vanish.
    """
    U = coefficient_series(t, omega)
    re_i, im_i = U[..., i - 1, :].real, U[..., i - 1, :].imag
    re_j, im_j = U[..., j - 1, :].real, U[..., j - 1, :].imag
    vx = np.array([moments.vx(w) for w in (1, 2, 3)])
    vy = np.array([moments.vy(w) for w in (1, 2, 3)])
    cov_x = np.sum(re_i * re_j * vx + im_i * im_j * vy, axis=-1)
    cov_y = np.sum(re_i * re_j * vy + im_i * im_j * vx, axis=-1)
    return cov_x, cov_y


def duan_simon(t, moments: InitialMoments, omega: OmegaRate):
    """(DS+, DS-) for wells 1 and 3; 4 is the separability floor."""
    c, s = _trig(t, omega)
    vx1, vy1 = moments.vx(1), moments.vy(1)
    vx3, vy3 = moments.vx(3), moments.vy(3)
    plus = vy1 + vy3 + c ** 2 * (vx1 + vx3) + 2.0 * s ** 2 * moments.vy(2)
    minus = vx1 + vx3 + c ** 2 * (vy1 + vy3) + 2.0 * s ** 2 * moments.vx(2)
    return plus, minus


def reid_gamma13(t, moments: InitialMoments, omega: OmegaRate):
    """Gamma_13 = V_inf(X1) V_inf(Y1); below 1 signals the EPR paradox."""
    vx1, vy1, _, _, vx3, vy3 = quadrature_variances(t, moments, omega)
    cov_x, cov_y = quadrature_covariances(t, moments, omega)
    return inferred_product(vx1, vx3, cov_x, vy1, vy3, cov_y)


def synthesize_moments(times, config: SystemConfig) -> MomentSet:
    """Exact chi = 0 moment set built from U(t) and the well-2 initial moments."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    start = initial_moments(config)
    layout = moment_layout(3)
    U = coefficient_series(times, config.omega)
    u2 = U[:, :, 1]
    weight = np.abs(u2) ** 2
    values = np.zeros((times.size, layout.size), dtype=complex)
    for i in range(1, 4):
        ui = u2[:, i - 1]
        values[:, layout.a(i)] = ui * start.amplitude
        values[:, layout.adag(i)] = np.conj(ui * start.amplitude)
        for j in range(1, 4):
            uj = u2[:, j - 1]
            values[:, layout.adag_a(i, j)] = np.conj(ui) * uj * start.mean_n
            if j >= i:
                values[:, layout.a_a(i, j)] = ui * uj * start.pair_moment
                values[:, layout.adag_adag(i, j)] = np.conj(ui * uj * start.pair_moment)
            if j > i:
                values[:, layout.number_pair(i, j)] = (
                    weight[:, i - 1] * weight[:, j - 1] * start.factorial_moment
                )
        values[:, layout.factorial(i)] = weight[:, i - 1] ** 2 * start.factorial_moment
    return MomentSet(time=times, values=values, modes=3)


@dataclass
class AnalyticSeries:
    """Every chi = 0 closed form on a time grid."""
    time: np.ndarray
    N1: np.ndarray
    N2: np.ndarray
    N3: np.ndarray
    VN1: np.ndarray
    VN2: np.ndarray
    VN3: np.ndarray
    VN1m3: np.ndarray
    xi13: np.ndarray
    sigma13: np.ndarray
    VX1: np.ndarray
    VY1: np.ndarray
    VX2: np.ndarray
    VY2: np.ndarray
    VX3: np.ndarray
    VY3: np.ndarray
    VX1X3: np.ndarray
    VY1Y3: np.ndarray
    DSp13: np.ndarray
    DSm13: np.ndarray
    gamma13: np.ndarray

    def __post_init__(self):
        if self.time.size > 1 and np.any(np.diff(self.time) <= 0):
            raise ValueError("time grid must be strictly increasing")

    def as_dict(self) -> Dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def analytic_series(config: SystemConfig, times: Optional[np.ndarray] = None) -> AnalyticSeries:
    if config.chi != 0:
        logger.warning(f"Closed forms ignore chi={config.chi}; results describe chi = 0")
    times = config.time_grid() if times is None else np.asarray(times, dtype=float)
    start = initial_moments(config)
    omega = config.omega

    def grid(values):
        return np.broadcast_to(np.asarray(values, dtype=float), times.shape).copy()

    n1, n2, n3 = populations(times, config)
    v1, v2, v3, v13 = number_variances(times, start, omega)
    quads = quadrature_variances(times, start, omega)
    cov_x, cov_y = quadrature_covariances(times, start, omega)
    ds_plus, ds_minus = duan_simon(times, start, omega)
    return AnalyticSeries(
        time=times,
        N1=grid(n1), N2=grid(n2), N3=grid(n3),
        VN1=grid(v1), VN2=grid(v2), VN3=grid(v3), VN1m3=grid(v13),
        xi13=grid(xi13(times, start, omega)),
        sigma13=grid(sigma13(times, start, omega)),
        VX1=grid(quads[0]), VY1=grid(quads[1]),
        VX2=grid(quads[2]), VY2=grid(quads[3]),
        VX3=grid(quads[4]), VY3=grid(quads[5]),
        VX1X3=grid(cov_x), VY1Y3=grid(cov_y),
        DSp13=grid(ds_plus), DSm13=grid(ds_minus),
        gamma13=grid(reid_gamma13(times, start, omega)),
    )


def analytic_report(config: SystemConfig, times: Optional[np.ndarray] = None) -> Dict[str, np.ndarray]:
    """Output table columns: closed forms where they exist, exact synthesized moments otherwise."""
    series = analytic_series(config, times)
    report = criteria_report(synthesize_moments(series.time, config)).values
    columns = {'t': series.time}
    closed = series.as_dict()
    for name, values in report.items():
        columns[name] = closed.get(name, values)
    return columns
