"""Entanglement, steering and EPR witnesses evaluated on moment sets.

Works for sampled moments (with standard errors) and exact ones alike.
Quadratures follow X = a + a^dag, Y = -i(a - a^dag), so the vacuum variance
is 1 and the Duan-Simon separability floor is 4.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from src.constants import DEGENERATE_VARIANCE, DELTA_METHOD_STEP, SERIES_COLUMNS
from src.errors import DegenerateVarianceError
from src.model.moments import MomentSet, MomentView, moment_layout

logger = logging.getLogger(__name__)


def inferred_product(var_a_x, var_b_x, cov_x, var_a_y, var_b_y, cov_y):
    """Reid product of inferred variances V_inf(X_a) V_inf(Y_a), conditioning on mode b."""
    var_b_x = np.asarray(var_b_x, dtype=float)
    var_b_y = np.asarray(var_b_y, dtype=float)
    if np.any(var_b_x < DEGENERATE_VARIANCE) or np.any(var_b_y < DEGENERATE_VARIANCE):
        raise DegenerateVarianceError(
            f"conditioning variance below {DEGENERATE_VARIANCE:g}; inferred variance undefined"
        )
    inferred_x = var_a_x - cov_x ** 2 / var_b_x
    inferred_y = var_a_y - cov_y ** 2 / var_b_y
    return inferred_x * inferred_y


def _view(m) -> MomentView:
    return m.view if isinstance(m, MomentSet) else m


def _cross(v: MomentView, i: int, j: int) -> np.ndarray:
    """|<a_i^dag a_j>|^2 estimated symmetrically as Re(<a_i^dag a_j><a_j^dag a_i>)."""
    return (v.adag_a(i, j) * v.adag_a(j, i)).real


def number_variances(m):
    """(V(N1), V(N2), V(N3), V(N1 - N3)) from normally ordered moments."""
    v = _view(m)
    var = []
    for j in (1, 2, 3):
        n = v.population(j)
        var.append(v.factorial(j).real + n - n ** 2)
    correlation = v.number_pair(1, 3).real - v.population(1) * v.population(3)
    return var[0], var[1], var[2], var[0] + var[2] - 2.0 * correlation


def hz_xi(m, i: int, j: int) -> np.ndarray:
    """Hillery-Zubairy correlation; positive means modes i and j are entangled."""
    v = _view(m)
    return _cross(v, i, j) - v.number_pair(i, j).real


def steering_sigma(m, i: int, j: int) -> np.ndarray:
    """Positive when measurements on j steer mode i."""
    v = _view(m)
    return hz_xi(v, i, j) - 0.5 * v.population(i)


def bell_zeta(m, i: int, j: int) -> np.ndarray:
    v = _view(m)
    return steering_sigma(v, i, j) - 0.5 * v.population(j) - 0.25


def _mean_x(v: MomentView, j: int) -> np.ndarray:
    return (v.a(j) + v.adag(j)).real


def _mean_y(v: MomentView, j: int) -> np.ndarray:
    return (-1j * (v.a(j) - v.adag(j))).real


def quadrature_variances(m, j: int):
    """(V(Xj), V(Yj))."""
    v = _view(m)
    n = v.population(j)
    anomalous = (v.a_a(j, j) + v.adag_adag(j, j)).real
    vx = 1.0 + 2.0 * n + anomalous - _mean_x(v, j) ** 2
    vy = 1.0 + 2.0 * n - anomalous - _mean_y(v, j) ** 2
    return vx, vy


def quadrature_covariances(m, i: int, j: int):
    """(V(Xi, Xj), V(Yi, Yj)) for distinct modes."""
    v = _view(m)
    exchange = (v.adag_a(i, j) + v.adag_a(j, i)).real
    anomalous = (v.a_a(i, j) + v.adag_adag(i, j)).real
    cov_x = anomalous + exchange - _mean_x(v, i) * _mean_x(v, j)
    cov_y = -anomalous + exchange - _mean_y(v, i) * _mean_y(v, j)
    return cov_x, cov_y


@dataclass
class PairQuadratures:
    """Quadrature statistics of one mode pair; gamma is Reid's product for steering i from j."""
    vx_i: np.ndarray
    vy_i: np.ndarray
    vx_j: np.ndarray
    vy_j: np.ndarray
    cov_x: np.ndarray
    cov_y: np.ndarray
    ds_plus: np.ndarray
    ds_minus: np.ndarray
    gamma: np.ndarray


def quadrature_pair(m, i: int, j: int) -> PairQuadratures:
    """DS+ = V(Xi + Xj) + V(Yi - Yj), DS- = V(Xi - Xj) + V(Yi + Yj)."""
    v = _view(m)
    vx_i, vy_i = quadrature_variances(v, i)
    vx_j, vy_j = quadrature_variances(v, j)
    cov_x, cov_y = quadrature_covariances(v, i, j)
    both = vx_i + vx_j + vy_i + vy_j
    return PairQuadratures(
        vx_i=vx_i, vy_i=vy_i, vx_j=vx_j, vy_j=vy_j, cov_x=cov_x, cov_y=cov_y,
        ds_plus=both + 2.0 * (cov_x - cov_y),
        ds_minus=both - 2.0 * (cov_x - cov_y),
        gamma=inferred_product(vx_i, vx_j, cov_x, vy_i, vy_j, cov_y),
    )


def quadrature_block(m) -> Dict[str, np.ndarray]:
    """Single-mode variances, covariances, DS sums and Reid products for pairs (1,3) and (1,2)."""
    v = _view(m)
    block = {}
    for j in (1, 2, 3):
        block[f'VX{j}'], block[f'VY{j}'] = quadrature_variances(v, j)
    for partner in (3, 2):
        pair = quadrature_pair(v, 1, partner)
        block[f'VX1X{partner}'] = pair.cov_x
        block[f'VY1Y{partner}'] = pair.cov_y
        block[f'DSp1{partner}'] = pair.ds_plus
        block[f'DSm1{partner}'] = pair.ds_minus
        block[f'gamma1{partner}'] = pair.gamma
    return block


def witness_table(m) -> Dict[str, np.ndarray]:
    """All time-series witnesses keyed by output column name."""
    v = _view(m)
    table = {f'N{j}': v.population(j) for j in (1, 2, 3)}
    table['VN1'], table['VN2'], table['VN3'], table['VN1m3'] = number_variances(v)
    table['xi13'] = hz_xi(v, 1, 3)
    table['sigma13'] = steering_sigma(v, 1, 3)
    table['sigma31'] = steering_sigma(v, 3, 1)
    table['zeta13'] = bell_zeta(v, 1, 3)
    table.update(quadrature_block(v))
    return {name: table[name] for name in SERIES_COLUMNS if name != 't'}


def delta_method_errors(values: np.ndarray, covariance: np.ndarray, modes: int,
                        evaluate: Callable[[MomentView], Dict[str, np.ndarray]]) -> Dict[str, np.ndarray]:
    """First-order standard errors of every output of `evaluate`.

    Gradients are central differences over the real and imaginary parts of
    each moment, taken at all time points at once.
    """
    layout = moment_layout(modes)
    size = layout.size
    gradients: Dict[str, np.ndarray] = {}
    for component in range(2 * size):
        k = component % size
        unit = 1.0 if component < size else 1j
        step = DELTA_METHOD_STEP * (1.0 + np.abs(values[:, k]))
        upper = values.copy()
        lower = values.copy()
        upper[:, k] += unit * step
        lower[:, k] -= unit * step
        high = evaluate(MomentView(upper, layout))
        low = evaluate(MomentView(lower, layout))
        for name in high:
            if name not in gradients:
                gradients[name] = np.zeros((values.shape[0], 2 * size))
            gradients[name][:, component] = (high[name] - low[name]) / (2.0 * step)
    errors = {}
    for name, gradient in gradients.items():
        variance = np.einsum('ti,tij,tj->t', gradient, covariance, gradient)
        errors[name] = np.sqrt(np.clip(variance, 0.0, None))
    return errors


@dataclass
class CriteriaReport:
    """Witness values per time point, with standard errors for sampled moments."""
    time: np.ndarray
    values: Dict[str, np.ndarray]
    errors: Optional[Dict[str, np.ndarray]] = None

    def columns(self) -> Dict[str, np.ndarray]:
        """Output table: t, every witness, then '<name>_se' columns when errors exist."""
        table = {'t': self.time}
        table.update(self.values)
        if self.errors is not None:
            table.update({f'{name}_se': self.errors[name] for name in self.values})
        return table


def _flag_negative_variances(report: CriteriaReport):
    if report.errors is None:
        return
    for name in ('VN1', 'VN2', 'VN3', 'VN1m3', 'DSp13', 'DSm13', 'DSp12', 'DSm12'):
        margin = report.values[name] + 3.0 * report.errors[name]
        if np.any(margin < 0):
            logger.warning(f"{name} falls more than 3 standard errors below zero at "
                           f"{int(np.sum(margin < 0))} time point(s)")


def criteria_report(moments: MomentSet) -> CriteriaReport:
    """Evaluate every witness; sampled moments also get delta-method errors."""
    if moments.modes != 3:
        raise ValueError(f"criteria_report needs a three-mode moment set, got {moments.modes}")
    values = witness_table(moments)
    errors = None
    if not moments.is_exact:
        try:
            errors = delta_method_errors(moments.values, moments.covariance, 3, witness_table)
        except DegenerateVarianceError:
            logger.warning("Perturbed moments hit a degenerate variance; standard errors omitted")
    report = CriteriaReport(time=moments.time, values=values, errors=errors)
    _flag_negative_variances(report)
    return report
