"""Lossless optical beamsplitter with one input port in vacuum.

Outputs are a_out = sqrt(eta) a + sqrt(1 - eta) b and
b_out = sqrt(eta) b - sqrt(1 - eta) a. The quadrature transform holds for any
eta; the number-based closed forms are for the balanced splitter only, and
unbalanced criteria go through the exact oracle.
"""
import enum
import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict

import numpy as np

from src.analyzers.criteria import hz_xi, inferred_product, quadrature_pair, steering_sigma
from src.errors import ConfigError
from src.simulators.oracle import (
    BsInputState,
    CoherentInput,
    FockInput,
    SqueezedVacuumInput,
    bs_exact,
)

logger = logging.getLogger(__name__)

BALANCED = 0.5


class BsInput(str, enum.Enum):
    """State entering port a."""
    FOCK = 'fock'
    COHERENT = 'coherent'
    SQUEEZED = 'squeezed'

    @classmethod
    def parse(cls, value) -> 'BsInput':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigError(f"Unknown beamsplitter input '{value}' (expected fock, coherent or squeezed)")


@dataclass(frozen=True)
class BsConfig:
    """Beamsplitter run parameters.

    Args:
        eta: Intensity transmission of port a into output a
        input_a: Family of the port-a input state
        n_atoms: Number (Fock) or mean number (coherent) of the port-a input
        r: Squeeze parameter, with V(X) = exp(-r) and V(Y) = exp(r)
    """
    eta: float = BALANCED
    input_a: BsInput = BsInput.FOCK
    n_atoms: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'input_a', BsInput.parse(self.input_a))
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError(f"eta must lie in [0, 1], got {self.eta}")
        if self.r < 0:
            raise ConfigError(f"squeeze parameter r must be non-negative, got {self.r}")
        if self.n_atoms < 0:
            raise ConfigError(f"input number must be non-negative, got {self.n_atoms}")
        if self.input_a is BsInput.FOCK and float(self.n_atoms) != int(self.n_atoms):
            raise ConfigError(f"Fock input needs an integer number, got {self.n_atoms}")

    def oracle_input(self) -> BsInputState:
        if self.input_a is BsInput.FOCK:
            return FockInput(int(self.n_atoms))
        if self.input_a is BsInput.COHERENT:
            return CoherentInput(complex(math.sqrt(self.n_atoms), 0.0))
        return SqueezedVacuumInput(self.r)


@dataclass(frozen=True)
class InputStatistics:
    mean_n: float
    var_n: float
    vx: float
    vy: float


def input_statistics(config: BsConfig) -> InputStatistics:
    """Number and quadrature statistics of the port-a input."""
    n = float(config.n_atoms)
    if config.input_a is BsInput.FOCK:
        return InputStatistics(n, 0.0, 2.0 * n + 1.0, 2.0 * n + 1.0)
    if config.input_a is BsInput.COHERENT:
        return InputStatistics(n, n, 1.0, 1.0)
    s = 0.5 * config.r
    mean = math.sinh(s) ** 2
    return InputStatistics(mean, 2.0 * mean * math.cosh(s) ** 2, math.exp(-config.r), math.exp(config.r))


def _require_balanced(config: BsConfig):
    if config.eta != BALANCED:
        raise ConfigError(
            f"closed forms cover eta = 0.5 only (got {config.eta}); use the exact oracle instead"
        )


def bs_xi(config: BsConfig) -> float:
    _require_balanced(config)
    stats = input_statistics(config)
    return 0.25 * (stats.mean_n - stats.var_n)


def bs_sigma(config: BsConfig) -> float:
    """Sigma_ab = Sigma_ba; never positive."""
    _require_balanced(config)
    return -0.25 * input_statistics(config).var_n


@dataclass(frozen=True)
class BsQuadratureTable:
    vxa_out: float
    vya_out: float
    vxb_out: float
    vyb_out: float
    cov_x: float
    cov_y: float


def bs_transform_quadratures(config: BsConfig) -> BsQuadratureTable:
    """Output variances and covariances for any eta, vacuum in port b."""
    stats = input_statistics(config)
    eta = config.eta
    mix = math.sqrt(eta * (1.0 - eta))
    vxb, vyb = 1.0, 1.0
    return BsQuadratureTable(
        vxa_out=eta * stats.vx + (1.0 - eta) * vxb,
        vya_out=eta * stats.vy + (1.0 - eta) * vyb,
        vxb_out=eta * vxb + (1.0 - eta) * stats.vx,
        vyb_out=eta * vyb + (1.0 - eta) * stats.vy,
        cov_x=mix * (vxb - stats.vx),
        cov_y=mix * (vyb - stats.vy),
    )


def bs_duan_simon(config: BsConfig):
    """(DS+, DS-) = (2[V(Xb) + V(Ya)], 2[V(Xa) + V(Yb)]) in terms of the inputs."""
    _require_balanced(config)
    table = bs_transform_quadratures(config)
    sums = table.vxa_out + table.vxb_out + table.vya_out + table.vyb_out
    shift = 2.0 * (table.cov_x - table.cov_y)
    return sums + shift, sums - shift


def bs_reid_gamma(config: BsConfig) -> float:
    """Reid product for inferring output a from output b."""
    _require_balanced(config)
    table = bs_transform_quadratures(config)
    return float(inferred_product(
        table.vxa_out, table.vxb_out, table.cov_x, table.vya_out, table.vyb_out, table.cov_y,
    ))


def bs_report(config: BsConfig) -> Dict[str, float]:
    """Closed-form witness table for the balanced splitter."""
    ds_plus, ds_minus = bs_duan_simon(config)
    table = bs_transform_quadratures(config)
    sigma = bs_sigma(config)
    return {
        'xi_ab': bs_xi(config),
        'sigma_ab': sigma,
        'sigma_ba': sigma,
        'DSp': ds_plus,
        'DSm': ds_minus,
        'gamma': bs_reid_gamma(config),
        'VXa_out': table.vxa_out,
        'VYa_out': table.vya_out,
        'VXb_out': table.vxb_out,
        'VYb_out': table.vyb_out,
        'VXaXb_out': table.cov_x,
        'VYaYb_out': table.cov_y,
    }


def bs_exact_report(config: BsConfig) -> Dict[str, float]:
    """The bs_report table evaluated on exact oracle moments, for any eta."""
    result = bs_exact(config.oracle_input(), config.eta)
    view = result.moments.view
    pair = quadrature_pair(view, 1, 2)
    columns = {
        'xi_ab': hz_xi(view, 1, 2),
        'sigma_ab': steering_sigma(view, 1, 2),
        'sigma_ba': steering_sigma(view, 2, 1),
        'DSp': pair.ds_plus,
        'DSm': pair.ds_minus,
        'gamma': pair.gamma,
        'VXa_out': pair.vx_i,
        'VYa_out': pair.vy_i,
        'VXb_out': pair.vx_j,
        'VYb_out': pair.vy_j,
        'VXaXb_out': pair.cov_x,
        'VYaYb_out': pair.cov_y,
    }
    report = {name: float(np.asarray(value).reshape(-1)[0]) for name, value in columns.items()}
    report['tail_mass'] = result.tail_mass
    report['cutoff'] = result.cutoff
    logger.info(f"Exact beamsplitter ({config.input_a.value}): cutoff {result.cutoff}, "
                f"tail mass {result.tail_mass:.2e}")
    return report


def describe(config: BsConfig) -> Dict[str, object]:
    description = asdict(config)
    description['input_a'] = config.input_a.value
    return description
