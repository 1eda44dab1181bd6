"""Run orchestration: dispatch a RunSpec to a simulation path and write its table."""
import dataclasses
import enum
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.analyzers.analytic import analytic_report
from src.analyzers.beamsplitter import BALANCED, BsConfig, bs_exact_report, bs_report, describe
from src.analyzers.criteria import criteria_report
from src.constants import BEAMSPLITTER_COLUMNS, DENSE_DIMENSION_LIMIT, PRESETS, SERIES_COLUMNS
from src.errors import ConfigError
from src.model.config import InitialState, SystemConfig
from src.parsers.config_parser import SYSTEM_KEYS, ConfigParser
from src.simulators.oracle import FockBasis, evolve_series, fock_initial_state
from src.simulators.ppsim import run_ensemble
from src.utils.report_writer import write_table


class RunMode(str, enum.Enum):
    ANALYTIC = 'analytic'
    STOCHASTIC = 'stochastic'
    ORACLE = 'oracle'
    BEAMSPLITTER = 'beamsplitter'
    COMPARE = 'compare'


@dataclass(frozen=True)
class RunSpec:
    """One command-line run.

    Args:
        mode: Simulation path to take
        system: Three-well configuration (all modes but beamsplitter)
        beamsplitter: Beamsplitter configuration (beamsplitter mode)
        out: Output file path
        fmt: Output format, 'csv' or 'json'
        label: Suffix appended to the output file stem, e.g. '_fock'
    """
    mode: RunMode
    system: Optional[SystemConfig] = None
    beamsplitter: Optional[BsConfig] = None
    out: str = 'results.csv'
    fmt: str = 'csv'
    label: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'mode', RunMode(self.mode))
        if self.mode is RunMode.BEAMSPLITTER and self.beamsplitter is None:
            raise ConfigError("beamsplitter mode needs a beamsplitter configuration")
        if self.mode is not RunMode.BEAMSPLITTER and self.system is None:
            raise ConfigError(f"{self.mode.value} mode needs a system configuration")
        if (self.mode is RunMode.COMPARE and self.system.chi != 0
                and self.system.initial_state is not InitialState.FOCK):
            raise ConfigError("compare with chi != 0 needs a Fock input for the exact oracle")
        if self.fmt not in ('csv', 'json'):
            raise ConfigError(f"Unknown output format '{self.fmt}'")

    @property
    def output_path(self) -> Path:
        path = Path(self.out)
        return path.with_name(f"{path.stem}{self.label}{path.suffix}")


def system_description(config: SystemConfig) -> Dict[str, object]:
    """JSON-friendly view of a configuration for output metadata."""
    description = dataclasses.asdict(config)
    description['initial_state'] = config.initial_state.value
    description['omega'] = config.omega.omega
    return description


def preset_specs(name: str, out: str, fmt: str, overrides: Optional[Dict[str, object]] = None) -> List[RunSpec]:
    """Expand a named preset into one RunSpec per initial state it covers."""
    config_parser = ConfigParser()
    merged = config_parser.merge(config_parser.parse_preset(name), overrides)
    values = {k: merged[k] for k in SYSTEM_KEYS if k in merged and k != 'initial_state'}
    states = merged['initial_state']
    states = states if isinstance(states, tuple) else (states,)
    specs = []
    for state in states:
        config = SystemConfig(initial_state=state, **values)
        label = f"_{InitialState.parse(state).value}" if len(states) > 1 else ''
        specs.append(RunSpec(mode=PRESETS[name]['mode'], system=config, out=out, fmt=fmt, label=label))
    return specs


class Runner:
    """Executes RunSpecs and writes their result tables."""

    def __init__(self, spec: RunSpec):
        self.spec = spec
        self.logger = logging.getLogger(__name__)

    def run(self) -> Path:
        """
        Execute the run and write its table.

        Returns:
            Path: Location of the written output file
        """
        mode = self.spec.mode
        self.logger.info(f"Starting {mode.value} run -> {self.spec.output_path}")
        handler = {
            RunMode.ANALYTIC: self.run_analytic,
            RunMode.STOCHASTIC: self.run_stochastic,
            RunMode.ORACLE: self.run_oracle,
            RunMode.BEAMSPLITTER: self.run_beamsplitter,
            RunMode.COMPARE: self.run_compare,
        }[mode]
        columns, metadata = handler()
        metadata = {'mode': mode.value, **metadata}
        return write_table(str(self.spec.output_path), columns, self.spec.fmt, metadata)

    def _system_metadata(self) -> Dict[str, object]:
        return {'config': system_description(self.spec.system)}

    def run_analytic(self):
        columns = analytic_report(self.spec.system)
        return {name: columns[name] for name in SERIES_COLUMNS}, self._system_metadata()

    def _stochastic(self):
        moments = run_ensemble(self.spec.system)
        metadata = self._system_metadata()
        metadata.update(n_traj_used=moments.n_traj_used, n_diverged=moments.n_diverged)
        return criteria_report(moments), metadata

    def run_stochastic(self):
        report, metadata = self._stochastic()
        return report.columns(), metadata

    def _exact(self, config: SystemConfig):
        if config.initial_state is not InitialState.FOCK:
            raise ConfigError("the exact oracle handles Fock inputs only")
        basis = FockBasis(int(config.n_atoms))
        moments = evolve_series(fock_initial_state(basis), config.time_grid(), config.J, config.chi)
        return criteria_report(moments).columns()

    def run_oracle(self):
        return self._exact(self.spec.system), self._system_metadata()

    def reference_columns(self) -> Tuple[Dict[str, np.ndarray], str]:
        """Exact reference for compare mode: oracle when chi != 0, closed forms otherwise."""
        config = self.spec.system
        if config.chi == 0:
            return analytic_report(config), 'analytic'
        dimension = (int(config.n_atoms) + 1) * (int(config.n_atoms) + 2) // 2
        if dimension > DENSE_DIMENSION_LIMIT:
            self.logger.warning(f"Oracle dimension {dimension} exceeds {DENSE_DIMENSION_LIMIT}; "
                                f"falling back to ODE integration")
        return self._exact(config), 'oracle'

    def run_compare(self):
        report, metadata = self._stochastic()
        reference, source = self.reference_columns()
        columns = report.columns()
        for name in report.values:
            difference = report.values[name] - reference[name]
            error = report.errors[name] if report.errors is not None else np.full_like(difference, np.nan)
            with np.errstate(divide='ignore', invalid='ignore'):
                z = np.where(error > 0, difference / error, np.nan)
            columns[f'{name}_ref'] = reference[name]
            columns[f'{name}_diff'] = difference
            columns[f'{name}_z'] = z
            worst = np.nanmax(np.abs(z)) if np.any(np.isfinite(z)) else float('nan')
            self.logger.debug(f"{name}: max |z| = {worst:.2f}")
        metadata['reference'] = source
        return columns, metadata

    def run_beamsplitter(self):
        config = self.spec.beamsplitter
        if config.eta == BALANCED:
            row = bs_report(config)
            source = 'closed-form'
        else:
            self.logger.info(f"eta={config.eta} is unbalanced; evaluating on the exact oracle")
            row = bs_exact_report(config)
            source = 'oracle'
        columns = {name: [row[name]] for name in BEAMSPLITTER_COLUMNS}
        return columns, {'config': describe(config), 'source': source}
