"""Parser for flat key = value run configuration files and overrides."""
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from src.constants import PRESETS
from src.errors import ConfigError
from src.model.config import SystemConfig
from src.analyzers.beamsplitter import BsConfig

logger = logging.getLogger(__name__)

# Accepted spellings for each canonical key
KEY_ALIASES = {
    'j': 'J',
    'chi': 'chi',
    'n_atoms': 'n_atoms',
    'atoms': 'n_atoms',
    'n': 'n_atoms',
    'initial_state': 'initial_state',
    'state': 'initial_state',
    't_max': 't_max',
    'tmax': 't_max',
    'dt': 'dt',
    'n_traj': 'n_traj',
    'trajectories': 'n_traj',
    'seed': 'seed',
    'grid_step': 'grid_step',
    'workers': 'workers',
    'scheme': 'scheme',
    'eta': 'eta',
    'input': 'input_a',
    'input_a': 'input_a',
    'squeeze': 'r',
    'r': 'r',
}

FLOAT_KEYS = {'J', 'chi', 't_max', 'dt', 'grid_step', 'eta', 'r'}
INT_KEYS = {'n_traj', 'seed', 'workers'}
PHYSICAL_KEYS = ('J', 'chi', 'n_atoms', 'initial_state')
SYSTEM_KEYS = ('J', 'chi', 'n_atoms', 'initial_state', 't_max', 'dt', 'n_traj', 'seed',
               'grid_step', 'workers', 'scheme')
BEAMSPLITTER_KEYS = ('eta', 'input_a', 'n_atoms', 'r')


class ConfigParser:
    """Reads configuration text, presets and command-line overrides into typed configs."""

    def canonical_key(self, key: str) -> str:
        canonical = KEY_ALIASES.get(key.strip().lower().replace('-', '_'))
        if canonical is None:
            raise ConfigError(f"Unknown configuration key '{key}'")
        return canonical

    def parse_value(self, key: str, raw: Any) -> Any:
        """Convert one raw value to the type its key expects."""
        if not isinstance(raw, str):
            if key == 'n_atoms' and isinstance(raw, float) and raw.is_integer():
                return int(raw)
            return raw
        text = raw.strip()
        try:
            if key in FLOAT_KEYS:
                return float(text)
            if key in INT_KEYS:
                return int(float(text)) if 'e' in text.lower() else int(text, 0)
            if key == 'n_atoms':
                number = float(text)
                return int(number) if number.is_integer() else number
        except ValueError:
            raise ConfigError(f"Invalid value for {key}: '{raw}'")
        return text

    def parse_text(self, text: str, source: str = '<string>') -> Dict[str, Any]:
        """
        Parse flat `key = value` lines; blank lines and `#` comments are skipped.

        Args:
            text: Configuration text
            source: Name used in error messages

        Returns:
            Dict[str, Any]: Canonical key to typed value
        """
        values: Dict[str, Any] = {}
        for number, line in enumerate(text.splitlines(), start=1):
            content = line.split('#', 1)[0].strip()
            if not content:
                continue
            if '=' not in content:
                raise ConfigError(f"{source}:{number}: expected 'key = value', got '{line.strip()}'")
            raw_key, raw_value = content.split('=', 1)
            key = self.canonical_key(raw_key)
            if key in values:
                logger.warning(f"{source}:{number}: '{key}' set more than once; last value wins")
            values[key] = self.parse_value(key, raw_value)
        return values

    def parse_file(self, path: str) -> Dict[str, Any]:
        """
        Read and parse a configuration file.

        Args:
            path: Path to a key = value file

        Returns:
            Dict[str, Any]: Canonical key to typed value

        Raises:
            ConfigError: If the file is missing or malformed
        """
        file_path = Path(path)
        if not file_path.exists():
            raise ConfigError(f"Configuration file not found: {file_path}")
        return self.parse_text(file_path.read_text(encoding='utf-8'), str(file_path))

    def parse_preset(self, name: str) -> Dict[str, Any]:
        """Configuration values of a named preset, without its mode and description."""
        if name not in PRESETS:
            raise ConfigError(f"Unknown preset '{name}' (available: {', '.join(sorted(PRESETS))})")
        return {k: v for k, v in PRESETS[name].items() if k not in ('mode', 'description')}

    def merge(self, base: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
        """Overrides win over base values; None overrides are ignored."""
        merged = dict(base)
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[self.canonical_key(key)] = self.parse_value(self.canonical_key(key), value)
        return merged

    def build_system_config(self, values: Mapping[str, Any]) -> SystemConfig:
        """
        Build a validated three-well configuration.

        Args:
            values: Merged canonical values

        Returns:
            SystemConfig: Frozen configuration

        Raises:
            ConfigError: If a physical parameter is missing or a value is invalid
        """
        missing = [key for key in PHYSICAL_KEYS if key not in values]
        if missing:
            raise ConfigError(f"Missing physical parameter(s): {', '.join(missing)}")
        return SystemConfig(**{key: values[key] for key in SYSTEM_KEYS if key in values})

    def build_bs_config(self, values: Mapping[str, Any]) -> BsConfig:
        if 'input_a' not in values:
            raise ConfigError("Missing beamsplitter parameter: input")
        return BsConfig(**{key: values[key] for key in BEAMSPLITTER_KEYS if key in values})
