#!/usr/bin/env python3
"""
Solver Defaults Manager

Loads solver constants from a YAML file and resolves each lookup through
user overrides, the file, and a built-in table, in that order.
"""

import copy
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml


BUILTIN_DEFAULTS: Dict[str, Dict[str, Any]] = {
    'mwu': {
        'c_s': 1.0,
        'd_u_factor': 8.0,
    },
    'practical': {
        'relax_rounds': 1.0e6,
        'relax_samples': 1.0e3,
        'max_rounds': 300,
        'max_samples': 4096,
        'explicit_limit': 64,
        'averaged_fail': True,
        'early_certify': True,
        'measured_distortion': True,
        'chi_floor': 1.0e-6,
        'level_rule': 'max',
        'down_round_explicit': False,
        'tighten_duals': True,
    },
    'close_pairs': {
        'k1': 4.0,
        'k2': 4.0,
        'heavy_fraction': 0.5,
        'frequency_threshold': 0.02,
        'prefix_sample_factor': 10.0,
    },
    'sampler': {
        'attempt_budget_factor': 64.0,
        'volume_constant': 100.0,
        'weight_estimator': 'exact',
        'exact_sum_limit': 1_000_000,
        'median_of': 9,
        'explicit_rect_side': 2,
    },
    'aspect_ratio': {
        'grid_side_factor': 100.0,
        'max_retries': 20,
    },
    'tree': {
        'perturbation_constant': 1.0,
    },
    'bench': {
        'approx_limit': 128,
        'exact_limit': 512,
        'tv_limit': 64,
    },
}


class SolverDefaultsManager:
    """
    Resolves solver constants.

    Lookup order:
    1. User overrides (set_user_overrides, usually from the CLI)
    2. The YAML file
    3. BUILTIN_DEFAULTS
    """

    def __init__(self, config_file: Optional[Union[str, Path]] = None, logger: Optional[logging.Logger] = None):
        """
        Initialize the manager.

        Args:
            config_file: Path to the solver defaults YAML file
            logger: Logger instance for output
        """
        self.logger = logger or logging.getLogger(__name__)

        if config_file is None:
            project_root = Path(__file__).resolve().parents[3]
            config_file = project_root / "config" / "solver_defaults.yaml"

        self.config_file = Path(config_file)
        self.config_data: Dict[str, Dict[str, Any]] = {}
        self.user_overrides: Dict[str, Dict[str, Any]] = {}
        self.source = "builtin"

        self._load_configuration()

    def _load_configuration(self):
        """Load solver defaults from the YAML file."""
        try:
            if not self.config_file.exists():
                self.logger.warning(f"Solver defaults file not found: {self.config_file}")
                self.logger.warning("Using built-in solver defaults")
                self._use_builtin_defaults()
                return

            with open(self.config_file, 'r') as f:
                loaded = yaml.safe_load(f) or {}

            if not isinstance(loaded, dict):
                self.logger.error(f"Solver defaults must be a mapping, got {type(loaded).__name__}")
                self._use_builtin_defaults()
                return

            self.config_data = loaded
            self.source = str(self.config_file)
            self.logger.debug(f"Loaded solver defaults from: {self.config_file}")
            self._validate_configuration()

        except yaml.YAMLError as e:
            self.logger.error(f"Error parsing solver defaults YAML: {e}")
            self._use_builtin_defaults()

    def _validate_configuration(self):
        """Warn about unknown sections and keys; they are ignored on lookup."""
        for section, values in self.config_data.items():
            if section not in BUILTIN_DEFAULTS:
                self.logger.warning(f"Unknown section '{section}' in solver defaults")
                continue
            if not isinstance(values, dict):
                self.logger.warning(f"Invalid section '{section}': expected mapping")
                continue
            for key in values:
                if key not in BUILTIN_DEFAULTS[section]:
                    self.logger.warning(f"Unknown key '{section}.{key}' in solver defaults")

    def _use_builtin_defaults(self):
        self.config_data = copy.deepcopy(BUILTIN_DEFAULTS)
        self.source = "builtin"

    def set_user_overrides(self, overrides: Dict[str, Dict[str, Any]]):
        """Set overrides that win over the file, e.g. {'practical': {'max_rounds': 50}}."""
        for section, values in overrides.items():
            if section not in BUILTIN_DEFAULTS:
                self.logger.warning(f"Ignoring override for unknown section '{section}'")
                continue
            self.user_overrides.setdefault(section, {}).update(values)

    def get(self, section: str, key: str) -> Any:
        """Resolve one constant."""
        if section not in BUILTIN_DEFAULTS or key not in BUILTIN_DEFAULTS[section]:
            raise KeyError(f"Unknown solver default: '{section}.{key}'")

        if key in self.user_overrides.get(section, {}):
            return self.user_overrides[section][key]

        file_section = self.config_data.get(section)
        if isinstance(file_section, dict) and key in file_section:
            return file_section[key]

        return BUILTIN_DEFAULTS[section][key]

    def section(self, section: str) -> Dict[str, Any]:
        """Resolve every key of a section."""
        if section not in BUILTIN_DEFAULTS:
            available = sorted(BUILTIN_DEFAULTS.keys())
            raise KeyError(f"Unknown solver defaults section: '{section}'. Available: {available}")
        return {key: self.get(section, key) for key in BUILTIN_DEFAULTS[section]}

    def get_configuration_info(self) -> Dict[str, Any]:
        """Summary of where values come from."""
        return {
            'config_file': str(self.config_file),
            'source': self.source,
            'sections': sorted(BUILTIN_DEFAULTS.keys()),
            'user_overrides': copy.deepcopy(self.user_overrides),
        }
