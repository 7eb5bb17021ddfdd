"""Configuration management module for signalscope.

This module reads the environment once and hands out the defaults the
command-line front end needs: the search seed, the debug switch, the signaling
threshold and search budgets.
"""

import os
from typing import Optional

from .optimizer import SearchConfig
from .signaling import DEFAULT_THRESHOLD


class ConfigManager:
    """Manages configuration settings for signalscope.

    Attributes:
        _seed (int): Default seed, from SIGNALSCOPE_SEED or 0.
        _debug (bool): Whether DEBUG=1 was set.
    """

    SEED_VARIABLE = "SIGNALSCOPE_SEED"

    def __init__(self):
        """Initialize the configuration manager from environment variables.

        Raises:
            ValueError: If SIGNALSCOPE_SEED is set but not an integer.
        """
        raw_seed = os.getenv(self.SEED_VARIABLE)
        if raw_seed is None or raw_seed.strip() == "":
            self._seed = 0
        else:
            try:
                self._seed = int(raw_seed)
            except ValueError:
                raise ValueError(f"{self.SEED_VARIABLE} must be an integer, got {raw_seed!r}")
        self._debug = os.getenv("DEBUG") == "1"

    def get_seed(self, override: Optional[int] = None) -> int:
        """Seed to use; a command-line value wins over the environment."""
        return override if override is not None else self._seed

    def is_debug(self) -> bool:
        return self._debug

    def get_default_threshold(self) -> float:
        """Signaling threshold in bits for noiseless simulation."""
        return DEFAULT_THRESHOLD

    def get_search_config(
        self, seed: Optional[int] = None, restarts: Optional[int] = None
    ) -> SearchConfig:
        """Search budget with command-line overrides applied.

        Args:
            seed: Seed override.
            restarts: Restart count override.

        Returns:
            SearchConfig: Defaults from SearchConfig with the overrides.
        """
        defaults = SearchConfig()
        return SearchConfig(
            restarts=restarts if restarts is not None else defaults.restarts,
            max_iterations=defaults.max_iterations,
            tolerance=defaults.tolerance,
            seed=self.get_seed(seed),
        )
