#!/usr/bin/env python3
"""
Settings Manager for MultiCoint
Loads JSON settings merged over defaults; command-line flags override them

Version: 1.0.0
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).parent.parent


def default_settings() -> Dict[str, Any]:
    """
    Built-in defaults

    Returns:
        Fresh dictionary of default settings
    """
    return {
        "kernel": "parzen",
        "bandwidth": "1*T^0.25",
        "rank_rel_tol": 1e-8,
        "rank_abs_floor": 1e-12,
        "solve_rcond": 1e-12,
        "workers": os.cpu_count() or 1,
        "seed": 42,
        "language": "en",
        "density_grid_points": 512,
        "results_db": str(PROJECT_ROOT / "data" / "results.db"),
        "allow_degenerate": False,
    }


class SettingsManager:
    """
    Application settings backed by data/settings.json
    """

    def __init__(self, settings_file: Optional[Union[str, Path]] = None):
        """
        Initialize settings manager

        Args:
            settings_file: JSON file to load and save (defaults to data/settings.json)
        """
        if settings_file is None:
            settings_file = PROJECT_ROOT / "data" / "settings.json"
        self.settings_file = Path(settings_file)
        self.settings = self.load_settings()

    def load_settings(self) -> Dict[str, Any]:
        """
        Load settings, merged over the defaults so every key exists

        Returns:
            Dictionary of settings
        """
        settings = default_settings()
        try:
            if self.settings_file.exists():
                with open(self.settings_file, 'r', encoding='utf-8') as f:
                    loaded = json.load(f)
                if not isinstance(loaded, dict):
                    raise ValueError("top level must be an object")
                settings.update(loaded)
        except (OSError, ValueError) as e:
            logger.warning("Error loading settings from %s: %s; using defaults", self.settings_file, e)
        return settings

    def save_settings(self) -> None:
        """
        Write the current settings as JSON
        """
        self.settings_file.parent.mkdir(parents=True, exist_ok=True)
        with open(self.settings_file, 'w', encoding='utf-8') as f:
            json.dump(self.settings, f, indent=2, ensure_ascii=False)
        logger.debug("saved settings to %s", self.settings_file)

    def get(self, key: str, default: Any = None) -> Any:
        return self.settings.get(key, default)

    def set(self, key: str, value: Any) -> None:
        self.settings[key] = value
