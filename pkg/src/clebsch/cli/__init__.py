"""Scenario runner and command line interface."""

from .config import ScenarioConfig, load_config, validate_config
from .main import main

__all__ = ["ScenarioConfig", "load_config", "main", "validate_config"]
