"""Utility functions for ontosem."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "ONTOSEM_CONFIG"


def load_config(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Load configuration from a YAML file.

    When no path is given, ``.env`` is read and the file named by ``ONTOSEM_CONFIG``
    is used; without either, the configuration is empty.

    Args:
        config_path: Path to the configuration file

    Returns:
        Configuration dictionary
    """
    if config_path is None:
        load_dotenv()
        config_path = os.environ.get(CONFIG_ENV_VAR)
        if not config_path:
            return {}

    path = Path(config_path)
    if not path.exists():
        logger.warning(f"Configuration file not found: {path}")
        return {}

    try:
        with open(path, "r", encoding="utf-8") as file:
            config = yaml.safe_load(file)
    except (OSError, yaml.YAMLError) as e:
        logger.error(f"Error loading configuration: {e}")
        return {}
    if not isinstance(config, dict):
        logger.warning(f"Configuration file {path} does not hold a mapping; ignored")
        return {}
    return config


def get_config_value(config: Dict[str, Any], key_path: str, default: Any = None) -> Any:
    """
    Get a value from a nested configuration dictionary.

    Args:
        config: Configuration dictionary
        key_path: Path to the key, separated by dots (e.g. "paths.lexicon")
        default: Default value to return if the key is not found

    Returns:
        Value from the configuration or default
    """
    value: Any = config
    for key in key_path.split("."):
        if not isinstance(value, dict) or key not in value:
            return default
        value = value[key]
    return value


def setup_logging(log_file: Optional[str] = None, log_level: int = logging.WARNING) -> None:
    """
    Set up logging configuration.

    Records go to stderr, and also to ``log_file`` when one is given.

    Args:
        log_file: Path to the log file
        log_level: Logging level
    """
    handlers: list = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )
    logger.debug(f"Logging configured with level {log_level}")


def get_project_root() -> Path:
    """
    Get the project root directory.

    Returns:
        Path to the project root directory
    """
    return Path(__file__).parent.parent


def get_data_dir() -> Path:
    return get_project_root() / "data"


def read_text(path: Union[str, Path]) -> str:
    """Read a UTF-8 text file, logging the failure before re-raising."""
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Error reading {path}: {e}")
        raise
