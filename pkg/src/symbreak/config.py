from logging import getLogger
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field

from . import constants

default_logger = getLogger(__name__)


class SymbreakConfig(BaseModel):
    """Numeric yardsticks shared by the CLI and the verification suite."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    comparison_tolerance: float = Field(constants.COMPARISON_TOLERANCE, gt=0)
    grouping_tolerance: float = Field(constants.GROUPING_TOLERANCE, gt=0)
    unitarity_tolerance: float = Field(constants.UNITARITY_TOLERANCE, gt=0)
    unimodular_tolerance: float = Field(constants.UNIMODULAR_TOLERANCE, gt=0)
    series_tolerance: float = Field(constants.SERIES_TOLERANCE, gt=0)
    series_max_total_order: int = Field(constants.SERIES_MAX_TOTAL_ORDER, ge=2)
    b_zero_tolerance: float = Field(constants.B_ZERO_TOLERANCE, ge=0)
    m_zero_tolerance: float = Field(constants.M_ZERO_TOLERANCE, ge=0)
    condition_limit: float = Field(constants.CONDITION_LIMIT, gt=1)
    convergence_tolerance: float = Field(constants.CONVERGENCE_TOLERANCE, gt=0)
    seed: int = Field(constants.DEFAULT_SEED, ge=0, lt=2**64)
    workers: int = Field(1, ge=1)


DEFAULT_CONFIG = SymbreakConfig()


def load_config(config_path: Path | None = None) -> SymbreakConfig:
    """Load a configuration from a JSON file.

    Args:
        config_path: Path to the JSON file. If None, the defaults are returned.

    Returns:
        The validated configuration.
    """
    if config_path is None:
        return DEFAULT_CONFIG

    if not config_path.is_file():
        msg = f"Config file {config_path} does not exist."
        raise FileNotFoundError(msg)

    config = SymbreakConfig.model_validate_json(config_path.read_text())
    default_logger.debug("Loaded configuration from %s", config_path)
    return config
