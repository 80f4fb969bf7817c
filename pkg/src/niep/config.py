"""
Configuration management for niep.

Solver tolerances, search budgets and output defaults. Every setting can be
overridden through ``NIEP_``-prefixed environment variables or a ``.env`` file.
"""

from enum import Enum
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class BetaPlacement(str, Enum):
    """Where the staircase constructions put their free beta mass."""

    LOWER = "lower"
    MIDPOINT = "midpoint"


class OutputFormat(str, Enum):
    """Report output formats."""

    JSON = "json"
    TEXT = "text"


class Config(BaseSettings):
    """
    Main configuration class for niep.

    All settings can be configured via:
    1. Environment variables prefixed with NIEP_ (highest priority)
    2. .env file
    3. Default values (lowest priority)
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="NIEP_",
        case_sensitive=False,
        extra="ignore",
    )

    # ===== Tolerances =====
    tolerance: float = Field(
        default=1e-9,
        description="Float-mode nonnegativity tolerance for matrix entries",
        gt=0.0,
        le=1e-2,
    )

    imaginary_tolerance: float = Field(
        default=1e-12,
        description="Largest imaginary residue stripped from a float-mode similarity",
        gt=0.0,
        le=1e-3,
    )

    eigen_tolerance: float = Field(
        default=1e-8,
        description="Maximum eigenvalue residual accepted by the numeric oracle",
        gt=0.0,
        le=1e-1,
    )

    cluster_factor: float = Field(
        default=100.0,
        description="Scale on eps^(1/m)·max(1, ‖M‖) for merging m numeric eigenvalues",
        ge=1.0,
        le=1e6,
    )

    eigen_iteration_factor: int = Field(
        default=500,
        description="QR iteration cap per matrix dimension",
        ge=10,
    )

    # ===== Necessary Conditions =====
    jll_k_max: Optional[int] = Field(
        default=None,
        description="Largest k in the JLL check (None means the spectrum size)",
        ge=1,
    )

    jll_m_max: int = Field(
        default=3,
        description="Largest m in the JLL check",
        ge=1,
    )

    # ===== Construction Defaults =====
    beta_placement: BetaPlacement = Field(
        default=BetaPlacement.LOWER,
        description="Default beta placement for staircase layouts (lower, midpoint)",
    )

    permutation_search: bool = Field(
        default=True,
        description="Try permuted diagonal layouts before reporting inapplicability",
    )

    permutation_cap: int = Field(
        default=2000,
        description="Maximum number of permuted layouts tried",
        ge=1,
    )

    tail_search: bool = Field(
        default=False,
        description="Let the permuted search move positive eigenvalues to 1x1 tail blocks",
    )

    # ===== Parameter Search =====
    grid_points: int = Field(
        default=9,
        description="Grid points per free parameter",
        ge=2,
        le=33,
    )

    grid_budget: int = Field(
        default=200_000,
        description="Maximum grid points evaluated in one search",
        ge=100,
    )

    max_grid_dimension: int = Field(
        default=8,
        description="Free parameter count above which the grid is skipped",
        ge=1,
    )

    descent_iterations: int = Field(
        default=100,
        description="Coordinate descent sweeps after the grid",
        ge=1,
    )

    unbounded_span: float = Field(
        default=4.0,
        description="Half width of the search box on an unbounded side",
        gt=0.0,
    )

    max_denominator: int = Field(
        default=10_000,
        description="Largest denominator used when rationalising a float search point",
        ge=10,
    )

    fm_constraint_cap: int = Field(
        default=5000,
        description="Constraint count that aborts interval propagation",
        ge=10,
    )

    # ===== Output Settings =====
    output_format: OutputFormat = Field(
        default=OutputFormat.TEXT,
        description="Default report format (json, text)",
    )

    # ===== Logging Settings =====
    log_level: str = Field(
        default="WARNING",
        description="Logging level (DEBUG, INFO, WARNING, ERROR)",
    )

    verbose: bool = Field(
        default=False,
        description="Enable verbose output",
    )


# Global configuration instance
config = Config()
