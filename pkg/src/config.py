"""Configuration management for the QEI laboratory."""

import math
from pathlib import Path
from typing import Literal, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict

Convention = Literal["plain", "normalized"]


class Settings(BaseSettings):
    """Application settings with environment variable support.

    All settings can be overridden via environment variables with QEI_ prefix.
    Example: QEI_GRID_NODES=512
    """

    model_config = SettingsConfigDict(
        env_prefix="QEI_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Fourier convention: plain is ∫dt e^{iωt} f(t), normalized adds (2π)^{-1/2}
    transform_convention: Convention = "plain"

    # Rapidity grid
    theta_cutoff: float = 8.0
    grid_nodes: int = 256
    ladder: list[tuple[float, int]] = [(8.0, 128), (8.0, 256), (12.0, 512)]

    # Tolerances
    bound_tolerance: float = 1e-6
    hermiticity_tolerance: float = 1e-10
    eigen_residual_tolerance: float = 1e-10

    # Adaptive quadrature (escalating subdivision limit)
    quad_epsabs: float = 1e-10
    quad_epsrel: float = 1e-10
    quad_limit: int = 200
    quad_max_attempts: int = 4
    quad_limit_growth: float = 4.0

    # Criteria
    scan_theta_max: float = 40.0
    scan_samples: int = 4001
    scan_epsilon: float = 1e-9
    classify_margin: float = 0.01

    # Cutoff validation for witness states
    boundary_mass_tolerance: float = 1e-8
    boundary_width: float = 1.0
    cutoff_extension: float = 4.0
    max_cutoff_extensions: int = 3

    # sinh-Gordon minimal solution table
    sinh_gordon_table_step: float = 0.02
    sinh_gordon_table_max: float = 60.0

    # Q profile export
    q_table_max: float = 10.0
    q_table_samples: int = 901

    # Output
    output_dir: Path = Path("out")

    @property
    def effective_ladder(self) -> list[tuple[float, int]]:
        """Grid ladder, falling back to the single (theta_cutoff, grid_nodes) stage."""
        if self.ladder:
            return [(float(theta), int(n)) for theta, n in self.ladder]
        return [(self.theta_cutoff, self.grid_nodes)]

    @property
    def convention_factor(self) -> float:
        """Prefactor applied to every Fourier transform."""
        return convention_factor(self.transform_convention)


def convention_factor(convention: Optional[str]) -> float:
    """Prefactor of the transform convention (1 for plain, (2π)^{-1/2} for normalized)."""
    if convention is None or convention == "plain":
        return 1.0
    if convention == "normalized":
        return 1.0 / math.sqrt(2.0 * math.pi)
    raise ValueError(f"Unknown transform convention: {convention!r}")


# Global settings instance (lazy-loaded)
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get the global settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Reset settings (useful for testing)."""
    global _settings
    _settings = None
