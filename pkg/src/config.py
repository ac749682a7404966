"""
Application configuration: Pydantic BaseSettings with env-variable validation.

All settings are loaded from environment variables (prefix ``SCT_``) or a .env
file and validated at startup. Import `settings` from this module instead of
reading os.environ directly.
"""

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings


# ── Derived project paths (not configurable, always relative to repo root) ──
BASE_DIR = Path(__file__).resolve().parent.parent
SCENARIO_DIR = BASE_DIR / "scenarios"


class Settings(BaseSettings):
    """
    Validated application settings.

    Values are read from environment variables → .env file → defaults (in that order).
    """

    # ── App metadata ──
    app_title: str = "Superconnection Transport Verifier"
    app_version: str = "1.0.0"

    # ── Quadrature defaults ──
    rk4_steps: int = Field(default=2000, ge=1, description="RK4 steps per unit of t")
    gauss_order: int = Field(default=6, ge=1, description="Gauss-Legendre nodes per parameter axis")
    subdivisions: int = Field(default=1, ge=1, description="Composite panels per parameter axis")

    # ── Tolerance table ──
    tol_exact: float = Field(default=1e-10, description="Exact-flavoured checks (flatness, algebra)")
    tol_smooth: float = Field(default=1e-6, description="Smooth-quadrature checks (paths, cubes)")
    tol_pl: float = Field(default=1e-3, description="PL-kink quadrature checks (simplices, k >= 2)")

    # ── Sampling ──
    flatness_grid_points: int = Field(default=10, description="Grid points per axis for flatness (m <= 3)")
    inverse_check_points: int = Field(default=10, description="Random points used to verify g * g_inv = id")
    face_lemma_samples: int = Field(default=100, description="Random rational (w, t) samples per face")

    # ── Iterated-integral series ──
    series_max_terms: int = Field(default=60, description="Give up on the series beyond this many terms")
    series_sup_samples: int = Field(default=256, description="Samples used to estimate sup |A/u|")
    series_safety: float = Field(default=1.05, description="Safety factor applied to the sampled sup")

    # ── Execution ──
    max_workers: int = Field(default=4, ge=1, description="Thread pool size for independent solves")
    seed: int = Field(default=0, description="Seed for randomized property suites")

    # ── Logging ──
    log_level: str = Field(default="INFO", description="Logging level")
    log_json: bool = Field(default=False, description="Emit structured JSON logs")

    model_config = {
        "env_prefix": "SCT_",
        "env_file": str(BASE_DIR / ".env"),
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "extra": "ignore",
    }


# ── Module-level singleton ──
settings = Settings()
