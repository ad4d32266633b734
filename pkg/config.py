"""
Configuration module for the chemotactic Lotka-Volterra pattern laboratory
"""
import os
from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class Config:
    """Configuration class for the application"""

    # Output storage paths
    BASE_OUTPUT_PATH = Path(os.getenv("CHEMOLV_OUTPUT_PATH", "./output"))
    RESULTS_DATABASE = os.getenv("CHEMOLV_RESULTS_DB", "runs.db")

    # Logging configuration
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
    LOG_FILE = os.getenv("LOG_FILE", "./logs/chemolv.log")

    # Parallel sweeps
    MAX_WORKERS = int(os.getenv("CHEMOLV_WORKERS", str(os.cpu_count() or 1)))

    # Minute-scale acceptance runs in the test scripts
    RUN_SLOW_TESTS = os.getenv("CHEMOLV_SLOW_TESTS", "0") == "1"

    # Sign of the v logistic term: +r2 v (1 - v - b2 u)
    V_REACTION_SIGN = 1.0

    # Row 1, column 3 of the characteristic matrix is SIGN * chi * u* * k^2
    CHEMOTAXIS_MATRIX_SIGN = 1.0

    # Model parameters at the reference point of every study
    DEFAULT_PARAMS: Dict[str, float] = {
        "D1": 1.0,
        "D2": 1.0,
        "chi": -10.0,
        "r1": 0.1,
        "r2": 0.1,
        "b1": 0.7,
        "b2": 0.7,
        "L": 15.0,
    }

    # Linear stability analysis
    STABILITY: Dict[str, Any] = {
        "k_min": 0.0,
        "k_max": 1.0,
        "n_points": 2000,
        "k": 0.2,
        "b_tol": 1e-4,
        "k_tol": 1e-4,
        "fd_step": 1e-5,
        # b axis of the threshold curves; "no instability" means none below b = 0.94
        "b_search_min": 0.01,
        "b_search_max": 0.94,
        "k_search_min": 0.01,
        "k_search_max": 1.0,
        "k_scan_points": 400,
        "degenerate_tol": 1e-9,
        "root_residual_tol": 1e-12,
    }

    # PDE integration
    SIMULATION: Dict[str, Any] = {
        "dx": 0.25,
        "min_cells": 16,
        "t_max": 2e5,
        "tol": 1e-8,
        "steady_window": 1000,
        "dt_safety": 0.2,
        "dt_refresh": 100,
        "pattern_eps": 1e-3,
        "negativity_tol": 1e-12,
        "width_fraction": 0.2,
        "amplitude_tol": 0.01,
        "spike_prominence_fraction": 0.05,
        "chemotaxis_scheme": "centered",
        "integrator": "euler",
        "bdf_chunk": 50.0,
        "bdf_rtol": 1e-8,
        "bdf_atol": 1e-11,
        "seed": 12345,
    }

    # Cosine decomposition
    SPECTRAL: Dict[str, Any] = {
        "M": 64,
        "dominant_threshold": 0.01,
        "scan_modes": 10,
    }

    # Galerkin truncation
    GALERKIN: Dict[str, Any] = {
        "quadrature_points": 2048,
        "max_iter": 100,
        "tol": 1e-10,
        "fd_step": 1e-6,
        "max_halvings": 20,
        "alpha1_kick": 0.1,
        "nontrivial_tol": 1e-6,
        # Reseeding when a seed falls back to the homogeneous root
        "alpha0_factors": (0.4, 0.7, 1.0),
        "alpha1_kicks": (0.35, 0.5, 0.2),
    }

    # Output formatting
    OUTPUT: Dict[str, Any] = {
        "significant_digits": 10,
    }

    @classmethod
    def create_directories(cls, output_dir: Path = None):
        """Create necessary directories"""
        directories = [
            Path(output_dir) if output_dir else cls.BASE_OUTPUT_PATH,
            Path(cls.LOG_FILE).parent,
        ]

        for directory in directories:
            directory.mkdir(parents=True, exist_ok=True)
