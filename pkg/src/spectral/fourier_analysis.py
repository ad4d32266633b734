"""
Cosine-series decomposition of profiles on (0, L)

    u(x) = alpha_0 + sum_i alpha_i cos(i pi x / L)

with the same expansion for v (gamma) and c (beta).
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy.integrate import trapezoid

from config import Config
from src.simulation.grid import FieldState, Grid


@dataclass
class ModeSpectrum:
    """Truncated cosine coefficients of (u, v, c)"""

    L: float
    alpha: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray

    @property
    def M(self) -> int:
        return len(self.alpha) - 1

    @property
    def k(self) -> float:
        return np.pi / self.L

    def coefficients(self, field: str) -> np.ndarray:
        names = {"u": "alpha", "v": "gamma", "c": "beta"}
        return getattr(self, names.get(field, field))

    def truncated(self, M: int) -> "ModeSpectrum":
        return ModeSpectrum(
            self.L, self.alpha[: M + 1].copy(), self.gamma[: M + 1].copy(), self.beta[: M + 1].copy()
        )

    def amplitude_estimate(self, field: str = "u") -> float:
        """Peak-to-trough estimate 2|c_f| from the fundamental mode"""
        coefficients = self.coefficients(field)
        fundamental = dominant_modes(self, field=field).fundamental
        if fundamental is None:
            return 0.0
        return 2.0 * abs(float(coefficients[fundamental]))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "index": np.arange(self.M + 1),
                "alpha": self.alpha,
                "gamma": self.gamma,
                "beta": self.beta,
            }
        )

    @classmethod
    def from_state(cls, state: FieldState, grid: Grid, M: int = None) -> "ModeSpectrum":
        """Decompose all three fields; M is capped by the grid resolution"""
        M = Config.SPECTRAL["M"] if M is None else M
        limit = (grid.N - 2) // 2
        if M > limit:
            logger.debug(f"Mode count {M} capped at {limit} for N={grid.N}")
            M = limit
        return cls(
            L=grid.L,
            alpha=decompose(state.u, grid.L, M),
            gamma=decompose(state.v, grid.L, M),
            beta=decompose(state.c, grid.L, M),
        )


@dataclass(frozen=True)
class DominantModes:
    modes: List[Tuple[int, float]]
    fundamental: Optional[int]
    harmonics: List[int]

    @property
    def indices(self) -> List[int]:
        return [index for index, _ in self.modes]


def extend_to_boundaries(profile: np.ndarray, L: float, x: Optional[np.ndarray]):
    """Append boundary values by reflection so the integral covers [0, L]"""
    profile = np.asarray(profile, dtype=float)
    if x is None:
        x = (np.arange(len(profile)) + 0.5) * (L / len(profile))
    x = np.asarray(x, dtype=float)
    if x[0] > 0:
        x = np.concatenate([[0.0], x])
        profile = np.concatenate([[profile[0]], profile])
    if x[-1] < L:
        x = np.concatenate([x, [L]])
        profile = np.concatenate([profile, [profile[-1]]])
    return x, profile


def is_cell_centered(x: np.ndarray, L: float) -> bool:
    x = np.asarray(x, dtype=float)
    centers = (np.arange(len(x)) + 0.5) * (L / len(x))
    return bool(np.allclose(x, centers, rtol=0.0, atol=1e-12 * L))


def decompose(profile: Sequence[float], L: float, M: int, x: Sequence[float] = None) -> np.ndarray:
    """
    Cosine coefficients of a sampled profile

    Cell-centered samples are weighted by dx, the trapezoid rule on the
    profile reflected across both ends. Cosines below N cells are then
    exactly orthogonal, so the coefficients of a sampled cosine sum are
    recovered to rounding error. Other sample positions fall back to the
    composite trapezoid rule with reflected boundary values.

    Args:
        profile: Samples (cell-centered unless x is given)
        L: Domain length
        M: Highest mode index
        x: Optional sample positions

    Returns:
        Array of M + 1 coefficients
    """
    if len(profile) < 2 * M + 2:
        raise ValueError(f"{len(profile)} samples cannot resolve {M} modes")

    indices = np.arange(M + 1)
    values = np.asarray(profile, dtype=float)
    if x is None or is_cell_centered(x, L):
        dx = L / len(values)
        nodes = (np.arange(len(values)) + 0.5) * dx
        basis = np.cos(np.outer(indices, nodes) * np.pi / L)
        coefficients = (basis @ values) * (2.0 * dx / L)
    else:
        nodes, values = extend_to_boundaries(values, L, np.asarray(x, dtype=float))
        basis = np.cos(np.outer(indices, nodes) * np.pi / L)
        coefficients = trapezoid(basis * values, nodes, axis=1) * (2.0 / L)
    coefficients[0] *= 0.5
    return coefficients


def evaluate_series(coefficients: np.ndarray, L: float, x: np.ndarray) -> np.ndarray:
    indices = np.arange(len(coefficients))
    return np.cos(np.outer(x, indices) * np.pi / L) @ np.asarray(coefficients)


def reconstruct(spectrum: ModeSpectrum, grid: Grid) -> FieldState:
    """Truncated cosine sums evaluated at the grid nodes"""
    x = grid.x
    return FieldState(
        t=0.0,
        u=evaluate_series(spectrum.alpha, spectrum.L, x),
        v=evaluate_series(spectrum.gamma, spectrum.L, x),
        c=evaluate_series(spectrum.beta, spectrum.L, x),
    )


def dominant_modes(spectrum: ModeSpectrum, threshold: float = None, field: str = "u") -> DominantModes:
    """
    Modes whose coefficient magnitude reaches the threshold

    Returns:
        Modes sorted by magnitude, the fundamental (smallest nonzero dominant
        index) and the dominant indices that are its multiples
    """
    threshold = Config.SPECTRAL["dominant_threshold"] if threshold is None else threshold
    if threshold <= 0:
        raise ValueError(f"Threshold must be positive, got {threshold}")

    coefficients = spectrum.coefficients(field)
    selected = [(int(i), float(c)) for i, c in enumerate(coefficients) if abs(c) >= threshold]
    selected.sort(key=lambda item: (-abs(item[1]), item[0]))

    nonzero = sorted(i for i, _ in selected if i > 0)
    fundamental = nonzero[0] if nonzero else None
    harmonics = [i for i in nonzero if fundamental and i % fundamental == 0 and i > fundamental]
    return DominantModes(modes=selected, fundamental=fundamental, harmonics=harmonics)


def parseval_energy(spectrum: ModeSpectrum, field: str = "u") -> float:
    """L (c_0^2 + sum c_i^2 / 2), the integral of the squared series"""
    coefficients = spectrum.coefficients(field)
    return spectrum.L * (coefficients[0] ** 2 + 0.5 * np.sum(coefficients[1:] ** 2))
