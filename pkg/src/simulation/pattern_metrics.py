"""
Spike counting and outcome classification for stationary profiles
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.signal import find_peaks

from config import Config
from src.simulation.grid import FieldState, Grid

HOMOGENEOUS = "homogeneous"
STATIONARY_PATTERN = "stationary-pattern"
NOT_CONVERGED = "not-converged"


@dataclass(frozen=True)
class SpikeCount:
    """Spikes in half-spike units; a boundary maximum is half a spike"""

    half_spikes: int
    interior: int
    boundary: int

    @property
    def full_spikes(self) -> float:
        return self.half_spikes / 2.0


def count_spikes(state: FieldState, field: str = "u", eps: float = None) -> SpikeCount:
    """
    Count maxima of a profile whose prominence exceeds eps

    The profile is mirrored across both no-flux ends so that maxima sitting
    on a boundary are found as peaks too.

    Args:
        state: Field state
        field: One of u, v, c
        eps: Minimal prominence; defaults to a fraction of max - min

    Returns:
        SpikeCount (interior maxima count 2 half-spikes, boundary maxima 1)
    """
    values = np.asarray(state.field(field), dtype=float)
    spread = float(values.max() - values.min())
    if eps is None:
        eps = Config.SIMULATION["spike_prominence_fraction"] * spread
        if spread == 0:
            return SpikeCount(half_spikes=0, interior=0, boundary=0)
    if eps <= 0:
        raise ValueError(f"Prominence threshold must be positive, got {eps}")

    n = len(values)
    extended = np.concatenate([values[::-1], values, values[::-1]])
    peaks, _ = find_peaks(extended, prominence=eps)

    # plateau peaks report their left sample: n-1 for the left end, 2n-1 for the right
    boundary = int(np.sum((peaks == n - 1) | (peaks == 2 * n - 1)))
    interior = int(np.sum((peaks >= n) & (peaks <= 2 * n - 2)))
    return SpikeCount(half_spikes=2 * interior + boundary, interior=interior, boundary=boundary)


def classify(state: FieldState, converged: bool, pattern_eps: float = None) -> str:
    pattern_eps = Config.SIMULATION["pattern_eps"] if pattern_eps is None else pattern_eps
    if not converged:
        return NOT_CONVERGED
    return STATIONARY_PATTERN if state.amplitude("u") > pattern_eps else HOMOGENEOUS


def extrema_positions(state: FieldState, grid: Grid, field: str = "u", eps: float = None):
    """Positions of prominent maxima and minima, boundary extrema at x = 0 or x = L"""
    values = np.asarray(state.field(field), dtype=float)
    spread = float(values.max() - values.min())
    eps = Config.SIMULATION["spike_prominence_fraction"] * spread if eps is None else eps
    if spread == 0 or eps <= 0:
        return [], []

    n = len(values)
    extended = np.concatenate([values[::-1], values, values[::-1]])

    def positions(peaks):
        found = []
        for p in peaks:
            if p == n - 1:
                found.append(0.0)
            elif p == 2 * n - 1:
                found.append(grid.L)
            elif n <= p <= 2 * n - 2:
                found.append(float(grid.x[p - n]))
        return found

    maxima, _ = find_peaks(extended, prominence=eps)
    minima, _ = find_peaks(-extended, prominence=eps)
    return positions(maxima), positions(minima)


def half_wavelength_window(
    state: FieldState, grid: Grid, field: str = "u", eps: float = None
) -> Optional[Tuple[float, float]]:
    """
    Widest interval from a minimum to an adjacent maximum of a profile

    Returns:
        (x_min, x_max) in that order, so the interval may run right to
        left; None when the profile has no prominent extremum pair
    """
    maxima, minima = extrema_positions(state, grid, field, eps)
    extrema = sorted([(x, "max") for x in maxima] + [(x, "min") for x in minima])
    best = None
    for (x_a, kind_a), (x_b, kind_b) in zip(extrema, extrema[1:]):
        if kind_a == kind_b:
            continue
        window = (x_a, x_b) if kind_a == "min" else (x_b, x_a)
        if best is None or abs(window[1] - window[0]) > abs(best[1] - best[0]):
            best = window
    return best
