"""
Dependence of the stationary mode spectrum on the domain length
"""

from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from config import Config
from src.model.model_core import ModelParams
from src.simulation.grid import Grid
from src.simulation.pattern_metrics import HOMOGENEOUS, NOT_CONVERGED
from src.simulation.pde_solver import ChemotaxisSolver
from src.simulation.perturbations import InitialCondition
from src.spectral.fourier_analysis import ModeSpectrum, decompose
from src.utils.parallel import parallel_map


@dataclass
class WavelengthScan:
    """Per-L coefficient table and the characteristic half-wavelength"""

    L_values: List[float]
    table: pd.DataFrame
    Lambda0: Optional[float]
    alpha_max: Optional[float]
    initial_condition: str = ""
    windows: List[Tuple[int, float, float]] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return self.table[name].to_numpy()


def _scan_cell(
    L: float,
    params: ModelParams,
    dx: float,
    initial: InitialCondition,
    sim_options: Dict,
    n_modes: int,
) -> Dict[str, float]:
    trial = params.with_updates(L=float(L))
    grid = Grid.from_spacing(trial.L, dx)
    options = dict(sim_options or {})
    solver = ChemotaxisSolver(trial, grid, chemotaxis_scheme=options.pop("chemotaxis_scheme", None))
    outcome = solver.run_to_stationary(initial.build(trial, grid), **options)

    spectrum = ModeSpectrum.from_state(outcome.final, grid, n_modes - 1)
    alpha = np.zeros(n_modes)
    gamma = np.zeros(n_modes)
    if outcome.classification == HOMOGENEOUS:
        alpha[0] = spectrum.alpha[0]
        gamma[0] = spectrum.gamma[0]
    else:
        alpha[: spectrum.M + 1] = spectrum.alpha
        gamma[: spectrum.M + 1] = spectrum.gamma

    dominant = 0 if outcome.classification == HOMOGENEOUS else int(np.argmax(np.abs(alpha[1:])) + 1)
    row = {
        "L": float(L),
        "converged": int(outcome.converged),
        "classification": outcome.classification,
        "dominant_mode": dominant,
    }
    row.update({f"alpha_{i}": float(alpha[i]) for i in range(n_modes)})
    row.update({f"gamma_{i}": float(gamma[i]) for i in range(n_modes)})
    return row


def mode_windows(L_values: Sequence[float], dominant: Sequence[int]) -> List[Tuple[int, float, float]]:
    """Contiguous runs of equal dominant mode as (mode, first L, last L)"""
    windows: List[Tuple[int, float, float]] = []
    for L, mode in zip(L_values, dominant):
        if windows and windows[-1][0] == mode:
            windows[-1] = (mode, windows[-1][1], float(L))
        else:
            windows.append((int(mode), float(L), float(L)))
    return windows


def characteristic_length(table: pd.DataFrame) -> Tuple[Optional[float], Optional[float]]:
    """
    L maximizing |alpha_1| among lengths where mode 1 dominates

    Returns:
        (Lambda0, alpha_1 at Lambda0) or (None, None) without a half-spike window
    """
    half_spike = table[table["dominant_mode"] == 1]
    if half_spike.empty:
        return None, None
    best = half_spike["alpha_1"].abs().idxmax()
    return float(table.loc[best, "L"]), float(table.loc[best, "alpha_1"])


def wavelength_scan(
    params: ModelParams,
    L_values: Sequence[float],
    mode_budget: int = None,
    initial: InitialCondition = None,
    dx: float = None,
    sim_options: Dict = None,
    workers: int = None,
) -> WavelengthScan:
    """
    Simulate every domain length to stationarity and tabulate its spectrum

    Args:
        params: Model parameters (L is replaced per cell)
        L_values: Domain lengths, usually in steps of 1
        mode_budget: Number of tabulated modes (alpha_0 .. alpha_{budget-1})
        initial: Starting condition applied at every L
        dx: Grid spacing
        sim_options: Extra arguments for run_to_stationary
        workers: Worker processes

    Returns:
        WavelengthScan with per-L table, dominant-mode windows and Lambda0
    """
    mode_budget = Config.SPECTRAL["scan_modes"] if mode_budget is None else mode_budget
    initial = initial or InitialCondition(kind="cosine", amplitude=1e-2, mode_index=1)
    cell = partial(
        _scan_cell,
        params=params,
        dx=dx,
        initial=initial,
        sim_options=sim_options,
        n_modes=mode_budget,
    )
    rows = parallel_map(cell, [float(L) for L in L_values], workers)
    table = pd.DataFrame(rows)

    failed = table[table["classification"] == NOT_CONVERGED]
    for L in failed["L"]:
        logger.warning(f"Scan cell L={L} did not converge")

    Lambda0, alpha_max = characteristic_length(table)
    windows = mode_windows(table["L"], table["dominant_mode"])
    logger.info(f"Wavelength scan over {len(table)} lengths: Lambda0={Lambda0}, alpha_max={alpha_max}")
    return WavelengthScan(
        L_values=[float(L) for L in L_values],
        table=table,
        Lambda0=Lambda0,
        alpha_max=alpha_max,
        initial_condition=initial.describe(),
        windows=windows,
    )


def modal_growth_rate(
    params: ModelParams,
    grid: Grid,
    mode_index: int,
    amplitude: float = 1e-5,
    t_fit: Tuple[float, float] = (50.0, 150.0),
    samples: int = 21,
) -> float:
    """
    Early-time exponential growth rate of one cosine mode of u in simulation

    The coexistence state is disturbed by a single cosine mode and
    log|alpha_i| is fitted linearly over t_fit, after the decaying
    eigen-directions have died out.

    Returns:
        Fitted growth rate, comparable with growth_rate(i pi / L)
    """
    if mode_index < 1 or 2 * mode_index + 2 > grid.N:
        raise ValueError(f"Mode {mode_index} is not resolved on {grid.N} cells")
    initial = InitialCondition(kind="cosine", amplitude=amplitude, mode_index=mode_index)
    state = initial.build(params, grid)
    solver = ChemotaxisSolver(params, grid)

    times = np.linspace(t_fit[0], t_fit[1], samples)
    logs = []
    for target in times:
        while state.t < target - 1e-12:
            state = solver.step(state, min(solver.stable_dt(state.u), target - state.t))
        coefficient = decompose(state.u, grid.L, mode_index)[mode_index]
        logs.append(np.log(abs(coefficient)))

    rate = float(np.polyfit(times, logs, 1)[0])
    logger.info(f"Measured growth rate of mode {mode_index}: {rate:.5e}")
    return rate
