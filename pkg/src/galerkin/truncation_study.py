"""
Comparison of Galerkin truncations with simulated stationary patterns
"""

from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from scipy.integrate import trapezoid

from config import Config
from src.galerkin.galerkin_solver import (
    GalerkinProblem,
    GalerkinSolution,
    newton_solve,
    seed_from_spectrum,
    solve_patterned,
    solve_with_kicks,
)
from src.model.model_core import ModelParams
from src.simulation.grid import FieldState, Grid
from src.simulation.perturbations import InitialCondition
from src.spectral.fourier_analysis import (
    ModeSpectrum,
    evaluate_series,
    extend_to_boundaries,
)
from src.spectral.wavelength_scan import wavelength_scan
from src.utils.parallel import parallel_map


def profile_error(analytic: ModeSpectrum, simulated: FieldState, grid: Grid, field: str = "u") -> float:
    """Integral over (0, L) of the squared difference between series and simulation"""
    if not np.isclose(analytic.L, grid.L):
        raise ValueError(f"Spectrum length {analytic.L} differs from grid length {grid.L}")
    series = evaluate_series(analytic.coefficients(field), analytic.L, grid.x)
    difference = series - simulated.field(field)
    nodes, values = extend_to_boundaries(difference, grid.L, grid.x)
    return float(trapezoid(values**2, nodes))


@dataclass
class TruncationStudy:
    table: pd.DataFrame
    solutions: Dict[int, GalerkinSolution] = field(default_factory=dict)

    def er(self, M: int, field: str = "u") -> float:
        row = self.table[self.table["M"] == M]
        return float(row[f"er_{field}"].iloc[0])


def _truncation_cell(M: int, params: ModelParams, reference_spectrum: ModeSpectrum, method: str):
    problem = GalerkinProblem(params, M)
    seed = seed_from_spectrum(reference_spectrum, M)
    return solve_patterned(problem, seed, f"simulated-spectrum(M={M})", method)


def coefficient_row(source: str, M: int, spectrum: ModeSpectrum, width: int) -> Dict[str, float]:
    row: Dict[str, float] = {"source": source, "M": M}
    for name, values in (("alpha", spectrum.alpha), ("gamma", spectrum.gamma), ("beta", spectrum.beta)):
        for i in range(width + 1):
            row[f"{name}_{i}"] = float(values[i]) if i < len(values) else float("nan")
    return row


def truncation_study(
    params: ModelParams,
    reference: FieldState,
    grid: Grid,
    M_max: int,
    method: str = "quadrature",
    workers: int = None,
    orders: Sequence[int] = None,
) -> TruncationStudy:
    """
    Solve truncations M = 1..M_max seeded from a simulated stationary state

    Args:
        params: Model parameters (params.L must match the grid)
        reference: Simulated stationary state
        grid: Grid of the reference
        M_max: Highest truncation order
        method: Galerkin residual evaluation
        workers: Worker processes
        orders: Explicit truncation orders instead of 1..M_max

    Returns:
        TruncationStudy with a "numerical" row followed by one row per M,
        carrying coefficients, convergence data and ER for u and v
    """
    if M_max < 1:
        raise ValueError(f"M_max must be at least 1, got {M_max}")

    numerical = ModeSpectrum.from_state(reference, grid, Config.SPECTRAL["M"])
    cell = partial(_truncation_cell, params=params, reference_spectrum=numerical, method=method)
    orders = sorted(int(m) for m in orders) if orders else list(range(1, M_max + 1))
    M_max = max(M_max, orders[-1])
    solutions = dict(zip(orders, parallel_map(cell, orders, workers)))

    rows: List[Dict[str, float]] = []
    numerical_row = coefficient_row("numerical", M_max, numerical.truncated(M_max), M_max)
    numerical_row.update(
        {"converged": 1, "newton_iters": 0, "residual_norm": float("nan"), "seed": "simulation",
         "er_u": 0.0, "er_v": 0.0}
    )
    rows.append(numerical_row)

    for M, solution in solutions.items():
        row = coefficient_row(f"M={M}", M, solution.spectrum, M_max)
        row.update(
            {
                "converged": int(solution.converged),
                "newton_iters": solution.newton_iters,
                "residual_norm": solution.residual_norm,
                "seed": solution.seed_descriptor,
                "er_u": profile_error(solution.spectrum, reference, grid, "u"),
                "er_v": profile_error(solution.spectrum, reference, grid, "v"),
            }
        )
        rows.append(row)
        logger.info(f"M={M}: converged={solution.converged}, ER_u={row['er_u']:.4f}, ER_v={row['er_v']:.4f}")

    return TruncationStudy(table=pd.DataFrame(rows), solutions=solutions)


def galerkin_length_scan(
    params: ModelParams, L_values: Sequence[float], M: int, method: str = "quadrature"
) -> pd.DataFrame:
    """
    Galerkin solutions along increasing L, each seeded from the previous patterned one

    Returns:
        One row per L with alpha_1, gamma_1 and whether the root is patterned
    """
    rows = []
    previous: Optional[GalerkinSolution] = None
    for L in L_values:
        problem = GalerkinProblem(params.with_updates(L=float(L)), M)
        solution = None
        if previous is not None:
            seed_name = f"continuation(L={previous.spectrum.L})"
            solution = newton_solve(problem, previous.unknowns, seed_name, method)
        if solution is None or not (solution.converged and solution.is_patterned()):
            solution = solve_with_kicks(problem, method=method, reseed=False)

        patterned = bool(solution.converged and solution.is_patterned())
        previous = solution if patterned else None
        rows.append(
            {
                "L": float(L),
                "converged": int(solution.converged),
                "patterned": int(patterned),
                "alpha_0": float(solution.spectrum.alpha[0]),
                "alpha_1": float(solution.spectrum.alpha[1]) if patterned else 0.0,
                "gamma_1": float(solution.spectrum.gamma[1]) if patterned else 0.0,
                "seed": solution.seed_descriptor,
            }
        )
    return pd.DataFrame(rows)


def _characteristics_cell(
    value: float,
    name: str,
    base: ModelParams,
    L_values: Sequence[float],
    M: int,
    simulate: bool,
    dx: float,
    initial: InitialCondition,
    sim_options: Dict,
) -> Dict[str, float]:
    params = base.with_updates(**{name: float(value)})
    scan = galerkin_length_scan(params, L_values, M)
    patterned = scan[scan["patterned"] == 1]

    row: Dict[str, float] = {"param_value": float(value)}
    if patterned.empty:
        logger.warning(f"No patterned Galerkin root for {name}={value}")
        row.update({"Lambda_u": np.nan, "alpha_1": np.nan, "Lambda_v": np.nan, "gamma_1": np.nan})
    else:
        best_u = patterned["alpha_1"].abs().idxmax()
        best_v = patterned["gamma_1"].abs().idxmax()
        row.update(
            {
                "Lambda_u": float(scan.loc[best_u, "L"]),
                "alpha_1": float(scan.loc[best_u, "alpha_1"]),
                "Lambda_v": float(scan.loc[best_v, "L"]),
                "gamma_1": float(scan.loc[best_v, "gamma_1"]),
            }
        )
    row["amplitude_u"] = 2.0 * abs(row["alpha_1"]) if np.isfinite(row["alpha_1"]) else np.nan
    row["amplitude_v"] = 2.0 * abs(row["gamma_1"]) if np.isfinite(row["gamma_1"]) else np.nan
    row["irregular"] = int(
        np.isfinite(row["Lambda_u"]) and row["Lambda_u"] != row["Lambda_v"]
    )

    if simulate:
        simulated = wavelength_scan(
            params, L_values, initial=initial, dx=dx, sim_options=sim_options, workers=1
        )
        row["sim_Lambda0"] = simulated.Lambda0 if simulated.Lambda0 is not None else np.nan
        row["sim_alpha_max"] = simulated.alpha_max if simulated.alpha_max is not None else np.nan
    return row


def parameter_characteristics(
    varying_param: str,
    values: Sequence[float],
    base_params: ModelParams = None,
    L_values: Sequence[float] = None,
    M: int = 4,
    simulate: bool = False,
    dx: float = None,
    initial: InitialCondition = None,
    sim_options: Dict = None,
    workers: int = None,
) -> pd.DataFrame:
    """
    Most unstable half-wavelength and amplitude of the pattern per parameter value

    For every value, L is scanned and the L maximizing |alpha_1| (u) and
    |gamma_1| (v) of the converged Galerkin root is reported, optionally
    next to the simulated Lambda0.

    Args:
        varying_param: Parameter name (D1, D2, chi, r1, r2, b1, b2)
        values: Parameter samples
        base_params: Values of the other parameters
        L_values: Domain lengths to scan
        M: Truncation order
        simulate: Also run the simulated wavelength scan
        dx: Grid spacing for simulations
        initial: Initial condition for simulations
        sim_options: Extra run_to_stationary arguments
        workers: Worker processes across parameter values

    Returns:
        DataFrame in input order; NaN marks values without patterned roots
    """
    base_params = base_params or ModelParams()
    L_values = list(L_values) if L_values is not None else list(np.arange(5.0, 41.0, 1.0))
    initial = initial or InitialCondition(kind="cosine", amplitude=1e-2, mode_index=1)
    cell = partial(
        _characteristics_cell,
        name=varying_param,
        base=base_params,
        L_values=L_values,
        M=M,
        simulate=simulate,
        dx=dx,
        initial=initial,
        sim_options=sim_options,
    )
    return pd.DataFrame(parallel_map(cell, list(values), workers))
