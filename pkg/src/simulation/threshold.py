"""
Minimal finite v disturbance of (1, 0, 0) that triggers a stationary pattern
"""

from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from loguru import logger

from config import Config
from src.exceptions import BracketError
from src.model.model_core import ModelParams
from src.simulation.grid import Grid
from src.simulation.pattern_metrics import NOT_CONVERGED, STATIONARY_PATTERN
from src.simulation.pde_solver import ChemotaxisSolver
from src.simulation.perturbations import perturb_finite_v
from src.utils.parallel import parallel_map


@dataclass
class ThresholdResult:
    threshold: Optional[float]
    found: bool
    trials: List[Tuple[float, str]] = field(default_factory=list)
    message: str = ""


def forms_pattern(
    params: ModelParams,
    grid: Grid,
    amplitude: float,
    width_fraction: float = None,
    sim_options: Dict = None,
) -> Tuple[bool, str]:
    """Simulate (1, 0, 0) plus a v top-hat and report whether a pattern persists"""
    sim_options = dict(sim_options or {})
    scheme = sim_options.pop("chemotaxis_scheme", None)
    solver = ChemotaxisSolver(params, grid, chemotaxis_scheme=scheme)
    outcome = solver.run_to_stationary(
        perturb_finite_v(grid, amplitude, width_fraction), **sim_options
    )
    if outcome.classification == NOT_CONVERGED:
        patterned = outcome.final.amplitude("u") > Config.SIMULATION["pattern_eps"]
        logger.warning(
            f"Trial v={amplitude:.4f} did not converge; judged by amplitude: {patterned}"
        )
        return patterned, outcome.classification
    return outcome.classification == STATIONARY_PATTERN, outcome.classification


def threshold_amplitude(
    params: ModelParams,
    grid: Grid,
    v_lo: float = 0.0,
    v_hi: float = 1.0,
    tol_amp: float = None,
    width_fraction: float = None,
    sim_options: Dict = None,
) -> ThresholdResult:
    """
    Bisect on the v amplitude between decay and pattern formation

    Args:
        params: Model parameters (normally b2 > 1 so that (1, 0, 0) is stable)
        grid: Simulation grid
        v_lo: Amplitude expected to decay
        v_hi: Amplitude expected to form a pattern
        tol_amp: Bracket width at which bisection stops
        width_fraction: Width of the top-hat as a fraction of L
        sim_options: Extra arguments for run_to_stationary

    Returns:
        ThresholdResult; found=False when no amplitude up to 1 forms a pattern

    Raises:
        BracketError: the lower end already forms a pattern
    """
    tol_amp = Config.SIMULATION["amplitude_tol"] if tol_amp is None else tol_amp
    trials: List[Tuple[float, str]] = []

    def attempt(amplitude: float) -> bool:
        patterned, label = forms_pattern(params, grid, amplitude, width_fraction, sim_options)
        trials.append((amplitude, label))
        logger.debug(f"Trial v={amplitude:.4f}: {'pattern' if patterned else 'decay'}")
        return patterned

    if not attempt(v_hi):
        if v_hi < 1.0 and attempt(1.0):
            v_hi = 1.0
        else:
            logger.info("No pattern for any amplitude up to the v carrying capacity")
            return ThresholdResult(None, False, trials, "no pattern for any v <= 1")

    if v_lo > 0 and attempt(v_lo):
        raise BracketError(f"Pattern already forms at the lower bracket v={v_lo}")

    lo, hi = v_lo, v_hi
    while hi - lo > tol_amp:
        mid = 0.5 * (lo + hi)
        if attempt(mid):
            hi = mid
        else:
            lo = mid

    logger.info(f"Threshold amplitude {hi:.4f} after {len(trials)} trials")
    return ThresholdResult(hi, True, trials)


def _threshold_cell(value, name, base, dx, v_lo, v_hi, tol_amp, width_fraction, sim_options):
    params = base.with_updates(**{name: float(value)})
    grid = Grid.from_spacing(params.L, dx)
    try:
        result = threshold_amplitude(
            params, grid, v_lo, v_hi, tol_amp, width_fraction, sim_options
        )
        threshold, found, note = result.threshold, result.found, result.message
    except BracketError as e:
        threshold, found, note = None, False, str(e)
    return {
        "param_value": float(value),
        "threshold": threshold if found else float("nan"),
        "found": int(found),
        "note": note,
    }


def threshold_sweep(
    varying_param: str,
    values: Sequence[float],
    base_params: ModelParams,
    dx: float = None,
    v_lo: float = 0.0,
    v_hi: float = 1.0,
    tol_amp: float = None,
    width_fraction: float = None,
    sim_options: Dict = None,
    workers: int = None,
) -> pd.DataFrame:
    """Threshold amplitude as one parameter varies, one row per value in input order"""
    cell = partial(
        _threshold_cell,
        name=varying_param,
        base=base_params,
        dx=dx,
        v_lo=v_lo,
        v_hi=v_hi,
        tol_amp=tol_amp,
        width_fraction=width_fraction,
        sim_options=sim_options,
    )
    return pd.DataFrame(parallel_map(cell, list(values), workers))
