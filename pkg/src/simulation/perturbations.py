"""
Initial conditions: homogeneous states plus small or finite disturbances
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger

from config import Config
from src.model.model_core import ModelParams, SteadyState, SteadyStateKind, steady_states
from src.simulation.grid import FieldState, Grid

MAX_INFINITESIMAL = 1e-2


def homogeneous_state(grid: Grid, state: SteadyState) -> FieldState:
    return FieldState.uniform(grid, state.u_star, state.v_star, state.c_star)


def base_state(params: ModelParams, grid: Grid, kind: SteadyStateKind) -> FieldState:
    """Uniform field at the requested steady state"""
    state = steady_states(params).by_kind(SteadyStateKind(kind))
    if state is None:
        raise ValueError(f"Steady state {kind} does not exist for these parameters")
    return homogeneous_state(grid, state)


def perturb_infinitesimal(
    state: FieldState,
    grid: Grid,
    amplitude: float,
    mode: str = "noise",
    index: int = 1,
    seed: int = None,
) -> FieldState:
    """
    Small disturbance of all three fields

    Args:
        state: Field to perturb (not modified)
        grid: Grid of the field
        amplitude: At most 1e-2
        mode: "noise" (uniform in [-a, a]) or "cosine" (a cos(i pi x / L))
        index: Cosine mode i
        seed: Noise seed; Config.SIMULATION["seed"] when omitted

    Returns:
        Perturbed copy clipped at zero, with the seed recorded in meta
    """
    if amplitude < 0 or amplitude > MAX_INFINITESIMAL:
        raise ValueError(f"Infinitesimal amplitude must be in [0, {MAX_INFINITESIMAL}]")

    result = state.copy()
    if mode == "cosine":
        profile = amplitude * np.cos(index * np.pi * grid.x / grid.L)
        result.u = result.u + profile
        result.v = result.v + profile
        result.c = result.c + profile
        result.meta.update({"perturbation": "cosine", "mode_index": index})
    elif mode == "noise":
        seed = Config.SIMULATION["seed"] if seed is None else int(seed)
        rng = np.random.default_rng(seed)
        result.u = result.u + rng.uniform(-amplitude, amplitude, grid.N)
        result.v = result.v + rng.uniform(-amplitude, amplitude, grid.N)
        result.c = result.c + rng.uniform(-amplitude, amplitude, grid.N)
        result.meta.update({"perturbation": "noise", "seed": seed})
    else:
        raise ValueError(f"Unknown perturbation mode: {mode}")

    result.u = np.clip(result.u, 0.0, None)
    result.v = np.clip(result.v, 0.0, None)
    result.c = np.clip(result.c, 0.0, None)
    result.meta["amplitude"] = amplitude
    return result


def centered_window(grid: Grid, width_fraction: float, center_fraction: float = 0.5) -> np.ndarray:
    if not 0 < width_fraction <= 1:
        raise ValueError(f"Width fraction must be in (0, 1], got {width_fraction}")
    if not 0 <= center_fraction <= 1:
        raise ValueError(f"Center fraction must be in [0, 1], got {center_fraction}")
    return np.abs(grid.x - center_fraction * grid.L) <= 0.5 * width_fraction * grid.L


def perturb_finite(
    state: FieldState,
    grid: Grid,
    field: str,
    amplitude: float,
    width_fraction: float = None,
    center_fraction: float = 0.5,
) -> FieldState:
    """Add a top-hat of the given amplitude to one field, centered at center_fraction * L"""
    width_fraction = Config.SIMULATION["width_fraction"] if width_fraction is None else width_fraction
    window = centered_window(grid, width_fraction, center_fraction)
    result = state.copy()
    values = result.field(field).copy()
    values[window] += amplitude
    setattr(result, field, np.clip(values, 0.0, None))
    result.meta.update(
        {"perturbation": f"finite-{field}", "amplitude": amplitude, "width_fraction": width_fraction,
         "center_fraction": center_fraction}
    )
    logger.debug(f"Top-hat of {amplitude} on {field} over {int(window.sum())} cells")
    return result


def perturb_finite_v(
    grid: Grid, amplitude: float, width_fraction: float = None, center_fraction: float = 0.5
) -> FieldState:
    """(1, 0, 0) with v raised to the given amplitude on a window"""
    if not 0 <= amplitude <= 1:
        raise ValueError(f"Finite v amplitude must be in [0, 1], got {amplitude}")
    start = FieldState.uniform(grid, 1.0, 0.0, 0.0)
    return perturb_finite(start, grid, "v", amplitude, width_fraction, center_fraction)


@dataclass(frozen=True)
class InitialCondition:
    """Recipe for a starting field: a steady state plus one disturbance"""

    base_state: str = SteadyStateKind.COEXISTENCE.value
    kind: str = "noise"
    amplitude: float = 1e-3
    seed: int = Config.SIMULATION["seed"]
    width_fraction: float = Config.SIMULATION["width_fraction"]
    mode_index: int = 1
    center_fraction: float = 0.5

    def build(self, params: ModelParams, grid: Grid) -> FieldState:
        start = base_state(params, grid, SteadyStateKind(self.base_state))
        if self.kind in ("noise", "cosine"):
            return perturb_infinitesimal(
                start, grid, self.amplitude, self.kind, self.mode_index, self.seed
            )
        if self.kind in ("finite-u", "finite-v", "finite-c"):
            return perturb_finite(
                start, grid, self.kind[-1], self.amplitude, self.width_fraction, self.center_fraction
            )
        if self.kind == "none":
            return start
        raise ValueError(f"Unknown perturbation kind: {self.kind}")

    def describe(self) -> str:
        return (
            f"{self.base_state} + {self.kind} (amplitude={self.amplitude}, seed={self.seed}, "
            f"width_fraction={self.width_fraction}, center_fraction={self.center_fraction}, "
            f"mode_index={self.mode_index})"
        )


def stretch_window(state: FieldState, grid: Grid, x_start: float, x_end: float, target: Grid) -> FieldState:
    """
    Profile on [x_start, x_end] (possibly reversed) mapped linearly onto a target grid

    x_start lands on x = 0 of the target and x_end on x = L.
    """
    if np.isclose(x_start, x_end):
        raise ValueError(f"Window [{x_start}, {x_end}] is empty")
    positions = x_start + (target.x / target.L) * (x_end - x_start)
    fields = [np.interp(positions, grid.x, state.field(name)) for name in ("u", "v", "c")]
    result = FieldState(0.0, *fields)
    result.meta.update({"window": (float(x_start), float(x_end)), "source_L": grid.L})
    logger.debug(f"Stretched window {x_start:.2f}..{x_end:.2f} of L={grid.L:g} onto L={target.L:g}")
    return result
