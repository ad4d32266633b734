"""
Linear stability of homogeneous states against cos(kx) perturbations

Perturbations ~ exp(lambda t) cos(kx) of a steady state give the cubic
lambda^3 + a1 lambda^2 + a2 lambda + a3 = 0 built from the characteristic
matrix. Routh-Hurwitz conditions decide stability; the coexistence state
becomes Turing-unstable when a3 turns negative for some k.
"""

from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from config import Config
from src.model.model_core import (
    ModelParams,
    SteadyState,
    SteadyStateKind,
    coexistence_state,
)
from src.utils.parallel import parallel_map

STATUS_STABLE = 0
STATUS_UNSTABLE = 1
STATUS_NOT_APPLICABLE = -1

RH_CONDITIONS = ("a1 > 0", "a2 > 0", "a3 > 0", "a3 - a1*a2 < 0")

THRESHOLD_PARAMETERS = ("D1", "D2", "chi", "r1", "r2")


@dataclass(frozen=True)
class CubicCoefficients:
    a1: float
    a2: float
    a3: float
    k: float = 0.0

    @property
    def hurwitz_gap(self) -> float:
        return self.a3 - self.a1 * self.a2


@dataclass(frozen=True)
class RouthHurwitzVerdict:
    stable: bool
    violated_conditions: Tuple[str, ...]


@dataclass
class StabilityReport:
    """Dispersion relation of one state sampled on a k grid"""

    state: SteadyState
    k_grid: np.ndarray
    growth_rates: np.ndarray
    rh_verdicts: np.ndarray
    k_star: float
    lambda_star: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "k": self.k_grid,
                "growth_rate": self.growth_rates,
                "rh_stable": self.rh_verdicts.astype(int),
            }
        )


@dataclass(frozen=True)
class SpikePrediction:
    half_spikes: int
    full_spikes: int
    remainder: bool


@dataclass
class DomainMap:
    """Routh-Hurwitz status of the coexistence state over a (b1, b2) grid"""

    k: float
    b1_values: np.ndarray
    b2_values: np.ndarray
    status: np.ndarray
    a3: np.ndarray = field(repr=False)

    @property
    def mask(self) -> np.ndarray:
        return self.status == STATUS_UNSTABLE

    @property
    def applicable(self) -> np.ndarray:
        return self.status != STATUS_NOT_APPLICABLE

    def status_at(self, b1: float, b2: float) -> int:
        i = int(np.argmin(np.abs(self.b1_values - b1)))
        j = int(np.argmin(np.abs(self.b2_values - b2)))
        return int(self.status[i, j])

    def to_frame(self) -> pd.DataFrame:
        b1_grid, b2_grid = np.meshgrid(self.b1_values, self.b2_values, indexing="ij")
        labels = {
            STATUS_STABLE: "stable",
            STATUS_UNSTABLE: "unstable",
            STATUS_NOT_APPLICABLE: "not-applicable",
        }
        return pd.DataFrame(
            {
                "b1": b1_grid.ravel(),
                "b2": b2_grid.ravel(),
                "a3": self.a3.ravel(),
                "status": [labels[int(s)] for s in self.status.ravel()],
            }
        )


@dataclass(frozen=True)
class CriticalB:
    b_min: Optional[float]
    k_at_min: Optional[float]
    found: bool
    message: str = ""


def characteristic_matrix(state: SteadyState, k: float, params: ModelParams) -> np.ndarray:
    """
    3x3 matrix governing the growth of cos(kx) perturbations

    Args:
        state: Homogeneous steady state
        k: Wavenumber (k >= 0)
        params: Model parameters

    Returns:
        Matrix M with rows for (u, v, c)
    """
    if k < 0:
        raise ValueError(f"Wavenumber must be non-negative, got {k}")

    u, v = state.u_star, state.v_star
    k2 = k * k
    s = Config.V_REACTION_SIGN
    return np.array(
        [
            [
                -params.D1 * k2 + params.r1 * (1.0 - 2.0 * u - params.b1 * v),
                -params.r1 * params.b1 * u,
                Config.CHEMOTAXIS_MATRIX_SIGN * params.chi * u * k2,
            ],
            [
                -s * params.r2 * params.b2 * v,
                -params.D2 * k2 + s * params.r2 * (1.0 - 2.0 * v - params.b2 * u),
                0.0,
            ],
            [0.0, 1.0, -k2 - 1.0],
        ]
    )


def cubic_from_matrix(matrix: np.ndarray, k: float = 0.0) -> CubicCoefficients:
    """Characteristic polynomial coefficients of a 3x3 matrix"""
    m = matrix
    minors = (
        m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
        + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
    )
    det = (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )
    return CubicCoefficients(
        a1=float(-np.trace(m)), a2=float(minors), a3=float(-det), k=float(k)
    )


def cubic_coefficients(state: SteadyState, k: float, params: ModelParams) -> CubicCoefficients:
    return cubic_from_matrix(characteristic_matrix(state, k, params), k)


def routh_hurwitz(coefficients: CubicCoefficients) -> RouthHurwitzVerdict:
    """All roots have negative real part iff every condition holds"""
    c = coefficients
    checks = (c.a1 > 0, c.a2 > 0, c.a3 > 0, c.a3 - c.a1 * c.a2 < 0)
    violated = tuple(name for name, ok in zip(RH_CONDITIONS, checks) if not ok)
    return RouthHurwitzVerdict(stable=not violated, violated_conditions=violated)


def cubic_roots(coefficients: CubicCoefficients) -> np.ndarray:
    """
    Roots of lambda^3 + a1 lambda^2 + a2 lambda + a3

    Companion-matrix eigenvalues, then Newton polishing kept only where it
    lowers the polynomial residual.
    """
    a1, a2, a3 = coefficients.a1, coefficients.a2, coefficients.a3
    roots = np.roots([1.0, a1, a2, a3]).astype(complex)

    def poly(z):
        return ((z + a1) * z + a2) * z + a3

    def dpoly(z):
        return (3.0 * z + 2.0 * a1) * z + a2

    for i, z in enumerate(roots):
        for _ in range(3):
            slope = dpoly(z)
            if slope == 0:
                break
            candidate = z - poly(z) / slope
            if abs(poly(candidate)) < abs(poly(z)):
                z = candidate
            else:
                break
        roots[i] = z

    residual = max(abs(poly(z)) for z in roots)
    scale = max(1.0, abs(a1), abs(a2), abs(a3))
    if residual > Config.STABILITY["root_residual_tol"] * scale:
        logger.debug(f"Cubic root residual {residual:.3e} at k={coefficients.k}")
    return roots


def extinction_eigenvalues(state: SteadyState, k: float, params: ModelParams) -> np.ndarray:
    """
    Closed-form eigenvalues at the trivial and extinction states

    The characteristic matrix is triangular there, so the eigenvalues are
    its diagonal entries.
    """
    if state.kind == SteadyStateKind.COEXISTENCE:
        raise ValueError("Closed-form eigenvalues exist only for boundary states")
    k2 = k * k
    s = Config.V_REACTION_SIGN
    u, v = state.u_star, state.v_star
    return np.array(
        [
            -k2 - 1.0,
            -params.D1 * k2 + params.r1 * (1.0 - 2.0 * u - params.b1 * v),
            -params.D2 * k2 + s * params.r2 * (1.0 - 2.0 * v - params.b2 * u),
        ]
    )


def eigenvalues(state: SteadyState, k: float, params: ModelParams) -> np.ndarray:
    if k < 0:
        raise ValueError(f"Wavenumber must be non-negative, got {k}")
    if state.kind != SteadyStateKind.COEXISTENCE:
        return extinction_eigenvalues(state, k, params).astype(complex)
    return cubic_roots(cubic_coefficients(state, k, params))


def growth_rate(state: SteadyState, k: float, params: ModelParams) -> float:
    """Largest real part among the three eigenvalues"""
    return float(np.max(eigenvalues(state, k, params).real))


def dispersion_curve(
    state: SteadyState,
    params: ModelParams,
    k_min: float = None,
    k_max: float = None,
    n_points: int = None,
) -> StabilityReport:
    """
    Growth rate and Routh-Hurwitz verdict on a uniform k grid

    Args:
        state: Steady state under study
        params: Model parameters
        k_min: Lower end of the grid (>= 0)
        k_max: Upper end of the grid (> k_min)
        n_points: Number of samples (>= 2)

    Returns:
        StabilityReport; ties in the maximum resolve to the smallest k
    """
    k_min = Config.STABILITY["k_min"] if k_min is None else k_min
    k_max = Config.STABILITY["k_max"] if k_max is None else k_max
    n_points = Config.STABILITY["n_points"] if n_points is None else n_points
    if k_min < 0 or k_max <= k_min or n_points < 2:
        raise ValueError(f"Invalid k grid [{k_min}, {k_max}] with {n_points} points")

    k_grid = np.linspace(k_min, k_max, n_points)
    rates = np.array([growth_rate(state, k, params) for k in k_grid])
    verdicts = np.array(
        [routh_hurwitz(cubic_coefficients(state, k, params)).stable for k in k_grid]
    )
    best = int(np.argmax(rates))

    logger.debug(
        f"Dispersion for {state.kind.value}: k*={k_grid[best]:.4f}, "
        f"lambda*={rates[best]:.4e}"
    )
    return StabilityReport(
        state=state,
        k_grid=k_grid,
        growth_rates=rates,
        rh_verdicts=verdicts,
        k_star=float(k_grid[best]),
        lambda_star=float(rates[best]),
    )


def predicted_spike_count(k_star: float, L: float) -> SpikePrediction:
    """Half spikes i = round(k* L / pi) fitting into a domain of length L"""
    if k_star <= 0:
        raise ValueError(f"Most unstable wavenumber must be positive, got {k_star}")
    half_spikes = int(round(k_star * L / np.pi))
    return SpikePrediction(
        half_spikes=half_spikes,
        full_spikes=half_spikes // 2,
        remainder=bool(half_spikes % 2),
    )


def _coexistence_status(params: ModelParams, k: float) -> Tuple[int, float]:
    state = coexistence_state(params)
    if state is None or not state.physical:
        return STATUS_NOT_APPLICABLE, float("nan")
    coefficients = cubic_coefficients(state, k, params)
    verdict = routh_hurwitz(coefficients)
    return (STATUS_STABLE if verdict.stable else STATUS_UNSTABLE), coefficients.a3


def instability_domain(
    params: ModelParams,
    k: float,
    b1_values: Sequence[float],
    b2_values: Sequence[float],
) -> DomainMap:
    """
    Split the (b1, b2) plane into stable and Turing-unstable regions at fixed k

    The b1 and b2 fields of params are ignored; every grid point uses its own.
    Points without a physical coexistence state are marked not applicable.
    """
    b1_values = np.asarray(b1_values, dtype=float)
    b2_values = np.asarray(b2_values, dtype=float)
    status = np.empty((len(b1_values), len(b2_values)), dtype=int)
    a3 = np.empty(status.shape)

    for i, b1 in enumerate(b1_values):
        for j, b2 in enumerate(b2_values):
            status[i, j], a3[i, j] = _coexistence_status(
                params.with_updates(b1=float(b1), b2=float(b2)), k
            )

    unstable = int(np.sum(status == STATUS_UNSTABLE))
    logger.debug(f"Instability domain at k={k}: {unstable}/{status.size} points unstable")
    return DomainMap(k=k, b1_values=b1_values, b2_values=b2_values, status=status, a3=a3)


def union_instability_domain(
    params: ModelParams,
    k_values: Sequence[float],
    b1_values: Sequence[float],
    b2_values: Sequence[float],
) -> DomainMap:
    """Points unstable for at least one k of the grid; a3 holds the minimum over k"""
    maps = [instability_domain(params, float(k), b1_values, b2_values) for k in k_values]
    status = maps[0].status.copy()
    a3 = maps[0].a3.copy()
    for domain in maps[1:]:
        status[domain.status == STATUS_UNSTABLE] = STATUS_UNSTABLE
        a3 = np.fmin(a3, domain.a3)
    return DomainMap(
        k=float("nan"),
        b1_values=maps[0].b1_values,
        b2_values=maps[0].b2_values,
        status=status,
        a3=a3,
    )


def _a3_symmetric(params: ModelParams, b: float, k: float) -> float:
    """a3 at the coexistence state with b1 = b2 = b"""
    trial = params.with_updates(b1=b, b2=b)
    state = coexistence_state(trial)
    return cubic_coefficients(state, k, trial).a3


def _da3_dk(params: ModelParams, b: float, k: float, step: float) -> float:
    return (_a3_symmetric(params, b, k + step) - _a3_symmetric(params, b, k - step)) / (
        2.0 * step
    )


def minimize_a3_over_k(
    params: ModelParams, b: float, k_range: Tuple[float, float]
) -> Tuple[float, float]:
    """
    Minimum of a3 over k at b1 = b2 = b

    A coarse scan brackets the minimum; bisection on the central-difference
    derivative refines it to the k tolerance.

    Returns:
        (k at the minimum, minimum a3)
    """
    settings = Config.STABILITY
    step = settings["fd_step"]
    k_grid = np.linspace(k_range[0], k_range[1], settings["k_scan_points"])
    values = np.array([_a3_symmetric(params, b, k) for k in k_grid])
    best = int(np.argmin(values))
    if best == 0 or best == len(k_grid) - 1:
        return float(k_grid[best]), float(values[best])

    lo, hi = float(k_grid[best - 1]), float(k_grid[best + 1])
    if not (_da3_dk(params, b, lo, step) < 0 < _da3_dk(params, b, hi, step)):
        return float(k_grid[best]), float(values[best])

    while hi - lo > settings["k_tol"]:
        mid = 0.5 * (lo + hi)
        if _da3_dk(params, b, mid, step) < 0:
            lo = mid
        else:
            hi = mid
    k_min = 0.5 * (lo + hi)
    return k_min, _a3_symmetric(params, b, k_min)


def critical_b(
    params: ModelParams,
    b_range: Tuple[float, float] = None,
    k_range: Tuple[float, float] = None,
) -> CriticalB:
    """
    Smallest symmetric competition b = b1 = b2 with a3 <= 0 for some k

    Solves a3 = 0 together with da3/dk = 0: for each b the minimum of a3 over
    k is located, then bisection in b finds where that minimum crosses zero.

    Args:
        params: Model parameters (b1, b2 ignored)
        b_range: Search interval inside (0, 1)
        k_range: Positive wavenumber interval

    Returns:
        CriticalB with found=False when a3 stays positive in the range
    """
    settings = Config.STABILITY
    b_lo, b_hi = b_range or (settings["b_search_min"], settings["b_search_max"])
    k_range = k_range or (settings["k_search_min"], settings["k_search_max"])
    if not (0 < b_lo < b_hi < 1):
        raise ValueError(f"b range must lie inside (0, 1), got ({b_lo}, {b_hi})")
    if k_range[0] <= 0 or k_range[1] <= k_range[0]:
        raise ValueError(f"k range must be positive and increasing, got {k_range}")

    k_hi, a3_hi = minimize_a3_over_k(params, b_hi, k_range)
    if a3_hi > 0:
        logger.info(f"No instability for b in [{b_lo}, {b_hi}] (min a3={a3_hi:.3e})")
        return CriticalB(None, None, False, "no instability in range")

    k_lo, a3_lo = minimize_a3_over_k(params, b_lo, k_range)
    if a3_lo <= 0:
        return CriticalB(b_lo, k_lo, True, "unstable at lower end of range")

    k_at = k_hi
    while b_hi - b_lo > settings["b_tol"]:
        mid = 0.5 * (b_lo + b_hi)
        k_mid, a3_mid = minimize_a3_over_k(params, mid, k_range)
        if a3_mid <= 0:
            b_hi, k_at = mid, k_mid
        else:
            b_lo = mid

    logger.info(f"Critical competition b_min={b_hi:.4f} at k={k_at:.4f}")
    return CriticalB(b_hi, k_at, True)


def a3_loci(
    params: ModelParams, b_values: Sequence[float], k_values: Sequence[float]
) -> pd.DataFrame:
    """a3 and da3/dk over a (b, k) grid; their zero sets intersect at b_min"""
    step = Config.STABILITY["fd_step"]
    rows = []
    for b in b_values:
        for k in k_values:
            rows.append(
                {
                    "b": float(b),
                    "k": float(k),
                    "a3": _a3_symmetric(params, float(b), float(k)),
                    "da3_dk": _da3_dk(params, float(b), float(k), step),
                }
            )
    return pd.DataFrame(rows)


def _threshold_cell(
    value: float,
    name: str,
    base: ModelParams,
    b_range: Optional[Tuple[float, float]],
    k_range: Optional[Tuple[float, float]],
) -> Dict[str, float]:
    result = critical_b(base.with_updates(**{name: float(value)}), b_range, k_range)
    return {
        "param_value": float(value),
        "b_min": result.b_min if result.found else float("nan"),
        "k_at_min": result.k_at_min if result.found else float("nan"),
        "found": int(result.found),
    }


def threshold_curves(
    varying_param: str,
    values: Sequence[float],
    base_params: ModelParams = None,
    b_range: Tuple[float, float] = None,
    k_range: Tuple[float, float] = None,
    workers: int = None,
) -> pd.DataFrame:
    """
    Critical competition b_min as one parameter varies

    Args:
        varying_param: One of D1, D2, chi, r1, r2
        values: Parameter samples
        base_params: Values of the other parameters (defaults when omitted)
        b_range: b search interval
        k_range: k search interval
        workers: Worker processes for the sweep

    Returns:
        DataFrame ordered by input value; b_min is NaN where no instability exists
    """
    if varying_param not in THRESHOLD_PARAMETERS:
        raise ValueError(f"Unsupported threshold parameter: {varying_param}")

    base_params = base_params or ModelParams()
    cell = partial(
        _threshold_cell,
        name=varying_param,
        base=base_params,
        b_range=b_range,
        k_range=k_range,
    )
    rows: List[Dict[str, float]] = parallel_map(cell, list(values), workers)
    frame = pd.DataFrame(rows)

    gaps = int((frame["found"] == 0).sum())
    logger.info(f"Threshold curve over {varying_param}: {len(frame)} points, {gaps} gaps")
    return frame
