"""
Finite-volume integration of the chemotactic competition system

Cell-centered unknowns, 3-point diffusion with reflecting ghost cells and a
conservative chemotactic flux chi * u_face * (c_{i+1} - c_i) / dx on interior
faces. Boundary faces carry no flux, so both no-flux conditions hold exactly.
"""

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import sparse
from scipy.integrate import solve_ivp

from config import Config
from src.exceptions import SolverFault
from src.model.model_core import ModelParams, reaction_terms
from src.simulation.grid import FieldState, Grid
from src.simulation.pattern_metrics import (
    STATIONARY_PATTERN,
    SpikeCount,
    classify,
    count_spikes,
)

SCHEMES = ("centered", "upwind")
INTEGRATORS = ("euler", "bdf")


@dataclass
class SimOutcome:
    final: FieldState
    converged: bool
    residual: float
    classification: str
    spike_count: Optional[SpikeCount]
    steps: int = 0
    wall_time: float = 0.0
    snapshots: List[FieldState] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "classification": self.classification,
            "converged": self.converged,
            "residual": self.residual,
            "final_time": self.final.t,
            "steps": self.steps,
            "wall_time": self.wall_time,
            "half_spikes": self.spike_count.half_spikes if self.spike_count else "none",
            "full_spikes": self.spike_count.full_spikes if self.spike_count else "none",
        }


class ChemotaxisSolver:
    """Method-of-lines discretization of the model on a no-flux interval"""

    def __init__(
        self,
        params: ModelParams,
        grid: Grid,
        chemotaxis_scheme: str = None,
        kinetics: bool = True,
    ):
        self.params = params
        self.grid = grid
        self.scheme = chemotaxis_scheme or Config.SIMULATION["chemotaxis_scheme"]
        if self.scheme not in SCHEMES:
            raise ValueError(f"Unknown chemotaxis scheme: {self.scheme}")
        # kinetics=False drops growth, competition, production and decay
        self.kinetics = kinetics
        self.settings = Config.SIMULATION

    def _laplacian(self, f: np.ndarray) -> np.ndarray:
        padded = np.pad(f, 1, mode="edge")
        return (padded[:-2] - 2.0 * f + padded[2:]) / self.grid.dx**2

    def chemotactic_flux(self, u: np.ndarray, c: np.ndarray) -> np.ndarray:
        """Flux on all N+1 faces, zero on the two boundary faces"""
        gradient = np.diff(c) / self.grid.dx
        if self.scheme == "centered":
            u_face = 0.5 * (u[:-1] + u[1:])
        else:
            velocity = self.params.chi * gradient
            u_face = np.where(velocity > 0, u[:-1], u[1:])
        flux = np.zeros(len(u) + 1)
        flux[1:-1] = self.params.chi * u_face * gradient
        return flux

    def rhs(self, u: np.ndarray, v: np.ndarray, c: np.ndarray) -> Tuple[np.ndarray, ...]:
        """Semi-discrete time derivatives (du, dv, dc)"""
        p = self.params
        flux = self.chemotactic_flux(u, c)
        du = p.D1 * self._laplacian(u) - np.diff(flux) / self.grid.dx
        dv = p.D2 * self._laplacian(v)
        dc = self._laplacian(c)
        if self.kinetics:
            ku, kv, kc = reaction_terms(u, v, c, p)
            du += ku
            dv += kv
            dc += kc
        return du, dv, dc

    def stable_dt(self, u: np.ndarray) -> float:
        p = self.params
        scale = max(p.D1, p.D2, 1.0, abs(p.chi) * float(np.max(u)))
        return self.settings["dt_safety"] * self.grid.dx**2 / scale

    def _check(self, u: np.ndarray, v: np.ndarray, c: np.ndarray, t: float):
        lowest = min(u.min(), v.min(), c.min())
        if not np.isfinite(lowest) or not (
            np.isfinite(u.max()) and np.isfinite(v.max()) and np.isfinite(c.max())
        ):
            raise SolverFault(f"Non-finite values at t={t:.6g}")
        if lowest < -self.settings["negativity_tol"]:
            raise SolverFault(f"Negative density {lowest:.3e} at t={t:.6g}")
        if lowest < 0:
            np.maximum(u, 0.0, out=u)
            np.maximum(v, 0.0, out=v)
            np.maximum(c, 0.0, out=c)

    def step(self, state: FieldState, dt: float) -> FieldState:
        """One explicit Euler step"""
        du, dv, dc = self.rhs(state.u, state.v, state.c)
        u = state.u + dt * du
        v = state.v + dt * dv
        c = state.c + dt * dc
        t = state.t + dt
        self._check(u, v, c, t)
        return FieldState(t, u, v, c)

    def residual(self, state: FieldState) -> float:
        du, dv, dc = self.rhs(state.u, state.v, state.c)
        return float(max(np.abs(du).max(), np.abs(dv).max(), np.abs(dc).max()))

    def run_to_stationary(
        self,
        initial: FieldState,
        t_max: float = None,
        tol: float = None,
        steady_window: int = None,
        output_times: Sequence[float] = (),
        integrator: str = None,
    ) -> SimOutcome:
        """
        Integrate until the time derivative stays below tol or t_max is reached

        Args:
            initial: Starting state (not modified)
            t_max: Final time
            tol: Max-norm threshold on the discrete time derivative
            steady_window: Consecutive checks below tol required
            output_times: Times at which snapshots are recorded
            integrator: "euler" (explicit) or "bdf" (implicit, chunked)

        Returns:
            SimOutcome; not converging is reported, not raised
        """
        t_max = self.settings["t_max"] if t_max is None else t_max
        tol = self.settings["tol"] if tol is None else tol
        integrator = integrator or self.settings["integrator"]
        if tol <= 0:
            raise ValueError(f"Tolerance must be positive, got {tol}")
        if integrator not in INTEGRATORS:
            raise ValueError(f"Unknown integrator: {integrator}")

        started = time.perf_counter()
        pending = sorted(float(t) for t in output_times if t >= initial.t)
        if integrator == "euler":
            window = self.settings["steady_window"] if steady_window is None else steady_window
            final, converged, residual, steps, snapshots = self._run_euler(
                initial, t_max, tol, window, pending
            )
        else:
            window = 2 if steady_window is None else steady_window
            final, converged, residual, steps, snapshots = self._run_bdf(
                initial, t_max, tol, window, pending
            )

        classification = classify(final, converged)
        spikes = count_spikes(final, "u") if classification == STATIONARY_PATTERN else None
        outcome = SimOutcome(
            final=final,
            converged=converged,
            residual=residual,
            classification=classification,
            spike_count=spikes,
            steps=steps,
            wall_time=time.perf_counter() - started,
            snapshots=snapshots,
        )
        logger.info(
            f"Run finished at t={final.t:.1f}: {classification}, residual={residual:.2e}, "
            f"steps={steps}, {outcome.wall_time:.1f}s"
        )
        return outcome

    def _run_euler(self, initial, t_max, tol, window, pending):
        u, v, c = initial.u.copy(), initial.v.copy(), initial.c.copy()
        t = initial.t
        refresh = self.settings["dt_refresh"]
        dt = self.stable_dt(u)
        calm = steps = 0
        residual = float("inf")
        converged = False
        snapshots: List[FieldState] = []

        while t < t_max:
            if steps % refresh == 0:
                dt = self.stable_dt(u)
            du, dv, dc = self.rhs(u, v, c)
            residual = float(max(np.abs(du).max(), np.abs(dv).max(), np.abs(dc).max()))
            if residual < tol:
                calm += 1
                if calm >= window:
                    converged = True
                    break
            else:
                calm = 0

            while pending and pending[0] <= t:
                snapshots.append(FieldState(t, u.copy(), v.copy(), c.copy()))
                pending.pop(0)

            u += dt * du
            v += dt * dv
            c += dt * dc
            t += dt
            steps += 1
            self._check(u, v, c, t)

            if steps % 500000 == 0:
                logger.debug(f"t={t:.1f}, residual={residual:.3e}, amplitude={u.max() - u.min():.4f}")

        final = FieldState(t, u, v, c)
        if not converged:
            residual = self.residual(final)
        return final, converged, residual, steps, snapshots

    def jacobian_sparsity(self) -> sparse.csr_matrix:
        n = self.grid.N
        band = sparse.diags([1, 1, 1], [-1, 0, 1], shape=(n, n))
        eye = sparse.identity(n)
        return sparse.bmat(
            [[band, eye, band], [eye, band, None], [None, eye, band]], format="csr"
        )

    def _run_bdf(self, initial, t_max, tol, window, pending):
        n = self.grid.N

        def fun(_t, y):
            return np.concatenate(self.rhs(y[:n], y[n : 2 * n], y[2 * n :]))

        y = np.concatenate([initial.u, initial.v, initial.c])
        t = initial.t
        chunk = self.settings["bdf_chunk"]
        sparsity = self.jacobian_sparsity()
        calm = steps = 0
        residual = float("inf")
        converged = False
        snapshots: List[FieldState] = []

        while t < t_max:
            t_next = min(t + chunk, t_max)
            marks = [s for s in pending if s <= t_next]
            solution = solve_ivp(
                fun,
                (t, t_next),
                y,
                method="BDF",
                t_eval=marks + [t_next],
                jac_sparsity=sparsity,
                rtol=self.settings["bdf_rtol"],
                atol=self.settings["bdf_atol"],
            )
            if not solution.success:
                raise SolverFault(f"Implicit integrator failed at t={t:.6g}: {solution.message}")
            for column, mark in enumerate(marks):
                y_mark = solution.y[:, column]
                u_mark, v_mark, c_mark = (part.copy() for part in np.split(y_mark, 3))
                snapshots.append(FieldState(mark, u_mark, v_mark, c_mark))
            pending = pending[len(marks) :]

            y = solution.y[:, -1].copy()
            t = t_next
            steps += int(solution.nfev)
            u, v, c = y[:n], y[n : 2 * n], y[2 * n :]
            self._check(u, v, c, t)

            residual = float(np.abs(fun(t, y)).max())
            if residual < tol:
                calm += 1
                if calm >= window:
                    converged = True
                    break
            else:
                calm = 0

        final = FieldState(t, y[:n].copy(), y[n : 2 * n].copy(), y[2 * n :].copy())
        return final, converged, residual, steps, snapshots


def step(state: FieldState, dt: float, params: ModelParams, grid: Grid) -> FieldState:
    """Single explicit step with the configured chemotaxis scheme"""
    return ChemotaxisSolver(params, grid).step(state, dt)


def run_to_stationary(
    initial: FieldState,
    params: ModelParams,
    grid: Grid,
    t_max: float = None,
    tol: float = None,
    **options,
) -> SimOutcome:
    scheme = options.pop("chemotaxis_scheme", None)
    solver = ChemotaxisSolver(params, grid, chemotaxis_scheme=scheme)
    return solver.run_to_stationary(initial, t_max=t_max, tol=tol, **options)
