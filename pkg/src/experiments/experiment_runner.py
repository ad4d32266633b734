"""
Runs one configured experiment and writes its artifacts
"""

import time
import traceback
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from config import Config
from src.database.results_store import RunRegistry
from src.exceptions import ChemoLVError, ConfigurationError, ConvergenceFailure
from src.experiments.experiment_config import ExperimentConfig
from src.galerkin.galerkin_solver import (
    GalerkinProblem,
    GalerkinSolution,
    solve_with_kicks,
)
from src.galerkin.truncation_study import coefficient_row, parameter_characteristics, truncation_study
from src.model.model_core import (
    DEGENERATE_NOTE,
    ModelParams,
    SteadyStateKind,
    classify_well_mixed,
    steady_states,
)
from src.simulation.grid import FieldState, Grid
from src.simulation.pattern_metrics import HOMOGENEOUS, STATIONARY_PATTERN, classify, half_wavelength_window
from src.simulation.pde_solver import ChemotaxisSolver, SimOutcome
from src.simulation.perturbations import InitialCondition, stretch_window
from src.simulation.threshold import threshold_amplitude, threshold_sweep
from src.spectral.fourier_analysis import (
    ModeSpectrum,
    decompose,
    dominant_modes,
    parseval_energy,
    reconstruct,
)
from src.spectral.wavelength_scan import modal_growth_rate, wavelength_scan
from src.stability.linear_stability import (
    STATUS_UNSTABLE,
    StabilityReport,
    a3_loci,
    critical_b,
    dispersion_curve,
    growth_rate,
    instability_domain,
    predicted_spike_count,
    threshold_curves,
    union_instability_domain,
)
from src.utils.output_writer import ResultsCollector
from src.utils.parallel import parallel_map

NEGATIVE_CONTROL_CONDITIONS = (
    InitialCondition(base_state="extinction-of-u", kind="noise", amplitude=1e-3),
    InitialCondition(base_state="extinction-of-u", kind="finite-u", amplitude=0.9),
    InitialCondition(base_state="extinction-of-v", kind="noise", amplitude=1e-3),
    InitialCondition(base_state="extinction-of-v", kind="cosine", amplitude=1e-2, mode_index=1),
    InitialCondition(base_state="extinction-of-v", kind="finite-v", amplitude=0.9),
    InitialCondition(base_state="extinction-of-v", kind="finite-v", amplitude=0.9, center_fraction=0.1),
)


@dataclass
class RunResult:
    exit_code: int
    artifacts: List[Path] = field(default_factory=list)
    outcomes: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None


def orient(state: FieldState, grid: Grid, orientation: str) -> FieldState:
    """Mirror a state so that alpha_1 has the requested sign"""
    if orientation == "none":
        return state
    alpha_1 = decompose(state.u, grid.L, 1)[1]
    wanted = 1.0 if orientation == "alpha1-positive" else -1.0
    if alpha_1 * wanted < 0:
        logger.debug(f"Mirroring reference state (alpha_1={alpha_1:.4f})")
        mirrored = state.mirrored()
        mirrored.meta = dict(state.meta, mirrored=True)
        return mirrored
    return state


def _control_cell(
    initial: InitialCondition, params: ModelParams, dx: float, sim_options: Dict
) -> Dict[str, Any]:
    grid = Grid.from_spacing(params.L, dx)
    options = dict(sim_options)
    solver = ChemotaxisSolver(params, grid, chemotaxis_scheme=options.pop("chemotaxis_scheme", None))
    try:
        start = initial.build(params, grid)
    except ValueError as e:
        return {"initial_condition": initial.describe(), "classification": "skipped", "converged": 0,
                "half_spikes": 0, "note": str(e)}
    outcome = solver.run_to_stationary(start, **options)
    return {
        "initial_condition": initial.describe(),
        "classification": outcome.classification,
        "converged": int(outcome.converged),
        "half_spikes": outcome.spike_count.half_spikes if outcome.spike_count else 0,
        "note": "",
    }


class ExperimentRunner:
    """Executes the command named in an ExperimentConfig"""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.output_dir = Path(config.run.output_dir) if config.run.output_dir else Config.BASE_OUTPUT_PATH
        self.collector = ResultsCollector(self.output_dir)
        self.outcomes: Dict[str, Any] = {}
        self.handlers = {
            "simulate": self.run_simulate,
            "dispersion": self.run_dispersion,
            "stability-map": self.run_stability_map,
            "critical-b": self.run_critical_b,
            "threshold-curves": self.run_threshold_curves,
            "threshold-amplitude": self.run_threshold_amplitude,
            "decompose": self.run_decompose,
            "wavelength-scan": self.run_wavelength_scan,
            "galerkin": self.run_galerkin,
            "truncation-study": self.run_truncation_study,
            "param-study": self.run_param_study,
            "well-mixed": self.run_well_mixed,
            "negative-control": self.run_negative_control,
        }

    @property
    def params(self) -> ModelParams:
        return self.config.params

    @property
    def workers(self) -> Optional[int]:
        return self.config.run.workers

    def grid_for(self, params: ModelParams = None) -> Grid:
        params = params or self.params
        return Grid.from_spacing(params.L, self.config.grid.dx)

    def _sweep_values(self) -> List[float]:
        if not self.config.sweep.active:
            raise ConfigurationError(f"Command '{self.config.command}' needs a [sweep] parameter")
        return self.config.sweep.samples()

    def run(self) -> RunResult:
        """
        Execute the configured command

        Errors are turned into an error.json record and an exit code; the
        manifest and the run registry row are written in every case.

        Returns:
            RunResult with exit code, artifact paths and manifest outcomes
        """
        command = self.config.command
        started = time.perf_counter()
        exit_code, error = 0, None
        logger.info(f"Running '{command}' into {self.output_dir}")

        try:
            self.handlers[command]()
        except ChemoLVError as e:
            exit_code, error = e.exit_code, str(e)
            self._record_error(e)
        except Exception as e:
            exit_code, error = 1, str(e)
            self._record_error(e)

        wall_time = time.perf_counter() - started
        status = "success" if exit_code == 0 else "failed"
        self._write_manifest(status, exit_code, wall_time)
        RunRegistry(self.output_dir).record_run(
            command=command,
            preset=self.config.run.preset or "",
            status=status,
            exit_code=exit_code,
            wall_time=wall_time,
            output_dir=str(self.output_dir),
            summary=", ".join(f"{k}={v}" for k, v in self.outcomes.items()),
        )
        logger.info(f"'{command}' finished with status {status} in {wall_time:.1f}s")
        return RunResult(exit_code, list(self.collector.artifacts), dict(self.outcomes), error)

    def _record_error(self, error: Exception):
        logger.error(f"Error executing '{self.config.command}': {error}")
        self.collector.write_error(
            {
                "command": self.config.command,
                "error_type": type(error).__name__,
                "exit_code": getattr(error, "exit_code", 1),
                "message": str(error),
                "traceback": traceback.format_exc(),
            }
        )

    def _write_manifest(self, status: str, exit_code: int, wall_time: float):
        entries: Dict[str, Any] = dict(self.config.flatten())
        entries["perturbation.description"] = self.config.perturbation.to_initial().describe()
        entries.update({f"outcome.{key}": value for key, value in self.outcomes.items()})
        entries["status"] = status
        entries["exit_code"] = exit_code
        entries["wall_time"] = round(wall_time, 3)
        self.collector.write_manifest(entries)

    def _simulate(
        self, params: ModelParams, grid: Grid, output_times=(), initial: FieldState = None
    ) -> SimOutcome:
        options = self.config.grid.sim_options()
        solver = ChemotaxisSolver(params, grid, chemotaxis_scheme=options.pop("chemotaxis_scheme"))
        if initial is None:
            initial = self.config.perturbation.to_initial().build(params, grid)
        return solver.run_to_stationary(initial, output_times=output_times, **options)

    def _window_reference(self, grid: Grid) -> SimOutcome:
        """Relax a half-wavelength of the pattern simulated on a longer domain"""
        source_L = self.config.analysis.window_source_L
        source_params = self.params.with_updates(L=source_L)
        source_grid = self.grid_for(source_params)
        source = self._simulate(source_params, source_grid)
        window = half_wavelength_window(source.final, source_grid)
        if source.classification != STATIONARY_PATTERN or window is None:
            raise ConvergenceFailure(
                f"No stationary pattern at L={source_L:g} to take a half-wavelength from "
                f"({source.classification})"
            )
        self.outcomes["reference_window"] = f"{window[0]:.2f}..{window[1]:.2f} of L={source_L:g}"
        start = stretch_window(source.final, source_grid, window[0], window[1], grid)
        return self._simulate(self.params, grid, initial=start)

    def _reference_state(self, grid: Grid) -> Tuple[FieldState, Grid]:
        """Simulated stationary state used to seed and judge Galerkin roots"""
        analysis = self.config.analysis
        if analysis.profile_csv:
            state = FieldState.from_frame(pd.read_csv(analysis.profile_csv))
            if len(state.u) != grid.N:
                grid = Grid(self.params.L, len(state.u))
        else:
            if analysis.window_source_L:
                outcome = self._window_reference(grid)
            else:
                outcome = self._simulate(self.params, grid)
            self.outcomes["reference_classification"] = outcome.classification
            if not outcome.converged:
                logger.warning("Reference simulation did not reach a stationary state")
            state = outcome.final
        state = orient(state, grid, analysis.orientation)
        self.collector.write_profile("reference_profile", state, grid)
        if analysis.require_pattern and classify(state, converged=True) == HOMOGENEOUS:
            raise ConvergenceFailure(f"Reference state at L={grid.L:g} is homogeneous, no pattern to compare")
        return state, grid

    def _write_series(self, stem: str, grid: Grid, state: FieldState):
        if self.config.run.write_dat:
            for name in ("u", "v", "c"):
                self.collector.write_dat(f"{stem}_{name}", grid.x, state.field(name))

    def run_simulate(self):
        grid = self.grid_for()
        outcome = self._simulate(self.params, grid, self.config.grid.output_times)
        self.outcomes.update(outcome.summary())

        for snapshot in outcome.snapshots:
            self.collector.write_profile(f"profile_t{snapshot.t:g}", snapshot, grid)
        self.collector.write_profile("final_profile", outcome.final, grid)
        self._write_series("final_profile", grid, outcome.final)

        spectrum = ModeSpectrum.from_state(outcome.final, grid, self.config.analysis.M)
        self.collector.write_csv("spectrum", spectrum.to_frame())
        modes = dominant_modes(spectrum, self.config.analysis.threshold)
        self.outcomes["alpha_0"] = float(spectrum.alpha[0])
        self.outcomes["fundamental_mode"] = modes.fundamental if modes.fundamental is not None else "none"
        if modes.fundamental is not None:
            self.outcomes[f"alpha_{modes.fundamental}"] = float(spectrum.alpha[modes.fundamental])
            self.outcomes[f"gamma_{modes.fundamental}"] = float(spectrum.gamma[modes.fundamental])
        self.outcomes["amplitude_u"] = spectrum.amplitude_estimate("u")

        coexistence = steady_states(self.params).by_kind(SteadyStateKind.COEXISTENCE)
        if coexistence is not None and coexistence.physical:
            report = dispersion_curve(coexistence, self.params)
            if report.lambda_star > 0 and report.k_star > 0:
                prediction = predicted_spike_count(report.k_star, self.params.L)
                self.outcomes["predicted_half_spikes"] = prediction.half_spikes

        if self.config.run.require_convergence and not outcome.converged:
            raise ConvergenceFailure(f"Simulation not stationary by t={outcome.final.t:g}")

    def _steady_state(self, params: ModelParams):
        state = steady_states(params).by_kind(SteadyStateKind(self.config.analysis.state))
        if state is None:
            raise ConfigurationError(
                f"Steady state {self.config.analysis.state} does not exist: {DEGENERATE_NOTE}"
            )
        return state

    def _dispersion_frame(self, params: ModelParams) -> Tuple[StabilityReport, pd.DataFrame]:
        analysis = self.config.analysis
        report = dispersion_curve(
            self._steady_state(params), params, analysis.k_min, analysis.k_max, analysis.n_points
        )
        frame = report.to_frame()
        with np.errstate(divide="ignore"):
            frame.insert(1, "wavelength", np.where(frame["k"] > 0, 2.0 * np.pi / frame["k"], np.nan))
        return report, frame

    def run_dispersion(self):
        if self.config.sweep.active:
            name = self.config.sweep.parameter
            frames = []
            for value in self._sweep_values():
                report, frame = self._dispersion_frame(self.params.with_updates(**{name: value}))
                frame.insert(0, "param_value", value)
                frames.append(frame)
                self.outcomes[f"k_star[{name}={value:g}]"] = report.k_star
                self.outcomes[f"lambda_star[{name}={value:g}]"] = report.lambda_star
            self.collector.write_csv("dispersion", pd.concat(frames, ignore_index=True))
            return

        report, frame = self._dispersion_frame(self.params)
        self.collector.write_csv("dispersion", frame)
        if self.config.run.write_dat:
            self.collector.write_dat("dispersion", frame["k"], frame["growth_rate"])
        self.outcomes.update({"k_star": report.k_star, "lambda_star": report.lambda_star})
        if report.k_star > 0:
            prediction = predicted_spike_count(report.k_star, self.params.L)
            self.outcomes["predicted_half_spikes"] = prediction.half_spikes
            self.outcomes["predicted_full_spikes"] = prediction.full_spikes
            if self.config.analysis.simulate and prediction.half_spikes >= 1:
                grid = self.grid_for()
                k_mode = prediction.half_spikes * np.pi / self.params.L
                measured = modal_growth_rate(self.params, grid, prediction.half_spikes)
                predicted = growth_rate(report.state, k_mode, self.params)
                self.outcomes.update({"measured_growth_rate": measured, "predicted_growth_rate": predicted})

    def _b_grid(self) -> np.ndarray:
        analysis = self.config.analysis
        return np.linspace(analysis.b_min, analysis.b_max, analysis.b_steps)

    def run_stability_map(self):
        analysis = self.config.analysis
        b_values = self._b_grid()
        domain = instability_domain(self.params, analysis.k, b_values, b_values)
        self.collector.write_csv("stability_map", domain.to_frame())
        k_values = np.linspace(max(analysis.k_min, 1e-3), analysis.k_max, analysis.union_k_points)
        union = union_instability_domain(self.params, k_values, b_values, b_values)
        self.collector.write_csv("stability_map_union", union.to_frame())
        self.outcomes.update(
            {
                "unstable_points": int(np.sum(domain.status == STATUS_UNSTABLE)),
                "unstable_points_union": int(np.sum(union.status == STATUS_UNSTABLE)),
                "grid_points": int(domain.status.size),
            }
        )

    def run_critical_b(self):
        analysis = self.config.analysis
        result = critical_b(
            self.params,
            (analysis.b_search_min, analysis.b_search_max),
            (analysis.k_search_min, analysis.k_search_max),
        )
        self.outcomes.update(
            {
                "b_min": result.b_min if result.found else "none",
                "k_at_min": result.k_at_min if result.found else "none",
                "found": int(result.found),
                "note": result.message or "none",
            }
        )
        k_values = np.linspace(max(analysis.k_min, 1e-3), analysis.k_max, analysis.n_points)
        self.collector.write_csv("a3_loci", a3_loci(self.params, self._b_grid(), k_values))

    def run_threshold_curves(self):
        analysis = self.config.analysis
        frame = threshold_curves(
            self.config.sweep.parameter,
            self._sweep_values(),
            self.params,
            (analysis.b_search_min, analysis.b_search_max),
            (analysis.k_search_min, analysis.k_search_max),
            self.workers,
        )
        self.collector.write_csv("threshold_curve", frame)
        found = frame[frame["found"] == 1]["param_value"]
        missing = frame[frame["found"] == 0]["param_value"]
        self.outcomes.update(
            {
                "points_with_instability": len(found),
                "points_without_instability": len(missing),
                "instability_range": f"{found.min():g}..{found.max():g}" if len(found) else "none",
            }
        )

    def run_threshold_amplitude(self):
        analysis = self.config.analysis
        width = self.config.perturbation.width_fraction
        options = self.config.grid.sim_options()
        if self.config.sweep.active:
            frame = threshold_sweep(
                self.config.sweep.parameter,
                self._sweep_values(),
                self.params,
                self.config.grid.dx,
                analysis.amplitude_lo,
                analysis.amplitude_hi,
                analysis.amplitude_tol,
                width,
                options,
                self.workers,
            )
            self.collector.write_csv("threshold_amplitude", frame)
            self.outcomes["points_with_threshold"] = int(frame["found"].sum())
            return

        result = threshold_amplitude(
            self.params,
            self.grid_for(),
            analysis.amplitude_lo,
            analysis.amplitude_hi,
            analysis.amplitude_tol,
            width,
            options,
        )
        trials = pd.DataFrame(result.trials, columns=["amplitude", "classification"])
        self.collector.write_csv("threshold_trials", trials)
        self.outcomes.update(
            {"threshold": result.threshold if result.found else "none", "found": int(result.found)}
        )

    def run_decompose(self):
        grid = self.grid_for()
        if self.config.analysis.profile_csv:
            state = FieldState.from_frame(pd.read_csv(self.config.analysis.profile_csv))
            grid = Grid(self.params.L, len(state.u))
        else:
            outcome = self._simulate(self.params, grid)
            self.outcomes["classification"] = outcome.classification
            state = outcome.final

        spectrum = ModeSpectrum.from_state(state, grid, self.config.analysis.M)
        self.collector.write_csv("spectrum", spectrum.to_frame())
        modes = dominant_modes(spectrum, self.config.analysis.threshold)
        self.collector.write_csv(
            "dominant_modes", pd.DataFrame(modes.modes, columns=["index", "alpha"])
        )
        self.collector.write_profile("reconstructed_profile", reconstruct(spectrum, grid), grid)
        self.outcomes.update(
            {
                "fundamental_mode": modes.fundamental if modes.fundamental is not None else "none",
                "harmonics": ", ".join(str(i) for i in modes.harmonics) or "none",
                "energy_u": parseval_energy(spectrum, "u"),
                "amplitude_u": spectrum.amplitude_estimate("u"),
            }
        )

    def run_wavelength_scan(self):
        analysis = self.config.analysis
        scan = wavelength_scan(
            self.params,
            analysis.L_values(),
            analysis.mode_budget,
            self.config.perturbation.to_initial(),
            self.config.grid.dx,
            self.config.grid.sim_options(),
            self.workers,
        )
        self.collector.write_csv("wavelength_scan", scan.table)
        if self.config.run.write_dat:
            for i in range(min(4, analysis.mode_budget)):
                self.collector.write_dat(f"alpha_{i}_vs_L", scan.table["L"], scan.table[f"alpha_{i}"])
        self.outcomes.update(
            {
                "Lambda0": scan.Lambda0 if scan.Lambda0 is not None else "none",
                "alpha_max": scan.alpha_max if scan.alpha_max is not None else "none",
                "mode_windows": "; ".join(f"mode {m}: L={a:g}..{b:g}" for m, a, b in scan.windows),
                "initial_condition": scan.initial_condition,
            }
        )

    def _check_galerkin(self, solutions: Dict[int, GalerkinSolution]):
        for M, solution in solutions.items():
            self.outcomes[f"converged_M{M}"] = int(solution.converged)
            self.outcomes[f"patterned_M{M}"] = int(solution.is_patterned())
        failed = [M for M, solution in solutions.items() if not solution.converged]
        if failed:
            raise ConvergenceFailure(f"Galerkin Newton did not converge for M={failed}")
        if self.config.analysis.require_pattern:
            trivial = [M for M, solution in solutions.items() if not solution.is_patterned()]
            if trivial:
                raise ConvergenceFailure(f"Galerkin roots for M={trivial} are homogeneous")

    def run_galerkin(self):
        analysis = self.config.analysis
        orders = analysis.galerkin_orders()
        if analysis.seed_source == "simulation":
            reference, grid = self._reference_state(self.grid_for())
            study = truncation_study(
                self.params, reference, grid, max(orders), analysis.residual_method, self.workers, orders
            )
            self.collector.write_csv("galerkin", study.table)
            solutions = study.solutions
        else:
            solutions = {}
            rows = []
            for M in orders:
                problem = GalerkinProblem(self.params, M)
                solution = solve_with_kicks(problem, method=analysis.residual_method)
                solutions[M] = solution
                row = coefficient_row(f"M={M}", M, solution.spectrum, max(orders))
                row.update(
                    {
                        "converged": int(solution.converged),
                        "newton_iters": solution.newton_iters,
                        "residual_norm": solution.residual_norm,
                        "seed": solution.seed_descriptor,
                    }
                )
                rows.append(row)
            self.collector.write_csv("galerkin", pd.DataFrame(rows))

        for M, solution in solutions.items():
            self.outcomes[f"alpha_M{M}"] = ", ".join(f"{a:.4f}" for a in solution.spectrum.alpha)
        self._check_galerkin(solutions)

    def run_truncation_study(self):
        analysis = self.config.analysis
        reference, grid = self._reference_state(self.grid_for())
        study = truncation_study(
            self.params, reference, grid, analysis.M_max, analysis.residual_method, self.workers
        )
        self.collector.write_csv("truncation_study", study.table)
        for M, solution in study.solutions.items():
            self.collector.write_profile(f"galerkin_profile_M{M}", reconstruct(solution.spectrum, grid), grid)
            self.outcomes[f"er_u_M{M}"] = study.er(M, "u")
            self.outcomes[f"er_v_M{M}"] = study.er(M, "v")
        self._check_galerkin(study.solutions)

    def run_param_study(self):
        analysis = self.config.analysis
        frame = parameter_characteristics(
            self.config.sweep.parameter,
            self._sweep_values(),
            self.params,
            analysis.L_values(),
            analysis.M_max,
            analysis.simulate,
            self.config.grid.dx,
            self.config.perturbation.to_initial(),
            self.config.grid.sim_options(),
            self.workers,
        )
        self.collector.write_csv("param_study", frame)
        self.outcomes["irregular_points"] = int(frame["irregular"].sum())
        self.outcomes["patterned_points"] = int(frame["Lambda_u"].notna().sum())

    def run_well_mixed(self):
        states = steady_states(self.params)
        rows = []
        for state in states:
            verdict = classify_well_mixed(state, self.params)
            row = {
                "kind": state.kind.value,
                "u_star": state.u_star,
                "v_star": state.v_star,
                "c_star": state.c_star,
                "physical": int(verdict.physical),
                "stable": int(verdict.stable),
            }
            row.update({f"eig_{i + 1}": value for i, value in enumerate(verdict.eigenvalue_real_parts)})
            rows.append(row)
            self.outcomes[f"stable[{state.kind.value}]"] = int(verdict.stable)
        self.collector.write_csv("well_mixed", pd.DataFrame(rows))
        if states.note:
            self.outcomes["note"] = states.note

    def run_negative_control(self):
        if not (self.params.b1 > 1 and self.params.b2 < 1):
            logger.warning(
                f"Negative control expects b1 > 1 and b2 < 1, got b1={self.params.b1}, b2={self.params.b2}"
            )
        conditions = list(NEGATIVE_CONTROL_CONDITIONS) + [self.config.perturbation.to_initial()]
        cell = partial(
            _control_cell,
            params=self.params,
            dx=self.config.grid.dx,
            sim_options=self.config.grid.sim_options(),
        )
        frame = pd.DataFrame(parallel_map(cell, conditions, self.workers))
        self.collector.write_csv("negative_control", frame)
        patterned = int((frame["classification"] == STATIONARY_PATTERN).sum())
        self.outcomes.update({"runs": len(frame), "patterned_runs": patterned})
        if patterned:
            logger.warning(f"{patterned} negative-control runs formed a stationary pattern")


def run_experiment(config: ExperimentConfig) -> RunResult:
    """
    Execute one experiment end to end

    Args:
        config: Validated experiment configuration

    Returns:
        RunResult; exit_code 0 on success, 3 on numerical faults,
        4 on required convergence that failed, 1 otherwise
    """
    return ExperimentRunner(config).run()
