"""
Truncated cosine-Galerkin system for stationary patterns

The stationary equations

    0 = D1 u'' - chi (u c')' + r1 u (1 - u - b1 v)
    0 = D2 v'' + r2 v (1 - v - b2 u)
    0 = c'' + v - c

are projected onto cos(j k x), k = pi / L, j = 0..M. The c equation is
solved exactly mode by mode (beta_j = gamma_j / (1 + (j k)^2)), leaving
2M + 2 unknowns alpha_0..alpha_M, gamma_0..gamma_M.
"""

from dataclasses import dataclass, replace
from typing import Callable, Iterator, Tuple

import numpy as np
from loguru import logger
from scipy.integrate import trapezoid

from config import Config
from src.model.model_core import ModelParams, SteadyStateKind, steady_states
from src.spectral.fourier_analysis import ModeSpectrum

METHODS = ("quadrature", "convolution")


def beta_from_gamma(gamma: np.ndarray, k: float) -> np.ndarray:
    """Cosine coefficients of c slaved to those of v"""
    gamma = np.asarray(gamma, dtype=float)
    indices = np.arange(len(gamma))
    return gamma / (1.0 + (indices * k) ** 2)


class GalerkinProblem:
    """Residual map of the truncated stationary system"""

    def __init__(self, params: ModelParams, M: int, quadrature_points: int = None):
        if M < 0:
            raise ValueError(f"Truncation order must be non-negative, got {M}")
        self.params = params
        self.M = M
        self.k = np.pi / params.L
        self.indices = np.arange(M + 1)
        self.wavenumbers = self.indices * self.k

        # quadrature_points samples per period 2L, i.e. half of them on [0, L]
        points = quadrature_points or Config.GALERKIN["quadrature_points"]
        self.x = np.linspace(0.0, params.L, points // 2 + 1)
        phase = np.outer(self.wavenumbers, self.x)
        self._cos = np.cos(phase)
        self._sin = np.sin(phase)
        self._projection = np.where(self.indices == 0, 1.0, 2.0) / params.L

    @property
    def size(self) -> int:
        return 2 * self.M + 2

    def split(self, unknowns: np.ndarray):
        unknowns = np.asarray(unknowns, dtype=float)
        if unknowns.shape != (self.size,):
            raise ValueError(f"Expected {self.size} unknowns, got shape {unknowns.shape}")
        return unknowns[: self.M + 1], unknowns[self.M + 1 :]

    @staticmethod
    def pack(alpha: np.ndarray, gamma: np.ndarray) -> np.ndarray:
        return np.concatenate([np.asarray(alpha, dtype=float), np.asarray(gamma, dtype=float)])

    def residuals(self, unknowns: np.ndarray) -> np.ndarray:
        """Projections of both stationary equations onto cos(j k x), j = 0..M"""
        p = self.params
        alpha, gamma = self.split(unknowns)
        beta = beta_from_gamma(gamma, self.k)
        kk = self.wavenumbers

        u = alpha @ self._cos
        u_x = -(alpha * kk) @ self._sin
        u_xx = -(alpha * kk**2) @ self._cos
        v = gamma @ self._cos
        v_xx = -(gamma * kk**2) @ self._cos
        c_x = -(beta * kk) @ self._sin
        c_xx = -(beta * kk**2) @ self._cos

        f_u = p.D1 * u_xx - p.chi * (u_x * c_x + u * c_xx) + p.r1 * u * (1.0 - u - p.b1 * v)
        f_v = p.D2 * v_xx + Config.V_REACTION_SIGN * p.r2 * v * (1.0 - v - p.b2 * u)

        r_u = self._projection * trapezoid(self._cos * f_u, self.x, axis=1)
        r_v = self._projection * trapezoid(self._cos * f_v, self.x, axis=1)
        return np.concatenate([r_u, r_v])

    def _product(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Cosine coefficients 0..M of the product of two cosine series"""
        i, j = np.meshgrid(self.indices, self.indices, indexing="ij")
        weights = 0.5 * np.outer(a, b)
        result = np.zeros(self.M + 1)
        total, gap = i + j, np.abs(i - j)
        keep = total <= self.M
        np.add.at(result, total[keep], weights[keep])
        np.add.at(result, gap, weights)
        return result

    def convolution_residuals(self, unknowns: np.ndarray) -> np.ndarray:
        """Same residuals from product-to-sum identities instead of quadrature"""
        p = self.params
        alpha, gamma = self.split(unknowns)
        beta = beta_from_gamma(gamma, self.k)
        k2 = self.k**2
        n2 = self.indices**2

        # -chi (u c')' = (chi k^2 / 2) sum_ij j a_i b_j [(i+j) cos((i+j)kx) - (i-j) cos(|i-j|kx)]
        i, j = np.meshgrid(self.indices, self.indices, indexing="ij")
        base = j * np.outer(alpha, beta)
        chemotaxis = np.zeros(self.M + 1)
        total, gap = i + j, np.abs(i - j)
        keep = total <= self.M
        np.add.at(chemotaxis, total[keep], (base * total)[keep])
        np.add.at(chemotaxis, gap, -base * (i - j))
        chemotaxis *= 0.5 * p.chi * k2

        uu = self._product(alpha, alpha)
        uv = self._product(alpha, gamma)
        vv = self._product(gamma, gamma)

        r_u = -p.D1 * n2 * k2 * alpha + chemotaxis + p.r1 * (alpha - uu - p.b1 * uv)
        r_v = -p.D2 * n2 * k2 * gamma + Config.V_REACTION_SIGN * p.r2 * (gamma - vv - p.b2 * uv)
        return np.concatenate([r_u, r_v])

    def residual_function(self, method: str = "quadrature") -> Callable[[np.ndarray], np.ndarray]:
        if method not in METHODS:
            raise ValueError(f"Unknown residual method: {method}")
        return self.residuals if method == "quadrature" else self.convolution_residuals

    def spectrum(self, unknowns: np.ndarray) -> ModeSpectrum:
        alpha, gamma = self.split(unknowns)
        return ModeSpectrum(
            L=self.params.L,
            alpha=alpha.copy(),
            gamma=gamma.copy(),
            beta=beta_from_gamma(gamma, self.k),
        )


@dataclass
class GalerkinSolution:
    spectrum: ModeSpectrum
    residual_norm: float
    converged: bool
    newton_iters: int
    seed_descriptor: str
    message: str = ""

    @property
    def M(self) -> int:
        return self.spectrum.M

    @property
    def unknowns(self) -> np.ndarray:
        return np.concatenate([self.spectrum.alpha, self.spectrum.gamma])

    def is_patterned(self, tol: float = None) -> bool:
        tol = Config.GALERKIN["nontrivial_tol"] if tol is None else tol
        return bool(self.M >= 1 and np.max(np.abs(self.spectrum.alpha[1:])) > tol)

    def mirrored(self) -> "GalerkinSolution":
        """Same root reflected by x -> L - x"""
        signs = mirror_signs(self.M)
        source = self.spectrum
        spectrum = ModeSpectrum(source.L, source.alpha * signs, source.gamma * signs, source.beta * signs)
        return replace(self, spectrum=spectrum, seed_descriptor=f"{self.seed_descriptor}, mirrored")


def mirror_signs(M: int) -> np.ndarray:
    """(-1)^j: cos(j k (L - x)) = (-1)^j cos(j k x)"""
    return np.where(np.arange(M + 1) % 2 == 0, 1.0, -1.0)


def mirror_unknowns(unknowns: np.ndarray, M: int) -> np.ndarray:
    signs = mirror_signs(M)
    return np.asarray(unknowns, dtype=float) * np.concatenate([signs, signs])


def numerical_jacobian(
    function: Callable[[np.ndarray], np.ndarray], x: np.ndarray, step: float = None
) -> np.ndarray:
    """Central-difference Jacobian, one column per unknown"""
    step = Config.GALERKIN["fd_step"] if step is None else step
    x = np.asarray(x, dtype=float)
    columns = []
    for m in range(len(x)):
        shift = np.zeros_like(x)
        shift[m] = step
        columns.append((function(x + shift) - function(x - shift)) / (2.0 * step))
    return np.column_stack(columns)


def default_seed(problem: GalerkinProblem, kick: float = None) -> np.ndarray:
    """Coexistence state (or (1, 0, 0) when it is not physical) plus an alpha_1 kick"""
    kick = Config.GALERKIN["alpha1_kick"] if kick is None else kick
    states = steady_states(problem.params)
    state = states.by_kind(SteadyStateKind.COEXISTENCE)
    if state is None or not state.physical:
        state = states.by_kind(SteadyStateKind.EXTINCTION_OF_V)
    alpha = np.zeros(problem.M + 1)
    gamma = np.zeros(problem.M + 1)
    alpha[0], gamma[0] = state.u_star, state.v_star
    if problem.M >= 1:
        alpha[1] = kick
    return problem.pack(alpha, gamma)


def seed_from_spectrum(spectrum: ModeSpectrum, M: int) -> np.ndarray:
    """First M + 1 alpha and gamma coefficients, zero-padded if needed"""
    alpha = np.zeros(M + 1)
    gamma = np.zeros(M + 1)
    available = min(M, spectrum.M) + 1
    alpha[:available] = spectrum.alpha[:available]
    gamma[:available] = spectrum.gamma[:available]
    return np.concatenate([alpha, gamma])


def gamma_for_alpha(problem: GalerkinProblem, alpha: np.ndarray, method: str = "quadrature") -> np.ndarray:
    """
    v coefficients that zero the u residuals for fixed u coefficients

    The u equation is affine in (v, c) and c is slaved to v, so its
    projections are affine in gamma; the system is solved in the
    least-squares sense when it is singular.
    """
    function = problem.residual_function(method)
    n = problem.M + 1
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (n,):
        raise ValueError(f"Expected {n} alpha coefficients, got shape {alpha.shape}")
    base = function(problem.pack(alpha, np.zeros(n)))[:n]
    system = np.column_stack(
        [function(problem.pack(alpha, column))[:n] - base for column in np.eye(n)]
    )
    gamma, *_ = np.linalg.lstsq(system, -base, rcond=None)
    return gamma


def seed_from_alpha(problem: GalerkinProblem, alpha: np.ndarray, method: str = "quadrature") -> np.ndarray:
    """Seed built from u coefficients alone"""
    return problem.pack(alpha, gamma_for_alpha(problem, alpha, method))


def newton_solve(
    problem: GalerkinProblem,
    seed: np.ndarray,
    seed_descriptor: str = "explicit",
    method: str = "quadrature",
    max_iter: int = None,
    tol: float = None,
    fd_step: float = None,
    max_halvings: int = None,
) -> GalerkinSolution:
    """
    Damped Newton iteration on the Galerkin residuals

    Args:
        problem: Truncated system
        seed: Initial unknowns (alpha then gamma)
        seed_descriptor: Provenance of the seed, stored in the solution
        method: Residual evaluation, "quadrature" or "convolution"
        max_iter: Newton iteration limit
        tol: Residual 2-norm for convergence
        fd_step: Central-difference step of the Jacobian
        max_halvings: Step halvings allowed when the residual grows

    Returns:
        GalerkinSolution holding the last iterate, converged or not
    """
    settings = Config.GALERKIN
    max_iter = settings["max_iter"] if max_iter is None else max_iter
    tol = settings["tol"] if tol is None else tol
    fd_step = settings["fd_step"] if fd_step is None else fd_step
    max_halvings = settings["max_halvings"] if max_halvings is None else max_halvings

    x = np.asarray(seed, dtype=float).copy()
    if x.shape != (problem.size,) or not np.all(np.isfinite(x)):
        raise ValueError("Seed must be a finite vector of 2M + 2 unknowns")

    function = problem.residual_function(method)
    residual = function(x)
    norm = float(np.linalg.norm(residual))
    iterations = 0
    message = ""

    while norm >= tol and iterations < max_iter:
        jacobian = numerical_jacobian(function, x, fd_step)
        try:
            delta = np.linalg.solve(jacobian, -residual)
        except np.linalg.LinAlgError:
            message = "singular Jacobian"
            break
        if not np.all(np.isfinite(delta)):
            message = "singular Jacobian"
            break

        scale = 1.0
        accepted = False
        for _ in range(max_halvings + 1):
            trial = x + scale * delta
            trial_residual = function(trial)
            trial_norm = float(np.linalg.norm(trial_residual))
            if trial_norm < norm:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            message = "line search could not reduce the residual"
            break

        x, residual, norm = trial, trial_residual, trial_norm
        iterations += 1
        logger.debug(f"Newton iteration {iterations}: |R|={norm:.3e}, step scale {scale}")

    converged = norm < tol
    if not converged and not message:
        message = f"no convergence in {max_iter} iterations"
    if not converged:
        logger.warning(f"Galerkin M={problem.M} seed={seed_descriptor}: {message} (|R|={norm:.2e})")

    return GalerkinSolution(
        spectrum=problem.spectrum(x),
        residual_norm=norm,
        converged=converged,
        newton_iters=iterations,
        seed_descriptor=seed_descriptor,
        message=message,
    )


def patterned_seeds(
    problem: GalerkinProblem, seed: np.ndarray, seed_descriptor: str, method: str = "quadrature"
) -> Iterator[Tuple[np.ndarray, str]]:
    """
    The seed itself, then reshaped copies with a lowered alpha_0 and a set alpha_1

    alpha_1 takes the sign of the seed's alpha_1 first, then the opposite
    one; gamma is rebuilt from the new alpha each time.
    """
    seed = np.asarray(seed, dtype=float)
    yield seed, seed_descriptor
    if problem.M < 1:
        return

    settings = Config.GALERKIN
    alpha, _ = problem.split(seed)
    sign = -1.0 if alpha[1] < 0 else 1.0
    for factor in settings["alpha0_factors"]:
        for kick in settings["alpha1_kicks"]:
            for direction in (sign, -sign):
                reshaped = alpha.copy()
                reshaped[0] *= factor
                reshaped[1] = direction * kick
                descriptor = f"{seed_descriptor}, alpha_0*{factor:g}, alpha_1={direction * kick:+g}"
                yield seed_from_alpha(problem, reshaped, method), descriptor


def solve_patterned(
    problem: GalerkinProblem, seed: np.ndarray, seed_descriptor: str = "explicit", method: str = "quadrature"
) -> GalerkinSolution:
    """
    Newton from the seed, reseeding until a patterned root is found

    The root is mirrored when needed so that its alpha_1 has the sign of
    the seed's alpha_1.

    Returns:
        First converged patterned root, or the solution from the seed itself
        when every reseed ends on a homogeneous root or fails
    """
    seed = np.asarray(seed, dtype=float)
    first = None
    for candidate, descriptor in patterned_seeds(problem, seed, seed_descriptor, method):
        solution = newton_solve(problem, candidate, descriptor, method)
        if first is None:
            first = solution
        if solution.converged and solution.is_patterned():
            wanted = problem.split(seed)[0][1]
            if wanted * solution.spectrum.alpha[1] < 0:
                solution = solution.mirrored()
            logger.debug(f"Galerkin M={problem.M}: patterned root from {solution.seed_descriptor}")
            return solution

    logger.warning(f"Galerkin M={problem.M}: no patterned root from {seed_descriptor} or its reseeds")
    return first


def solve_with_kicks(
    problem: GalerkinProblem, kicks=(0.1, 0.25, 0.4), method: str = "quadrature", reseed: bool = True
) -> GalerkinSolution:
    """
    Default seeds with growing alpha_1 kicks until a patterned root is found

    With reseed, a run of homogeneous roots falls through to solve_patterned;
    without it the last kick's solution is returned.
    """
    solution = None
    for kick in kicks:
        solution = newton_solve(
            problem, default_seed(problem, kick), f"coexistence+kick({kick})", method
        )
        if solution.converged and solution.is_patterned():
            return solution
    if not reseed:
        return solution
    return solve_patterned(problem, default_seed(problem, kicks[0]), f"coexistence+kick({kicks[0]})", method)
