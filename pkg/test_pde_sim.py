"""
Testes da simulação das EDPs, perturbações e contagem de picos
"""
import os
import sys

import numpy as np
import pytest

# Adicionar o diretório raiz ao path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from config import Config  # noqa: E402
from src.exceptions import SolverFault  # noqa: E402
from src.model.model_core import ModelParams, SteadyStateKind, coexistence_state  # noqa: E402
from src.simulation.grid import FieldState, Grid  # noqa: E402
from src.simulation.pattern_metrics import (  # noqa: E402
    HOMOGENEOUS,
    NOT_CONVERGED,
    STATIONARY_PATTERN,
    classify,
    count_spikes,
    half_wavelength_window,
)
from src.simulation.pde_solver import ChemotaxisSolver, run_to_stationary, step  # noqa: E402
from src.simulation.perturbations import (  # noqa: E402
    InitialCondition,
    base_state,
    centered_window,
    perturb_finite,
    perturb_finite_v,
    perturb_infinitesimal,
    stretch_window,
)
from src.simulation.threshold import forms_pattern, threshold_amplitude  # noqa: E402
from src.spectral.fourier_analysis import ModeSpectrum, dominant_modes  # noqa: E402

slow = pytest.mark.skipif(not Config.RUN_SLOW_TESTS, reason="defina CHEMOLV_SLOW_TESTS=1")


def _profile(grid: Grid, u: np.ndarray) -> FieldState:
    return FieldState(0.0, u, np.full(grid.N, 0.5), np.full(grid.N, 0.5))


def test_grid():
    """Grade de células centradas"""
    grid = Grid.from_spacing(15.0, 0.25)
    assert grid.N == 60
    assert grid.dx == pytest.approx(0.25)
    np.testing.assert_allclose(grid.x[[0, -1]], [0.125, 14.875])
    assert Grid.from_spacing(1.0, 0.25).N == Config.SIMULATION["min_cells"]
    with pytest.raises(ValueError):
        Grid(10.0, 8)
    assert grid.refined().N == 120
    print("✓ Grade construída corretamente")


def test_mass_conservation_without_kinetics():
    """Sem cinética, difusão e quimiotaxia conservam a massa"""
    grid = Grid(12.0, 48)
    rng = np.random.default_rng(1)
    state = FieldState(0.0, *(rng.uniform(0.8, 1.2, grid.N) for _ in range(3)))
    for scheme in ("centered", "upwind"):
        solver = ChemotaxisSolver(ModelParams(chi=-1.0), grid, chemotaxis_scheme=scheme, kinetics=False)
        current = state.copy()
        dt = 0.5 * solver.stable_dt(current.u)
        for _ in range(200):
            current = solver.step(current, dt)
        for name in ("u", "v", "c"):
            assert current.field(name).sum() == pytest.approx(state.field(name).sum(), rel=1e-12)
    print("✓ Massa conservada nos dois esquemas")


def test_boundary_faces_carry_no_flux():
    grid = Grid(8.0, 32)
    solver = ChemotaxisSolver(ModelParams(), grid)
    flux = solver.chemotactic_flux(np.linspace(0.2, 1.0, grid.N), np.cos(np.pi * grid.x / grid.L) + 1.0)
    assert len(flux) == grid.N + 1
    assert flux[0] == 0.0 and flux[-1] == 0.0
    print("✓ Fluxo nulo nas fronteiras")


def test_homogeneous_state_is_fixed_point():
    """O estado de coexistência homogêneo não se move"""
    params = ModelParams(L=10.0)
    grid = Grid.from_spacing(params.L)
    start = base_state(params, grid, SteadyStateKind.COEXISTENCE)
    after = step(start, 0.001, params, grid)
    np.testing.assert_allclose(after.u, start.u, atol=1e-15)
    assert ChemotaxisSolver(params, grid).residual(start) < 1e-14
    print("✓ Ponto fixo homogêneo preservado")


def test_negative_density_raises():
    """Passo grande demais gera densidade negativa e SolverFault"""
    params = ModelParams(L=4.0)
    grid = Grid(4.0, 16)
    u = np.zeros(grid.N)
    u[0] = 1.0
    state = FieldState(0.0, u, np.zeros(grid.N), np.zeros(grid.N))
    with pytest.raises(SolverFault):
        step(state, 100.0, params, grid)
    print("✓ Densidade negativa detectada")


def test_non_convergence_is_reported():
    """Tempo final curto: resultado marcado como não convergido"""
    params = ModelParams(L=10.0)
    grid = Grid.from_spacing(params.L)
    initial = InitialCondition(kind="noise", amplitude=1e-3).build(params, grid)
    outcome = run_to_stationary(initial, params, grid, t_max=1.0)
    assert not outcome.converged
    assert outcome.classification == NOT_CONVERGED
    assert outcome.spike_count is None
    assert outcome.final.t >= 1.0
    print("✓ Não convergência relatada sem exceção")


def test_small_domain_relaxes_to_coexistence():
    """L = 5 fica abaixo da janela de padrões: volta ao estado homogêneo"""
    params = ModelParams(L=5.0)
    grid = Grid.from_spacing(params.L)
    initial = InitialCondition(kind="cosine", amplitude=1e-2, mode_index=1).build(params, grid)
    outcome = run_to_stationary(initial, params, grid, t_max=5000.0)
    assert outcome.converged
    assert outcome.classification == HOMOGENEOUS
    spectrum = ModeSpectrum.from_state(outcome.final, grid, 4)
    assert abs(spectrum.alpha[0] - 0.6) <= 0.02
    print(f"✓ Homogêneo com alpha_0 = {spectrum.alpha[0]:.4f}")


def test_implicit_integrator_on_steady_state():
    """Integrador BDF reconhece um estado já estacionário"""
    params = ModelParams(L=5.0)
    grid = Grid.from_spacing(params.L)
    initial = InitialCondition(kind="none").build(params, grid)
    outcome = run_to_stationary(initial, params, grid, t_max=1000.0, integrator="bdf")
    assert outcome.converged
    assert outcome.classification == HOMOGENEOUS
    np.testing.assert_allclose(outcome.final.u, coexistence_state(params).u_star, atol=1e-9)
    sparsity = ChemotaxisSolver(params, grid).jacobian_sparsity()
    assert sparsity.shape == (3 * grid.N, 3 * grid.N)
    print("✓ Integrador implícito")


def test_snapshots_at_output_times():
    params = ModelParams(L=10.0)
    grid = Grid.from_spacing(params.L)
    initial = InitialCondition(kind="noise", amplitude=1e-3).build(params, grid)
    outcome = ChemotaxisSolver(params, grid).run_to_stationary(initial, t_max=2.0, output_times=[0.0, 1.0])
    assert len(outcome.snapshots) == 2
    assert outcome.snapshots[0].t == 0.0
    assert 1.0 <= outcome.snapshots[1].t < 1.01
    print("✓ Instantâneos registrados")


def test_infinitesimal_perturbations():
    """Ruído determinístico pela semente e limite de amplitude"""
    params = ModelParams(L=10.0)
    grid = Grid.from_spacing(params.L)
    start = base_state(params, grid, SteadyStateKind.COEXISTENCE)
    first = perturb_infinitesimal(start, grid, 1e-3, "noise", seed=42)
    second = perturb_infinitesimal(start, grid, 1e-3, "noise", seed=42)
    np.testing.assert_array_equal(first.u, second.u)
    assert np.max(np.abs(first.u - start.u)) <= 1e-3
    assert first.meta["seed"] == 42
    cosine = perturb_infinitesimal(start, grid, 1e-2, "cosine", index=2)
    np.testing.assert_allclose(cosine.v - start.v, 1e-2 * np.cos(2 * np.pi * grid.x / grid.L))
    with pytest.raises(ValueError):
        perturb_infinitesimal(start, grid, 0.5)
    print("✓ Perturbações infinitesimais")


def test_finite_perturbations():
    """Top-hat de largura 0.2 L centrado ou deslocado"""
    grid = Grid(50.0, 200)
    window = centered_window(grid, 0.2)
    assert window.sum() == 40
    assert grid.x[window].min() > 20.0 and grid.x[window].max() < 30.0
    left = centered_window(grid, 0.2, center_fraction=0.1)
    assert grid.x[left].min() < 0.2 and grid.x[left].max() < 10.0

    state = perturb_finite_v(grid, 0.9)
    np.testing.assert_allclose(state.u, 1.0)
    assert state.v.max() == pytest.approx(0.9)
    assert state.v[~window].max() == 0.0
    with pytest.raises(ValueError):
        perturb_finite_v(grid, 1.5)

    bumped = perturb_finite(FieldState.uniform(grid, 1.0, 0.0, 0.0), grid, "u", 0.5)
    assert bumped.u.max() == pytest.approx(1.5)
    print("✓ Perturbações finitas")


def test_spike_counting():
    """Picos interiores valem dois meio-picos, picos na fronteira valem um"""
    grid = Grid(50.0, 64)
    half = count_spikes(_profile(grid, 1.0 + 0.3 * np.cos(np.pi * grid.x / grid.L)))
    assert (half.half_spikes, half.boundary, half.interior) == (1, 1, 0)

    two = count_spikes(_profile(grid, 1.0 + 0.3 * np.cos(4 * np.pi * grid.x / grid.L)))
    assert two.half_spikes == 4
    assert two.full_spikes == 2.0

    interior = count_spikes(_profile(grid, 1.0 - 0.3 * np.cos(2 * np.pi * grid.x / grid.L)))
    assert (interior.interior, interior.boundary, interior.half_spikes) == (1, 0, 2)

    flat = count_spikes(_profile(grid, np.full(grid.N, 0.6)))
    assert flat.half_spikes == 0
    print("✓ Contagem de picos")


def test_classification():
    grid = Grid(10.0, 40)
    flat = _profile(grid, np.full(grid.N, 0.6))
    bumpy = _profile(grid, 0.6 + 0.1 * np.cos(np.pi * grid.x / grid.L))
    assert classify(flat, True) == HOMOGENEOUS
    assert classify(bumpy, True) == STATIONARY_PATTERN
    assert classify(bumpy, False) == NOT_CONVERGED
    print("✓ Classificação de resultados")


def test_half_wavelength_window():
    """Intervalo mais largo de um mínimo de u ao máximo vizinho"""
    grid = Grid(50.0, 200)
    state = _profile(grid, 1.0 - 0.3 * np.cos(4 * np.pi * grid.x / grid.L))
    x_min, x_max = half_wavelength_window(state, grid)
    assert abs(abs(x_max - x_min) - 12.5) <= 0.5
    assert np.interp(x_min, grid.x, state.u) < np.interp(x_max, grid.x, state.u)

    single = _profile(grid, 1.0 + 0.3 * np.cos(np.pi * grid.x / grid.L))
    assert half_wavelength_window(single, grid) == (grid.L, 0.0)
    assert half_wavelength_window(_profile(grid, np.full(grid.N, 0.6)), grid) is None
    print("✓ Janela de meio comprimento de onda")


def test_stretch_window():
    """Meia onda de L = 50 levada para L = 10, nos dois sentidos"""
    source = Grid(50.0, 200)
    state = _profile(source, 1.0 - 0.3 * np.cos(4 * np.pi * source.x / source.L))
    target = Grid(10.0, 40)
    stretched = stretch_window(state, source, 0.0, 12.5, target)
    np.testing.assert_allclose(stretched.u, 1.0 - 0.3 * np.cos(np.pi * target.x / target.L), atol=1e-3)
    assert stretched.meta["window"] == (0.0, 12.5)

    reversed_window = stretch_window(state, source, 12.5, 0.0, target)
    np.testing.assert_allclose(reversed_window.u, stretched.u[::-1], atol=1e-3)
    with pytest.raises(ValueError):
        stretch_window(state, source, 3.0, 3.0, target)
    print("✓ Janela esticada para outro domínio")


@slow
def test_linear_growth_matches_dispersion():
    """Crescimento modal inicial confere com a relação de dispersão"""
    from src.spectral.wavelength_scan import modal_growth_rate
    from src.stability.linear_stability import growth_rate

    params = ModelParams(L=250.0)
    grid = Grid.from_spacing(params.L)
    measured = modal_growth_rate(params, grid, 16)
    predicted = growth_rate(coexistence_state(params), 16 * np.pi / params.L, params)
    assert predicted > 0
    assert abs(measured - predicted) <= 0.05 * abs(predicted)
    print(f"✓ Crescimento medido {measured:.5f} x previsto {predicted:.5f}")


@slow
def test_large_domain_pattern():
    """L = 250, b = 0.7: oito picos completos e coeficientes do modo 16"""
    params = ModelParams(L=250.0)
    grid = Grid.from_spacing(params.L)
    initial = InitialCondition(kind="noise", amplitude=1e-3).build(params, grid)
    outcome = run_to_stationary(initial, params, grid, t_max=20000.0)
    assert outcome.classification == STATIONARY_PATTERN
    assert 7 <= outcome.spike_count.full_spikes <= 9
    spectrum = ModeSpectrum.from_state(outcome.final, grid, 64)
    fundamental = dominant_modes(spectrum).fundamental
    assert abs(spectrum.alpha[0] - 0.4777) <= 0.02
    assert abs(abs(spectrum.alpha[fundamental]) - 0.2445) <= 0.02
    assert abs(abs(spectrum.gamma[fundamental]) - 0.1024) <= 0.02
    print(f"✓ Padrão com {outcome.spike_count.full_spikes} picos completos")


@slow
def test_finite_amplitude_pattern():
    """(1, 0, 0) + v = 0.9 forma dois picos; perturbar só u ou c decai"""
    params = ModelParams(b1=0.7, b2=1.7, L=50.0)
    grid = Grid.from_spacing(params.L)
    disturbance = InitialCondition(base_state="extinction-of-v", kind="finite-v", amplitude=0.9)
    initial = disturbance.build(params, grid)
    outcome = run_to_stationary(initial, params, grid, t_max=20000.0)
    assert outcome.classification == STATIONARY_PATTERN
    assert outcome.spike_count.full_spikes == 2

    for kind in ("finite-u", "finite-c"):
        start = InitialCondition(base_state="extinction-of-v", kind=kind, amplitude=1.0).build(params, grid)
        control = run_to_stationary(start, params, grid, t_max=20000.0)
        assert control.classification == HOMOGENEOUS
    print("✓ Padrão de amplitude finita")


@slow
def test_threshold_amplitude():
    """Existe um limiar de v entre decaimento e padrão"""
    params = ModelParams(b1=0.7, b2=1.7, L=50.0)
    grid = Grid.from_spacing(params.L)
    options = {"t_max": 5000.0}
    patterned, _ = forms_pattern(params, grid, 0.01, sim_options=options)
    assert not patterned
    result = threshold_amplitude(params, grid, tol_amp=0.02, sim_options=options)
    assert result.found
    assert 0.01 < result.threshold <= 0.9
    print(f"✓ Limiar de amplitude {result.threshold:.3f}")


def main():
    """Função principal de teste"""
    print("Simulação das EDPs - Testes")
    print("=" * 50)

    tests = [
        test_grid,
        test_mass_conservation_without_kinetics,
        test_boundary_faces_carry_no_flux,
        test_homogeneous_state_is_fixed_point,
        test_negative_density_raises,
        test_non_convergence_is_reported,
        test_small_domain_relaxes_to_coexistence,
        test_implicit_integrator_on_steady_state,
        test_snapshots_at_output_times,
        test_infinitesimal_perturbations,
        test_finite_perturbations,
        test_spike_counting,
        test_classification,
        test_half_wavelength_window,
        test_stretch_window,
    ]
    if Config.RUN_SLOW_TESTS:
        tests += [
            test_linear_growth_matches_dispersion,
            test_large_domain_pattern,
            test_finite_amplitude_pattern,
            test_threshold_amplitude,
        ]

    passed = 0
    for test in tests:
        try:
            test()
            passed += 1
        except Exception as e:
            print(f"✗ Erro em {test.__name__}: {e}")

    print("\n" + "=" * 50)
    print(f"Resultado: {passed}/{len(tests)} testes passaram")
    return passed == len(tests)


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
