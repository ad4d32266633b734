"""
Testes da análise de estabilidade linear
"""
import os
import sys

import numpy as np
import pytest

# Adicionar o diretório raiz ao path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.model.model_core import ModelParams, SteadyStateKind, coexistence_state, steady_states  # noqa: E402
from src.stability.linear_stability import (  # noqa: E402
    STATUS_NOT_APPLICABLE,
    STATUS_STABLE,
    STATUS_UNSTABLE,
    CubicCoefficients,
    a3_loci,
    characteristic_matrix,
    critical_b,
    cubic_coefficients,
    cubic_roots,
    dispersion_curve,
    eigenvalues,
    growth_rate,
    instability_domain,
    predicted_spike_count,
    routh_hurwitz,
    threshold_curves,
    union_instability_domain,
)

BOUNDARY_KINDS = (SteadyStateKind.TRIVIAL, SteadyStateKind.EXTINCTION_OF_V, SteadyStateKind.EXTINCTION_OF_U)


def _random_params(rng) -> ModelParams:
    return ModelParams(
        D1=rng.uniform(0.1, 5.0),
        D2=rng.uniform(0.1, 5.0),
        chi=rng.uniform(-50.0, 5.0),
        r1=rng.uniform(0.01, 1.0),
        r2=rng.uniform(0.01, 1.0),
        b1=rng.uniform(0.05, 2.5),
        b2=rng.uniform(0.05, 2.5),
    )


def test_extinction_eigenvalues_closed_form():
    """Taxa de crescimento em (1, 0, 0) igual à fórmula fechada"""
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        params = _random_params(rng)
        k = rng.uniform(0.0, 3.0)
        state = steady_states(params).by_kind(SteadyStateKind.EXTINCTION_OF_V)
        expected = max(
            -1 - k**2, -params.D1 * k**2 - params.r1, -params.D2 * k**2 - params.r2 * (params.b2 - 1)
        )
        assert abs(growth_rate(state, k, params) - expected) <= 1e-12
    print("✓ Autovalores de extinção exatos")


def test_boundary_states_match_matrix_eigenvalues():
    """Os autovalores fechados coincidem com os da matriz característica"""
    rng = np.random.default_rng(11)
    for _ in range(200):
        params = _random_params(rng)
        k = rng.uniform(0.0, 2.0)
        for kind in BOUNDARY_KINDS:
            state = steady_states(params).by_kind(kind)
            closed = np.sort(eigenvalues(state, k, params).real)
            direct = np.sort(np.linalg.eigvals(characteristic_matrix(state, k, params)).real)
            np.testing.assert_allclose(closed, direct, atol=1e-10)
    print("✓ Estados de fronteira consistentes")


def test_routh_hurwitz_matches_roots():
    """Critério de Routh-Hurwitz equivalente ao cálculo direto das raízes"""
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 10_000:
        a1, a2, a3 = rng.uniform(-5.0, 5.0, 3)
        if abs(a3 - a1 * a2) <= 1e-6:
            continue
        coefficients = CubicCoefficients(a1, a2, a3)
        direct = bool(np.all(np.roots([1.0, a1, a2, a3]).real < 0))
        assert routh_hurwitz(coefficients).stable == direct
        checked += 1
    print("✓ Routh-Hurwitz confere com as raízes")


def test_cubic_roots_residual():
    """Raízes polidas satisfazem o polinômio"""
    rng = np.random.default_rng(5)
    for _ in range(500):
        a1, a2, a3 = rng.uniform(-3.0, 3.0, 3)
        for z in cubic_roots(CubicCoefficients(a1, a2, a3)):
            assert abs(((z + a1) * z + a2) * z + a3) < 1e-9
    print("✓ Resíduo das raízes cúbicas pequeno")


def test_coexistence_verdict_matches_growth_rate():
    """Veredito RH e maior parte real concordam no estado de coexistência"""
    rng = np.random.default_rng(3)
    compared = 0
    for _ in range(500):
        params = _random_params(rng).with_updates(b1=rng.uniform(0.05, 0.95), b2=rng.uniform(0.05, 0.95))
        state = coexistence_state(params)
        k = rng.uniform(0.0, 1.5)
        rate = growth_rate(state, k, params)
        if abs(rate) < 1e-9:
            continue
        assert routh_hurwitz(cubic_coefficients(state, k, params)).stable == (rate < 0)
        compared += 1
    assert compared > 400
    print(f"✓ {compared} comparações RH x autovalores")


def test_instability_domain_membership():
    """Em k = 0.2: (0.7, 0.7) instável por a3 < 0, (0.3, 0.3) estável"""
    params = ModelParams()
    unstable = cubic_coefficients(coexistence_state(params.with_updates(b1=0.7, b2=0.7)), 0.2, params)
    assert unstable.a3 < 0
    assert "a3 > 0" in routh_hurwitz(unstable).violated_conditions

    domain = instability_domain(params, 0.2, [0.3, 0.7, 1.2], [0.3, 0.7, 1.2])
    assert domain.status_at(0.7, 0.7) == STATUS_UNSTABLE
    assert domain.status_at(0.3, 0.3) == STATUS_STABLE
    # b1 = 1.2, b2 = 0.3 has no physical coexistence state
    assert domain.status_at(1.2, 0.3) == STATUS_NOT_APPLICABLE
    frame = domain.to_frame()
    assert list(frame.columns) == ["b1", "b2", "a3", "status"]
    assert len(frame) == 9
    print("✓ Domínio de instabilidade correto")


def test_union_domain_contains_single_k():
    """A união sobre k contém o domínio de cada k"""
    params = ModelParams()
    b_values = np.linspace(0.1, 0.9, 9)
    single = instability_domain(params, 0.2, b_values, b_values)
    union = union_instability_domain(params, [0.1, 0.2, 0.3], b_values, b_values)
    assert np.all(union.mask[single.mask])
    assert union.mask.sum() >= single.mask.sum()
    print("✓ União de domínios consistente")


def test_dispersion_curve_defaults():
    """Curva de dispersão no estado de coexistência padrão"""
    params = ModelParams(L=250.0)
    report = dispersion_curve(coexistence_state(params), params)
    assert len(report.k_grid) == 2000
    assert report.growth_rates[0] < 0
    assert report.lambda_star > 0
    assert 0.1 < report.k_star < 0.35
    prediction = predicted_spike_count(report.k_star, params.L)
    assert 7 <= prediction.full_spikes <= 9
    frame = report.to_frame()
    assert list(frame.columns) == ["k", "growth_rate", "rh_stable"]
    assert frame.loc[frame["growth_rate"] > 0, "rh_stable"].eq(0).all()
    print(f"✓ k* = {report.k_star:.4f}, lambda* = {report.lambda_star:.4e}")


def test_dispersion_curve_invalid_grid():
    params = ModelParams()
    with pytest.raises(ValueError):
        dispersion_curve(coexistence_state(params), params, k_min=1.0, k_max=0.5)
    with pytest.raises(ValueError):
        dispersion_curve(coexistence_state(params), params, n_points=1)
    print("✓ Grade de k inválida rejeitada")


def test_predicted_spike_count():
    prediction = predicted_spike_count(0.2, 250.0)
    assert prediction.half_spikes == 16
    assert prediction.full_spikes == 8
    assert not prediction.remainder
    odd = predicted_spike_count(np.pi / 15.0, 15.0)
    assert (odd.half_spikes, odd.full_spikes, odd.remainder) == (1, 0, True)
    with pytest.raises(ValueError):
        predicted_spike_count(0.0, 10.0)
    print("✓ Contagem de picos prevista")


def test_critical_b_defaults():
    """b crítico ~0.6 em k ~0.2 para os parâmetros padrão"""
    result = critical_b(ModelParams())
    assert result.found
    assert abs(result.b_min - 0.6) <= 0.05
    assert abs(result.k_at_min - 0.2) <= 0.02
    print(f"✓ b_min = {result.b_min:.4f} em k = {result.k_at_min:.4f}")


def test_critical_b_absent():
    """Sem instabilidade para chi = -5 ou D1 = 3"""
    assert not critical_b(ModelParams(chi=-5.0)).found
    assert not critical_b(ModelParams(D1=3.0)).found
    with pytest.raises(ValueError):
        critical_b(ModelParams(), b_range=(0.5, 1.5))
    print("✓ Ausência de instabilidade detectada")


def test_parameter_cutoffs():
    """Cortes em D1, chi, r1 e r2 dentro das tolerâncias"""
    params = ModelParams()
    assert critical_b(params.with_updates(D1=2.4)).found
    assert not critical_b(params.with_updates(D1=2.8)).found
    assert critical_b(params.with_updates(chi=-6.5)).found
    assert not critical_b(params.with_updates(chi=-5.5)).found
    assert critical_b(params.with_updates(r2=0.05)).found
    assert not critical_b(params.with_updates(r2=0.03)).found
    assert critical_b(params.with_updates(r1=0.26)).found
    assert not critical_b(params.with_updates(r1=0.32)).found

    # the r1 cutoff lives at the top of the plotted b range; b closer to 1 stays unstable
    assert critical_b(params.with_updates(r1=0.32), b_range=(0.01, 0.9999)).found
    print("✓ Cortes de parâmetros")


def test_threshold_curve_trends():
    """b_min cresce com D1 e r1 e decresce com |chi| e r2"""
    base = ModelParams()

    def b_min(name, values):
        frame = threshold_curves(name, values, base, workers=1)
        assert list(frame["param_value"]) == list(values)
        assert frame["found"].eq(1).all()
        return frame["b_min"].to_numpy()

    assert np.all(np.diff(b_min("D1", [0.5, 1.0, 1.5, 2.0])) > 0)
    assert np.all(np.diff(b_min("r1", [0.05, 0.1, 0.15, 0.2])) > 0)
    assert np.all(np.diff(b_min("chi", [-8.0, -10.0, -15.0, -20.0])) < 0)
    assert np.all(np.diff(b_min("r2", [0.05, 0.1, 0.2])) < 0)
    with pytest.raises(ValueError):
        threshold_curves("b1", [0.5], base)
    print("✓ Tendências das curvas de limiar")


def test_a3_loci_table():
    frame = a3_loci(ModelParams(), [0.5, 0.7], [0.1, 0.2, 0.3])
    assert list(frame.columns) == ["b", "k", "a3", "da3_dk"]
    assert len(frame) == 6
    at_07 = frame[(frame["b"] == 0.7) & (frame["k"] == 0.2)]["a3"].iloc[0]
    assert at_07 < 0
    print("✓ Tabela de a3 sobre (b, k)")


def main():
    """Função principal de teste"""
    print("Estabilidade linear - Testes")
    print("=" * 50)

    tests = [
        test_extinction_eigenvalues_closed_form,
        test_boundary_states_match_matrix_eigenvalues,
        test_routh_hurwitz_matches_roots,
        test_cubic_roots_residual,
        test_coexistence_verdict_matches_growth_rate,
        test_instability_domain_membership,
        test_union_domain_contains_single_k,
        test_dispersion_curve_defaults,
        test_dispersion_curve_invalid_grid,
        test_predicted_spike_count,
        test_critical_b_defaults,
        test_critical_b_absent,
        test_parameter_cutoffs,
        test_threshold_curve_trends,
        test_a3_loci_table,
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
