"""
Testes da configuração de experimentos, presets e execução pela linha de comando
"""
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

# Adicionar o diretório raiz ao path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.database.results_store import RunRegistry  # noqa: E402
from src.exceptions import ConfigurationError  # noqa: E402
from src.experiments.experiment_config import (  # noqa: E402
    SweepSpec,
    build_config,
    load_experiment_config,
    parse_overrides,
)
from src.experiments.experiment_runner import run_experiment  # noqa: E402
from src.experiments.presets import PRESET_NAMES, figure_preset  # noqa: E402
from src.utils.output_writer import read_manifest  # noqa: E402


def test_parse_overrides():
    """--set aceita seção.chave=valor e parâmetros do modelo sem seção"""
    raw = parse_overrides(["b2=1.7", "grid.t_max = 10", "analysis.M_values=1, 2"])
    assert raw == {"params": {"b2": "1.7"}, "grid": {"t_max": "10"}, "analysis": {"M_values": "1, 2"}}
    for bad in (["t_max=10"], ["b2"], ["nowhere.key=1"]):
        with pytest.raises(ConfigurationError):
            parse_overrides(bad)
    print("✓ Sobrescritas interpretadas")


def test_unknown_keys_rejected():
    """Chaves desconhecidas em qualquer seção geram ConfigurationError"""
    with pytest.raises(ConfigurationError):
        build_config({"params": {"bb2": 1.0}})
    with pytest.raises(ConfigurationError):
        build_config({"grid": {"dt": 0.1}})
    with pytest.raises(ConfigurationError):
        build_config({"run": {"command": "plot"}})
    with pytest.raises(ConfigurationError):
        build_config({"sweep": {"parameter": "gamma"}})
    with pytest.raises(ConfigurationError):
        load_experiment_config(overrides=["params.D1=1"])
    print("✓ Chaves desconhecidas rejeitadas")


def test_config_file_and_precedence(tmp_path):
    """Arquivo INI sobrescreve o preset e --set sobrescreve o arquivo"""
    path = tmp_path / "experiment.cfg"
    path.write_text("[params]\nb2 = 1.5\nchi = -20\n\n[grid]\nt_max = 100\n")
    config = load_experiment_config("simulate", path, preset="fig4", overrides=["b2=1.9"])
    assert config.params.chi == -20.0
    assert config.params.b2 == 1.9
    assert config.params.L == 50.0
    assert config.grid.t_max == 100.0
    assert config.run.preset == "fig4"

    bad = tmp_path / "bad.cfg"
    bad.write_text("[plot]\ncolor = red\n")
    with pytest.raises(ConfigurationError):
        load_experiment_config("simulate", bad)
    with pytest.raises(ConfigurationError):
        load_experiment_config("simulate", tmp_path / "missing.cfg")
    print("✓ Precedência preset < arquivo < --set")


def test_presets():
    """Presets carregam os parâmetros das figuras e tabelas"""
    fig1b = figure_preset("fig1b")
    assert (fig1b.command, fig1b.params.L, fig1b.params.b1, fig1b.params.b2) == ("simulate", 250.0, 0.7, 0.7)
    assert fig1b.perturbation.kind == "noise"
    assert fig1b.run.preset == "fig1b"

    fig4 = figure_preset("fig4")
    assert fig4.params.b2 == 1.7
    assert (fig4.perturbation.base_state, fig4.perturbation.kind) == ("extinction-of-v", "finite-v")
    assert fig4.perturbation.amplitude == 0.9
    assert fig4.grid.output_times == [0.0, 50.0, 500.0, 5000.0]

    table1 = figure_preset("table1")
    assert table1.params.L == 15.0
    assert table1.analysis.M_values == [1, 2, 3]
    assert table1.run.require_convergence

    table2 = figure_preset("table2")
    assert table2.analysis.orientation == "alpha1-negative"
    assert table2.perturbation.center_fraction == 0.5
    assert table2.analysis.window_source_L == 50.0
    assert table2.analysis.require_pattern and table1.analysis.require_pattern
    assert figure_preset("fig9").analysis.window_source_L == 50.0

    assert figure_preset("fig3b").sweep.samples()[:3] == [-20.0, -19.5, -19.0]
    for name in PRESET_NAMES:
        assert figure_preset(name).run.target
    with pytest.raises(ConfigurationError):
        figure_preset("fig99")
    with pytest.raises(ConfigurationError):
        load_experiment_config("dispersion", preset="fig4")
    print(f"✓ {len(PRESET_NAMES)} presets válidos")


def test_sweep_samples():
    samples = SweepSpec(parameter="D1", start=0.5, stop=1.0, step=0.1).samples()
    assert samples == [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    assert SweepSpec(parameter="chi", values="-10, -50").samples() == [-10.0, -50.0]
    with pytest.raises(ConfigurationError):
        SweepSpec(parameter="D1", start=0.5).samples()
    print("✓ Amostras de varredura")


def test_flatten_and_config_text():
    config = build_config({"run": {"command": "dispersion"}, "params": {"chi": -50}})
    flat = config.flatten()
    assert flat["params.chi"] == -50.0
    assert flat["run.preset"] == "none"
    assert flat["analysis.M_values"] == ""
    text = config.to_config_text()
    assert "[params]" in text and "chi = -50.0" in text
    print("✓ Configuração achatada")


def test_well_mixed_run(tmp_path):
    """Execução completa: tabela, manifesto e registro da execução"""
    config = load_experiment_config("well-mixed", output_dir=str(tmp_path))
    result = run_experiment(config)
    assert result.exit_code == 0
    table = pd.read_csv(tmp_path / "well_mixed.csv")
    assert list(table["kind"]) == ["trivial", "extinction-of-v", "extinction-of-u", "coexistence"]
    assert list(table["stable"]) == [0, 0, 0, 1]
    assert (tmp_path / "well_mixed.schema.txt").exists()

    manifest = read_manifest(tmp_path / "manifest.txt")
    assert manifest["status"] == "success"
    assert manifest["exit_code"] == "0"
    assert manifest["outcome.stable[coexistence]"] == "1"
    assert manifest["params.b1"] == "0.7"
    assert "perturbation.description" in manifest

    runs = RunRegistry(tmp_path).list_runs()
    assert len(runs) == 1
    assert runs.loc[0, "command"] == "well-mixed"
    print("✓ Execução well-mixed")


def test_critical_b_run(tmp_path):
    overrides = ["analysis.n_points=20"]
    config = load_experiment_config("critical-b", output_dir=str(tmp_path), overrides=overrides)
    result = run_experiment(config)
    assert result.exit_code == 0
    assert result.outcomes["found"] == 1
    assert abs(result.outcomes["b_min"] - 0.6) <= 0.05
    loci = pd.read_csv(tmp_path / "a3_loci.csv")
    assert len(loci) == 19 * 20
    print("✓ Execução critical-b")


def test_outputs_are_reproducible(tmp_path):
    """Duas execuções iguais produzem CSVs idênticos byte a byte"""
    for name in ("first", "second"):
        config = load_experiment_config("dispersion", output_dir=str(tmp_path / name), overrides=["L=250"])
        assert run_experiment(config).exit_code == 0
    first = (tmp_path / "first" / "dispersion.csv").read_bytes()
    assert first == (tmp_path / "second" / "dispersion.csv").read_bytes()
    manifest = read_manifest(tmp_path / "first" / "manifest.txt")
    assert 14 <= int(manifest["outcome.predicted_half_spikes"]) <= 18
    print("✓ Saídas reprodutíveis")


def test_decompose_profile_file(tmp_path):
    """Decomposição de um perfil lido de CSV"""
    x = (np.arange(80) + 0.5) * (10.0 / 80)
    profile = pd.DataFrame(
        {"x": x, "u": 0.5 + 0.3 * np.cos(2 * np.pi * x / 10.0), "v": np.full(80, 0.4), "c": np.full(80, 0.4)}
    )
    source = tmp_path / "profile.csv"
    profile.to_csv(source, index=False)
    out = tmp_path / "out"
    config = load_experiment_config(
        "decompose", output_dir=str(out), overrides=["L=10", f"analysis.profile_csv={source}", "analysis.M=8"]
    )
    result = run_experiment(config)
    assert result.exit_code == 0
    assert result.outcomes["fundamental_mode"] == 2
    spectrum = pd.read_csv(out / "spectrum.csv")
    assert abs(spectrum.loc[2, "alpha"] - 0.3) < 1e-9
    assert (out / "reconstructed_profile.csv").exists()
    print("✓ Decomposição de perfil em arquivo")


def test_homogeneous_reference_fails_when_pattern_required(tmp_path):
    """Perfil de referência homogêneo com padrão exigido: código 4"""
    x = (np.arange(40) + 0.5) * 0.25
    profile = pd.DataFrame({"x": x, "u": np.full(40, 0.6), "v": np.full(40, 0.4), "c": np.full(40, 0.4)})
    source = tmp_path / "flat.csv"
    profile.to_csv(source, index=False)
    overrides = [
        "L=10", f"analysis.profile_csv={source}", "analysis.M_values=1", "analysis.require_pattern=true"
    ]
    config = load_experiment_config("galerkin", output_dir=str(tmp_path / "out"), overrides=overrides)
    result = run_experiment(config)
    assert result.exit_code == 4
    record = json.loads((tmp_path / "out" / "error.json").read_text())
    assert record["error_type"] == "ConvergenceFailure"
    print("✓ Referência homogênea rejeitada")


def test_trivial_galerkin_root_fails_when_pattern_required(tmp_path):
    """Raiz de Galerkin homogênea (L=4) não passa como padrão"""
    base = ["L=4", "analysis.seed_source=default", "analysis.M_values=1"]
    config = load_experiment_config("galerkin", output_dir=str(tmp_path / "plain"), overrides=base)
    result = run_experiment(config)
    assert result.exit_code == 0
    assert result.outcomes["patterned_M1"] == 0

    strict = base + ["analysis.require_pattern=true"]
    config = load_experiment_config("galerkin", output_dir=str(tmp_path / "strict"), overrides=strict)
    assert run_experiment(config).exit_code == 4
    print("✓ Raiz trivial rejeitada quando o padrão é exigido")


def test_handler_error_is_recorded(tmp_path):
    """Erro de configuração dentro do comando: error.json, código 2, manifesto"""
    config = load_experiment_config("threshold-curves", output_dir=str(tmp_path))
    result = run_experiment(config)
    assert result.exit_code == 2
    record = json.loads((tmp_path / "error.json").read_text())
    assert record["error_type"] == "ConfigurationError"
    assert record["exit_code"] == 2
    assert read_manifest(tmp_path / "manifest.txt")["status"] == "failed"
    print("✓ Erro registrado em error.json")


def test_cli_invalid_config(tmp_path):
    """Parâmetro inválido na linha de comando: código de saída 2"""
    from main import main as cli

    code = cli(["dispersion", "--out", str(tmp_path), "--set", "params.D1=-1"])
    assert code == 2
    record = json.loads((tmp_path / "error.json").read_text())
    assert record["exit_code"] == 2
    assert not (tmp_path / "dispersion.csv").exists()
    print("✓ Configuração inválida encerra com código 2")


def test_cli_lists_artifacts(tmp_path, capsys):
    from main import main as cli

    assert cli(["well-mixed", "--out", str(tmp_path)]) == 0
    printed = capsys.readouterr().out
    assert "well_mixed.csv" in printed
    assert "manifest.txt" in printed
    print("✓ Artefatos listados na saída padrão")


def main():
    """Função principal de teste"""
    print("Experimentos - Testes")
    print("=" * 50)

    tests = [
        test_parse_overrides,
        test_unknown_keys_rejected,
        test_presets,
        test_sweep_samples,
        test_flatten_and_config_text,
    ]
    tests_with_directory = [
        test_config_file_and_precedence,
        test_well_mixed_run,
        test_critical_b_run,
        test_outputs_are_reproducible,
        test_decompose_profile_file,
        test_homogeneous_reference_fails_when_pattern_required,
        test_trivial_galerkin_root_fails_when_pattern_required,
        test_handler_error_is_recorded,
        test_cli_invalid_config,
    ]

    passed = 0
    total = len(tests) + len(tests_with_directory)
    for test in tests + tests_with_directory:
        try:
            if test in tests_with_directory:
                test(Path(tempfile.mkdtemp(prefix="chemolv_")))
            else:
                test()
            passed += 1
        except Exception as e:
            print(f"✗ Erro em {test.__name__}: {e}")

    print("\n" + "=" * 50)
    print(f"Resultado: {passed}/{total} testes passaram")
    return passed == total


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
