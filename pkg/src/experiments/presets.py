"""
Named experiment presets, one per reproduced figure or table

Each preset is a set of raw config sections; a config file and --set
overrides are merged on top, so every preset value can be changed.
"""

from typing import Any, Dict, List

from src.exceptions import ConfigurationError
from src.experiments.experiment_config import ExperimentConfig, build_config

WEAK_STRONG = {"b1": 0.7, "b2": 1.7}

# Large finite v disturbance of (1, 0, 0)
FINITE_V = {"base_state": "extinction-of-v", "kind": "finite-v", "amplitude": 0.9}

# Same disturbance placed at the left end, so odd (half-spike) modes are excited
FINITE_V_LEFT = dict(FINITE_V, center_fraction=0.1)

COSINE_SEED = {"base_state": "coexistence", "kind": "cosine", "amplitude": 1e-2, "mode_index": 1}


def _threshold_curve(parameter: str, start: float, stop: float, step: float, target: str, tolerance: str):
    return {
        "run": {"command": "threshold-curves", "target": target, "tolerance": tolerance},
        "sweep": {"parameter": parameter, "start": start, "stop": stop, "step": step},
    }


def _threshold_amplitude(parameter: str, start: float, stop: float, step: float, target: str):
    return {
        "run": {
            "command": "threshold-amplitude",
            "target": target,
            "tolerance": "trend only; threshold values depend on the top-hat shape",
        },
        "params": dict(WEAK_STRONG, L=50.0),
        "grid": {"t_max": 5000.0},
        "perturbation": dict(FINITE_V),
        "sweep": {"parameter": parameter, "start": start, "stop": stop, "step": step},
    }


PRESETS: Dict[str, Dict[str, Dict[str, Any]]] = {
    "fig1b": {
        "run": {
            "command": "simulate",
            "target": (
                "Fig. 1(b) and coeffs16: 8 full spikes; "
                "alpha_0=0.4777, alpha_16=0.2445, gamma_16=-0.1024"
            ),
            "tolerance": "full spikes 8 +/- 1; alpha_0, alpha_16 and gamma_16 each +/- 0.02",
        },
        "params": {"L": 250.0, "b1": 0.7, "b2": 0.7},
        "grid": {"t_max": 20000.0},
        "perturbation": {"base_state": "coexistence", "kind": "noise", "amplitude": 1e-3},
        "analysis": {"M": 64},
    },
    "fig2a": {
        "run": {
            "command": "dispersion",
            "target": "Fig. 2(a): growth rate over k for chi = -10, -50, -90",
            "tolerance": "k* moves to larger k as |chi| grows",
        },
        "params": {"b1": 0.7, "b2": 0.7},
        "sweep": {"parameter": "chi", "values": "-10, -50, -90"},
        "analysis": {"state": "coexistence", "k_min": 0.0, "k_max": 1.0, "n_points": 2000},
    },
    "fig2b": {
        "run": {
            "command": "critical-b",
            "target": "Fig. 2(b): b_min=0.6 at k=0.2 (defaults)",
            "tolerance": "b_min +/- 0.05; k +/- 0.02",
        },
        "analysis": {
            "b_min": 0.05, "b_max": 0.95, "b_steps": 19, "k_min": 0.01, "k_max": 1.0, "n_points": 100
        },
    },
    "fig3a": _threshold_curve(
        "D1", 0.5, 3.0, 0.1,
        "Fig. 3(a): instability disappears at D1=2.6, b_min increases with D1",
        "cutoff +/- 0.2",
    ),
    "fig3b": _threshold_curve(
        "chi", -20.0, -4.0, 0.5,
        "Fig. 3(b): instability disappears at chi=-6, b_min decreases with |chi|",
        "cutoff +/- 0.5",
    ),
    "fig3c": _threshold_curve(
        "r1", 0.02, 0.4, 0.02,
        "Fig. 3(c): instability disappears at r1=0.3, b_min increases with r1",
        "cutoff +/- 0.03",
    ),
    "fig3d": _threshold_curve(
        "r2", 0.01, 0.3, 0.01,
        "Fig. 3(d): instability disappears at r2=0.04, b_min decreases with r2",
        "cutoff +/- 0.01",
    ),
    "fig4": {
        "run": {
            "command": "simulate",
            "target": "Fig. 4: (1, 0, 0) plus v=0.9 top-hat forms 2 full spikes",
            "tolerance": "full spikes exactly 2",
        },
        "params": dict(WEAK_STRONG, L=50.0),
        "grid": {"t_max": 20000.0, "output_times": "0, 50, 500, 5000"},
        "perturbation": dict(FINITE_V),
    },
    "fig5a": _threshold_amplitude(
        "D1", 0.5, 1.6, 0.1, "Fig. 5(a): threshold grows with D1, none above D1=1.3"
    ),
    "fig5b": _threshold_amplitude(
        "chi", -20.0, -6.0, 1.0, "Fig. 5(b): threshold falls with |chi|, none above chi=-9"
    ),
    "fig5c": _threshold_amplitude(
        "b1", 0.1, 1.0, 0.1, "Fig. 5(c): threshold falls with b1, none below b1=0.3"
    ),
    "fig5d": _threshold_amplitude("b2", 1.1, 2.5, 0.2, "Fig. 5(d): threshold grows with b2"),
    "fig5e": _threshold_amplitude(
        "r1", 0.05, 0.2, 0.025, "Fig. 5(e): threshold grows with r1, none above r1=0.15"
    ),
    "fig5f": _threshold_amplitude("r2", 0.05, 0.3, 0.025, "Fig. 5(f): no pattern below r2=0.1"),
    "fig6a": {
        "run": {
            "command": "wavelength-scan",
            "target": "Fig. 6(a): Lambda0=15, alpha_max=0.244, homogeneous with alpha_0=0.6 for L<10",
            "tolerance": "Lambda0 +/- 1; alpha_max +/- 0.02; alpha_0 +/- 0.02",
        },
        "params": {"b1": 0.7, "b2": 0.7},
        "grid": {"t_max": 20000.0},
        "perturbation": dict(COSINE_SEED),
        "analysis": {"L_min": 1.0, "L_max": 50.0, "L_step": 1.0, "mode_budget": 10},
    },
    "fig6b": {
        "run": {
            "command": "wavelength-scan",
            "target": "Fig. 6(b): weak-strong spectrum over L, half-spike window starting near L=10",
            "tolerance": "qualitative: mode windows in increasing order",
        },
        "params": dict(WEAK_STRONG),
        "grid": {"t_max": 20000.0},
        "perturbation": dict(FINITE_V_LEFT),
        "analysis": {"L_min": 1.0, "L_max": 50.0, "L_step": 1.0, "mode_budget": 10},
    },
    "fig7": {
        "run": {
            "command": "truncation-study",
            "target": (
                "Fig. 7: ER_u = 1.3830, 0.0061, 0.0035 and "
                "ER_v = 0.6566, 0.0003, 0.0009 for M = 1, 2, 3"
            ),
            "tolerance": "ER_u(M=1) +/- 0.1; ER_u(M=3) <= 0.01",
        },
        "params": {"L": 15.0, "b1": 0.7, "b2": 0.7},
        "grid": {"t_max": 20000.0},
        "perturbation": dict(COSINE_SEED),
        "analysis": {"M_max": 3, "orientation": "alpha1-positive", "require_pattern": True},
    },
    "fig8": {
        "run": {
            "command": "param-study",
            "target": "Fig. 8(c-d): half-wavelength and amplitude of the pattern against chi",
            "tolerance": "qualitative: amplitude grows with |chi|",
        },
        "params": {"b1": 0.7, "b2": 0.7},
        "sweep": {"parameter": "chi", "start": -20.0, "stop": -8.0, "step": 1.0},
        "analysis": {"M_max": 4, "L_min": 5.0, "L_max": 40.0, "L_step": 1.0},
    },
    "fig9": {
        "run": {
            "command": "truncation-study",
            "target": "Fig. 9: ER_u = 1.3928, 0.0717, 0.0155, 0.0113 for M = 1..4",
            "tolerance": "ER_u(M=1) +/- 0.1; ER_u(M=4) <= 0.03",
        },
        "params": dict(WEAK_STRONG, L=10.0),
        "grid": {"t_max": 20000.0},
        "perturbation": dict(FINITE_V),
        "analysis": {
            "M_max": 4, "orientation": "alpha1-negative", "window_source_L": 50.0, "require_pattern": True
        },
    },
    "table1": {
        "run": {
            "command": "galerkin",
            "target": "Table 1: M=3 (0.4702, 0.2532, 0.0849, 0.0241); M=1 (0.1878, 0.3330)",
            "tolerance": "each coefficient +/- 0.005",
            "require_convergence": True,
        },
        "params": {"L": 15.0, "b1": 0.7, "b2": 0.7},
        "grid": {"t_max": 20000.0},
        "perturbation": dict(COSINE_SEED),
        "analysis": {
            "M_values": "1, 2, 3", "seed_source": "simulation", "orientation": "alpha1-positive",
            "require_pattern": True,
        },
    },
    "table2": {
        "run": {
            "command": "galerkin",
            "target": "Table 2: M=4 (0.3208, -0.4419, 0.2241, -0.0916, 0.0342)",
            "tolerance": "each coefficient +/- 0.01",
            "require_convergence": True,
        },
        "params": dict(WEAK_STRONG, L=10.0),
        "grid": {"t_max": 20000.0},
        "perturbation": dict(FINITE_V),
        "analysis": {
            "M_values": "1, 2, 3, 4", "seed_source": "simulation", "orientation": "alpha1-negative",
            "window_source_L": 50.0, "require_pattern": True,
        },
    },
    "strong-weak": {
        "run": {
            "command": "negative-control",
            "target": "No stationary pattern for b1 > 1, b2 < 1 from any initial condition",
            "tolerance": "every run homogeneous",
        },
        "params": {"L": 50.0, "b1": 1.7, "b2": 0.7},
        "grid": {"t_max": 5000.0},
    },
}

PRESET_NAMES: List[str] = list(PRESETS)


def preset_raw(name: str) -> Dict[str, Dict[str, Any]]:
    """Copy of the raw sections of a preset"""
    if name not in PRESETS:
        raise ConfigurationError(f"Unknown preset '{name}'; known presets: {', '.join(PRESET_NAMES)}")
    return {section: dict(values) for section, values in PRESETS[name].items()}


def figure_preset(name: str) -> ExperimentConfig:
    """
    Fully specified config reproducing one figure or table

    Args:
        name: Preset name such as fig1b or table2

    Returns:
        Validated ExperimentConfig with run.preset set

    Raises:
        ConfigurationError: unknown preset
    """
    raw = preset_raw(name)
    raw["run"]["preset"] = name
    return build_config(raw)
