"""
Column dictionary for every table the laboratory writes
"""

import re
from typing import Any, Dict, List, Optional

import pandas as pd
from loguru import logger


class DataDictionary:
    """Describes output columns and renders CSV schema sidecars"""

    def __init__(self):
        self.data_dictionary = self._initialize_data_dictionary()
        self.indexed_columns = self._initialize_indexed_columns()

    def _initialize_data_dictionary(self) -> Dict[str, Dict[str, Any]]:
        """Initialize the main data dictionary"""
        return {
            "x": {"description": "Cell-center position in (0, L)", "data_type": "float"},
            "u": {"description": "Density of the chemotactic species u", "data_type": "float"},
            "v": {"description": "Density of the chemical-producing species v", "data_type": "float"},
            "c": {"description": "Concentration of the chemical c", "data_type": "float"},
            "k": {"description": "Wavenumber of the perturbation cos(kx)", "data_type": "float"},
            "wavelength": {"description": "Wavelength 2 pi / k (nan at k = 0)", "data_type": "float"},
            "amplitude": {"description": "Amplitude of the v top-hat disturbance", "data_type": "float"},
            "growth_rate": {
                "description": "Largest real part of the three eigenvalues at k",
                "data_type": "float",
            },
            "rh_stable": {
                "description": "1 if all Routh-Hurwitz conditions hold at k, else 0",
                "data_type": "int",
            },
            "chi": {"description": "Chemotactic sensitivity of the dispersion curve", "data_type": "float"},
            "b": {"description": "Symmetric competition strength b1 = b2 = b", "data_type": "float"},
            "b1": {"description": "Competition strength of v on u", "data_type": "float"},
            "b2": {"description": "Competition strength of u on v", "data_type": "float"},
            "a3": {"description": "Cubic coefficient a3 = -det M at the steady state", "data_type": "float"},
            "da3_dk": {"description": "Central-difference derivative of a3 in k", "data_type": "float"},
            "status": {
                "description": "stable, unstable or not-applicable (no physical coexistence)",
                "data_type": "string",
            },
            "param_value": {"description": "Value of the swept parameter", "data_type": "float"},
            "b_min": {
                "description": "Smallest symmetric competition giving Turing instability (nan: none)",
                "data_type": "float",
            },
            "k_at_min": {"description": "Wavenumber where a3 first reaches zero", "data_type": "float"},
            "found": {"description": "1 if the searched quantity exists in range", "data_type": "int"},
            "threshold": {
                "description": "Minimal top-hat v amplitude that forms a pattern (nan: none)",
                "data_type": "float",
            },
            "note": {"description": "Free-text remark for the row", "data_type": "string"},
            "index": {"description": "Cosine mode index i", "data_type": "int"},
            "alpha": {"description": "Cosine coefficient of u", "data_type": "float"},
            "gamma": {"description": "Cosine coefficient of v", "data_type": "float"},
            "beta": {"description": "Cosine coefficient of c", "data_type": "float"},
            "L": {"description": "Domain length", "data_type": "float"},
            "converged": {"description": "1 if the iteration met its tolerance", "data_type": "int"},
            "classification": {
                "description": "homogeneous, stationary-pattern or not-converged",
                "data_type": "string",
            },
            "dominant_mode": {
                "description": "Index i >= 1 of the largest |alpha_i| (0 when homogeneous)",
                "data_type": "int",
            },
            "source": {"description": "numerical or M=<Galerkin order>", "data_type": "string"},
            "M": {"description": "Galerkin truncation order", "data_type": "int"},
            "newton_iters": {"description": "Newton iterations used", "data_type": "int"},
            "residual_norm": {"description": "2-norm of the Galerkin residual", "data_type": "float"},
            "seed": {"description": "Provenance of the Newton seed", "data_type": "string"},
            "er_u": {"description": "Integrated squared error of the u profile", "data_type": "float"},
            "er_v": {"description": "Integrated squared error of the v profile", "data_type": "float"},
            "Lambda_u": {"description": "L maximizing |alpha_1| of Galerkin roots", "data_type": "float"},
            "Lambda_v": {"description": "L maximizing |gamma_1| of Galerkin roots", "data_type": "float"},
            "alpha_1": {"description": "alpha_1 at Lambda_u", "data_type": "float"},
            "gamma_1": {"description": "gamma_1 at Lambda_v", "data_type": "float"},
            "amplitude_u": {"description": "Pattern amplitude estimate 2|alpha_1|", "data_type": "float"},
            "amplitude_v": {"description": "Pattern amplitude estimate 2|gamma_1|", "data_type": "float"},
            "irregular": {"description": "1 when Lambda_u and Lambda_v differ", "data_type": "int"},
            "sim_Lambda0": {"description": "Simulated characteristic half-wavelength", "data_type": "float"},
            "sim_alpha_max": {"description": "Simulated alpha_1 at sim_Lambda0", "data_type": "float"},
            "patterned": {"description": "1 if the Galerkin root carries a pattern", "data_type": "int"},
            "kind": {"description": "Steady state tag", "data_type": "string"},
            "u_star": {"description": "Homogeneous density of u", "data_type": "float"},
            "v_star": {"description": "Homogeneous density of v", "data_type": "float"},
            "c_star": {"description": "Homogeneous concentration of c", "data_type": "float"},
            "physical": {"description": "1 if no coordinate is negative", "data_type": "int"},
            "stable": {"description": "1 if stable in the well-mixed system", "data_type": "int"},
            "eig_1": {"description": "Largest eigenvalue real part", "data_type": "float"},
            "eig_2": {"description": "Middle eigenvalue real part", "data_type": "float"},
            "eig_3": {"description": "Smallest eigenvalue real part", "data_type": "float"},
            "initial_condition": {"description": "Starting field recipe", "data_type": "string"},
            "half_spikes": {"description": "Spikes counted in half-spike units", "data_type": "int"},
            "full_spikes": {"description": "half_spikes / 2", "data_type": "float"},
        }

    def _initialize_indexed_columns(self) -> Dict[str, str]:
        """Descriptions of numbered families such as alpha_3"""
        return {
            "alpha": "Cosine coefficient alpha_{i} of u",
            "gamma": "Cosine coefficient gamma_{i} of v",
            "beta": "Cosine coefficient beta_{i} of c",
        }

    def get_field_definition(self, field_name: str) -> Optional[Dict[str, Any]]:
        """Get definition for a specific column"""
        if field_name in self.data_dictionary:
            return self.data_dictionary[field_name]

        match = re.fullmatch(r"([a-z]+)_(\d+)", field_name)
        if match and match.group(1) in self.indexed_columns:
            template = self.indexed_columns[match.group(1)]
            return {"description": template.format(i=match.group(2)), "data_type": "float"}
        return None

    def get_all_fields(self) -> List[str]:
        return list(self.data_dictionary.keys())

    def describe_frame(self, df: pd.DataFrame, title: str) -> str:
        """Schema sidecar text for a table, one line per column"""
        lines = [f"# schema: {title}", f"# columns: {len(df.columns)}"]
        for column in df.columns:
            definition = self.get_field_definition(str(column))
            if definition is None:
                logger.warning(f"Column '{column}' missing from the data dictionary")
                definition = {"description": "undocumented", "data_type": str(df[column].dtype)}
            lines.append(f"{column}\t{definition['data_type']}\t{definition['description']}")
        return "\n".join(lines) + "\n"
