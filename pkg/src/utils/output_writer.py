"""
Single results collector for one experiment output directory

Every artifact (CSV tables with schema sidecars, profile snapshots, gnuplot
data, the manifest, error records) is written through here, atomically.
"""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from config import Config
from src.simulation.grid import FieldState, Grid
from src.utils.data_dictionary import DataDictionary


def format_number(value: Any) -> str:
    """Fixed notation with a fixed number of significant digits"""
    if value is None:
        return "nan"
    value = float(value)
    if not np.isfinite(value):
        return "nan" if np.isnan(value) else ("inf" if value > 0 else "-inf")
    return np.format_float_positional(
        value,
        precision=Config.OUTPUT["significant_digits"],
        unique=False,
        fractional=False,
        trim="-",
    )


def format_frame(df: pd.DataFrame) -> str:
    """CSV text with every float column rendered by format_number"""
    out = df.copy()
    for column in out.columns:
        if pd.api.types.is_float_dtype(out[column]):
            out[column] = [format_number(x) for x in out[column]]
    return out.to_csv(index=False, lineterminator="\n")


class ResultsCollector:
    """Writes the artifacts of one run into its output directory"""

    def __init__(self, output_dir: Path = None):
        self.output_dir = Path(output_dir) if output_dir else Config.BASE_OUTPUT_PATH
        Config.create_directories(self.output_dir)
        self.dictionary = DataDictionary()
        self.artifacts: List[Path] = []

    def _write_text(self, filename: str, text: str) -> Path:
        target = self.output_dir / filename
        handle, temp_name = tempfile.mkstemp(dir=self.output_dir, prefix=".tmp_")
        try:
            with os.fdopen(handle, "w", encoding="utf-8", newline="") as stream:
                stream.write(text)
            os.replace(temp_name, target)
        except Exception as e:
            logger.error(f"Error writing {target}: {e}")
            if os.path.exists(temp_name):
                os.remove(temp_name)
            raise
        self.artifacts.append(target)
        return target

    def write_csv(self, name: str, df: pd.DataFrame) -> Path:
        """
        Write a table and its schema sidecar

        Args:
            name: File stem
            df: Table to write

        Returns:
            Path to the CSV file
        """
        path = self._write_text(f"{name}.csv", format_frame(df))
        self._write_text(f"{name}.schema.txt", self.dictionary.describe_frame(df, name))
        logger.info(f"Saved {len(df)} rows to {path}")
        return path

    def write_profile(self, name: str, state: FieldState, grid: Grid) -> Path:
        return self.write_csv(name, state.to_frame(grid))

    def write_dat(self, name: str, x: Sequence[float], y: Sequence[float]) -> Path:
        """Whitespace-separated x y columns for gnuplot"""
        lines = [f"{format_number(a)} {format_number(b)}" for a, b in zip(x, y)]
        return self._write_text(f"{name}.dat", "\n".join(lines) + "\n")

    def write_manifest(self, entries: Dict[str, Any]) -> Path:
        """Flat key = value manifest in insertion order"""
        lines = []
        for key, value in entries.items():
            if isinstance(value, float):
                value = format_number(value)
            lines.append(f"{key} = {value}")
        return self._write_text("manifest.txt", "\n".join(lines) + "\n")

    def write_error(self, record: Dict[str, Any]) -> Path:
        return self._write_text("error.json", json.dumps(record, indent=2, sort_keys=True) + "\n")


def read_manifest(path: Path) -> Dict[str, str]:
    entries: Dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        if " = " in line:
            key, value = line.split(" = ", 1)
            entries[key] = value
    return entries
