"""
Cell-centered grid and discretized field state
"""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from config import Config


@dataclass(frozen=True)
class Grid:
    """Uniform grid of N cells on (0, L), nodes at cell centers"""

    L: float
    N: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"Domain length must be positive, got {self.L}")
        if self.N < Config.SIMULATION["min_cells"]:
            raise ValueError(
                f"Grid needs at least {Config.SIMULATION['min_cells']} cells, got {self.N}"
            )

    @classmethod
    def from_spacing(cls, L: float, dx: float = None) -> "Grid":
        dx = Config.SIMULATION["dx"] if dx is None else dx
        cells = max(Config.SIMULATION["min_cells"], int(round(L / dx)))
        return cls(L=float(L), N=cells)

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.dx

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(L=self.L, N=self.N * factor)


@dataclass
class FieldState:
    """Profiles of u, v, c at time t"""

    t: float
    u: np.ndarray
    v: np.ndarray
    c: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.u.copy(), self.v.copy(), self.c.copy(), dict(self.meta))

    def field(self, name: str) -> np.ndarray:
        if name not in ("u", "v", "c"):
            raise ValueError(f"Unknown field: {name}")
        return getattr(self, name)

    def mirrored(self) -> "FieldState":
        """Reflection x -> L - x"""
        return FieldState(self.t, self.u[::-1].copy(), self.v[::-1].copy(), self.c[::-1].copy())

    def amplitude(self, name: str = "u") -> float:
        values = self.field(name)
        return float(values.max() - values.min())

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)) and np.all(np.isfinite(self.c))
        )

    def to_frame(self, grid: Grid) -> pd.DataFrame:
        return pd.DataFrame({"x": grid.x, "u": self.u, "v": self.v, "c": self.c})

    @classmethod
    def uniform(cls, grid: Grid, u: float, v: float, c: float, t: float = 0.0) -> "FieldState":
        return cls(
            t=t,
            u=np.full(grid.N, float(u)),
            v=np.full(grid.N, float(v)),
            c=np.full(grid.N, float(c)),
        )

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, t: float = 0.0) -> "FieldState":
        return cls(
            t=t,
            u=frame["u"].to_numpy(dtype=float),
            v=frame["v"].to_numpy(dtype=float),
            c=frame["c"].to_numpy(dtype=float),
        )
