"""
Model definition for two competing species with one-way chemotactic coupling

    u_t = D1 u_xx - chi (u c_x)_x + r1 u (1 - u - b1 v)
    v_t = D2 v_xx + r2 v (1 - v - b2 u)
    c_t = c_xx + v - c

on (0, L) with no-flux boundaries. Species v produces the chemical c and
species u responds to its gradient (chi < 0 is repulsion).
"""

import configparser
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from config import Config

PARAM_KEYS = ("D1", "D2", "chi", "r1", "r2", "b1", "b2", "L")

DEGENERATE_NOTE = "b1*b2 = 1: coexistence state is not isolated and is omitted"


class ModelParams(BaseModel):
    """The seven PDE parameters plus the domain length"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    D1: float = Field(default=Config.DEFAULT_PARAMS["D1"], gt=0)
    D2: float = Field(default=Config.DEFAULT_PARAMS["D2"], gt=0)
    chi: float = Config.DEFAULT_PARAMS["chi"]
    r1: float = Field(default=Config.DEFAULT_PARAMS["r1"], gt=0)
    r2: float = Field(default=Config.DEFAULT_PARAMS["r2"], gt=0)
    b1: float = Field(default=Config.DEFAULT_PARAMS["b1"], ge=0)
    b2: float = Field(default=Config.DEFAULT_PARAMS["b2"], ge=0)
    L: float = Field(default=Config.DEFAULT_PARAMS["L"], gt=0)

    def with_updates(self, **changes) -> "ModelParams":
        """Return a validated copy with some fields replaced"""
        data = self.model_dump()
        data.update(changes)
        return ModelParams(**data)

    def to_config_text(self) -> str:
        """Flat key = value text, one parameter per line"""
        return "".join(f"{key} = {getattr(self, key)!r}\n" for key in PARAM_KEYS)

    @classmethod
    def from_config_text(cls, text: str) -> "ModelParams":
        """Parse flat key = value text (a [params] header is optional)"""
        parser = configparser.ConfigParser()
        parser.optionxform = str
        body = text if text.lstrip().startswith("[") else "[params]\n" + text
        parser.read_string(body)
        section = "params" if parser.has_section("params") else parser.sections()[0]
        values = {key: float(value) for key, value in parser.items(section)}
        return cls(**values)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.to_config_text())
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ModelParams":
        return cls.from_config_text(Path(path).read_text())


class SteadyStateKind(str, Enum):
    TRIVIAL = "trivial"
    EXTINCTION_OF_V = "extinction-of-v"
    EXTINCTION_OF_U = "extinction-of-u"
    COEXISTENCE = "coexistence"


@dataclass(frozen=True)
class SteadyState:
    """Homogeneous equilibrium (u*, v*, c*) with c* = v*"""

    u_star: float
    v_star: float
    c_star: float
    kind: SteadyStateKind
    physical: bool = True

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.u_star, self.v_star, self.c_star)


@dataclass(frozen=True)
class SteadyStateSet:
    """Steady states of one parameter set, with a note when coexistence is omitted"""

    states: Tuple[SteadyState, ...]
    note: str = ""

    def __iter__(self) -> Iterator[SteadyState]:
        return iter(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, index: int) -> SteadyState:
        return self.states[index]

    def by_kind(self, kind: SteadyStateKind) -> Optional[SteadyState]:
        for state in self.states:
            if state.kind == kind:
                return state
        return None


@dataclass(frozen=True)
class WellMixedVerdict:
    """stable: every eigenvalue has negative real part; physical: u*, v* >= 0"""

    state: SteadyState
    stable: bool
    physical: bool
    eigenvalue_real_parts: Tuple[float, float, float]


def coexistence_state(params: ModelParams) -> Optional[SteadyState]:
    """Interior equilibrium, or None when b1*b2 = 1"""
    denominator = params.b1 * params.b2 - 1.0
    if abs(denominator) < Config.STABILITY["degenerate_tol"]:
        return None
    u_star = (params.b1 - 1.0) / denominator
    v_star = (params.b2 - 1.0) / denominator
    return SteadyState(
        u_star=u_star,
        v_star=v_star,
        c_star=v_star,
        kind=SteadyStateKind.COEXISTENCE,
        physical=bool(u_star >= 0 and v_star >= 0),
    )


def steady_states(params: ModelParams) -> SteadyStateSet:
    """
    All homogeneous equilibria of the model

    Args:
        params: Model parameters

    Returns:
        Trivial and both extinction states, plus coexistence unless b1*b2 = 1.
        Coexistence with a negative coordinate is returned with physical=False.
    """
    states: List[SteadyState] = [
        SteadyState(0.0, 0.0, 0.0, SteadyStateKind.TRIVIAL),
        SteadyState(1.0, 0.0, 0.0, SteadyStateKind.EXTINCTION_OF_V),
        SteadyState(0.0, 1.0, 1.0, SteadyStateKind.EXTINCTION_OF_U),
    ]
    coexistence = coexistence_state(params)
    if coexistence is None:
        logger.debug(f"Degenerate competition b1={params.b1}, b2={params.b2}")
        return SteadyStateSet(tuple(states), note=DEGENERATE_NOTE)

    states.append(coexistence)
    note = "" if coexistence.physical else "coexistence state is non-physical"
    return SteadyStateSet(tuple(states), note=note)


def reaction_terms(u, v, c, params: ModelParams):
    """Kinetic right-hand sides (du, dv, dc); works on scalars and arrays"""
    du = params.r1 * u * (1.0 - u - params.b1 * v)
    dv = Config.V_REACTION_SIGN * params.r2 * v * (1.0 - v - params.b2 * u)
    dc = v - c
    return du, dv, dc


def reaction_jacobian(state: SteadyState, params: ModelParams) -> np.ndarray:
    """Jacobian of the kinetics at a homogeneous state (no transport terms)"""
    u, v = state.u_star, state.v_star
    s = Config.V_REACTION_SIGN
    return np.array(
        [
            [params.r1 * (1.0 - 2.0 * u - params.b1 * v), -params.r1 * params.b1 * u, 0.0],
            [-s * params.r2 * params.b2 * v, s * params.r2 * (1.0 - 2.0 * v - params.b2 * u), 0.0],
            [0.0, 1.0, -1.0],
        ]
    )


def classify_well_mixed(state: SteadyState, params: ModelParams) -> WellMixedVerdict:
    """
    Stability of a steady state in the spatially homogeneous system

    stable depends on the eigenvalues alone; a non-physical coexistence
    point may be stable and is flagged by physical=False.
    """
    eigenvalues = np.linalg.eigvals(reaction_jacobian(state, params))
    real_parts = tuple(float(x) for x in np.sort(eigenvalues.real)[::-1])
    # marginal eigenvalues on the b = 1 boundaries count as not stable
    margin = Config.STABILITY["root_residual_tol"]
    stable = bool(all(x < -margin for x in real_parts))
    return WellMixedVerdict(
        state=state, stable=stable, physical=state.physical, eigenvalue_real_parts=real_parts
    )
