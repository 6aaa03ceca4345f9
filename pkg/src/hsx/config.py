"""Run configuration, validated with pydantic."""

from __future__ import annotations

from typing import Literal, Optional

import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .banach import Grid
from .errors import HSXError, ValidationError
from .io import read_json
from .scenarios import SCENARIO_NAMES, default_grid, get_scenario
from .state import EulerianState

KINDS = ("simulate", "metric", "lipschitz", "converge", "validate")


class GridConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = Field(1024, ge=3)
    xi_min: Optional[float] = None
    xi_max: Optional[float] = None

    def build(self, n: int | None = None) -> Grid:
        n = self.n if n is None else n
        if self.xi_min is None and self.xi_max is None:
            return default_grid(n)
        lo = -3.0 if self.xi_min is None else self.xi_min
        hi = 12.0 if self.xi_max is None else self.xi_max
        return Grid(lo, hi, n)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["simulate", "metric", "lipschitz", "converge", "validate"] = "simulate"
    scenario: Optional[str] = None
    state: Optional[dict] = None
    scenario_b: Optional[str] = None
    state_b: Optional[dict] = None
    grid: GridConfig = GridConfig()
    times: list[float] = [0.0]
    budget: int = Field(0, ge=0)
    q: int = Field(3, ge=1)
    sweeps: int = Field(2, ge=0)
    seed: int = Field(0, ge=0, lt=2**64)
    pairs: int = Field(20, ge=1)
    roughness: float = Field(0.5, gt=0.0, lt=1.0)
    ladder: list[int] = [256, 512, 1024]
    out: str = "hsx_out"

    @field_validator("scenario", "scenario_b")
    @classmethod
    def _known_scenario(cls, v):
        if v is not None and v not in SCENARIO_NAMES:
            raise ValueError(f"unknown scenario {v!r}; choose from {', '.join(SCENARIO_NAMES)}")
        return v

    @field_validator("times")
    @classmethod
    def _times(cls, v):
        if not v:
            raise ValueError("at least one time is required")
        if any(t < 0 for t in v):
            raise ValueError("times must be nonnegative")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("times must be strictly increasing")
        return v

    @field_validator("ladder")
    @classmethod
    def _ladder(cls, v):
        if len(v) < 2 or any(b <= a for a, b in zip(v, v[1:])) or v[0] < 3:
            raise ValueError("ladder needs at least two increasing grid sizes >= 3")
        return v

    @model_validator(mode="after")
    def _source(self):
        if self.scenario is not None and self.state is not None:
            raise ValueError("give either a scenario or an inline state, not both")
        if self.kind in ("simulate", "converge") and self.scenario is None and self.state is None:
            raise ValueError(f"{self.kind} needs a scenario or an inline state")
        return self

    def initial_state(self, which: str = "a") -> EulerianState | None:
        name = self.scenario if which == "a" else self.scenario_b
        inline = self.state if which == "a" else self.state_b
        if name is not None:
            return get_scenario(name).initial
        if inline is not None:
            s = EulerianState.from_dict(inline)
            s.check_compatibility()
            return s
        return None


def _field_path(loc) -> str:
    return ".".join(str(p) for p in loc) or "config"


def parse_config(data: dict, overrides: dict | None = None) -> RunConfig:
    data = dict(data)
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k == "grid_n":
            data["grid"] = {**data.get("grid", {}), "n": v}
        else:
            data[k] = v
    try:
        cfg = RunConfig.model_validate(data)
    except pydantic.ValidationError as exc:
        err = exc.errors()[0]
        raise ValidationError(err["msg"], field=_field_path(err["loc"])) from exc
    try:
        cfg.grid.build()
        cfg.initial_state("a")
        cfg.initial_state("b")
    except ValidationError:
        raise
    except HSXError as exc:
        raise ValidationError(str(exc), field="state") from exc
    return cfg


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Read and validate a JSON run configuration, filling defaults."""
    data = read_json(path)
    if not isinstance(data, dict):
        raise ValidationError("configuration must be a JSON object", field="config")
    return parse_config(data, overrides)
