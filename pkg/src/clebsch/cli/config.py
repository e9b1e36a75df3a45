"""Scenario configuration schema (JSON files, validated before any computation)."""

from __future__ import annotations

import json
import math
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

BACKEND_GROUPS = {
    "finite": ("u1", "so3", "su2"),
    "extended": ("u1", "so3", "su2"),
    "ymh": ("u1", "su2"),
    "gr": (),
}
_SECTIONS = {"finite": "mechanics", "extended": "mechanics", "ymh": "lattice", "gr": "gravity"}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class IntegratorConfig(_Strict):
    scheme: Literal["rk4", "implicit_midpoint"] = "rk4"
    dt: float = Field(gt=0, allow_inf_nan=False)
    newton_tol: float = Field(default=1e-12, gt=0)
    max_newton: int = Field(default=50, ge=1)


class OutputConfig(_Strict):
    directory: str = "runs"
    name: str = Field(default="run", min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    cadence: int = Field(default=1, ge=1)
    checkpoint: bool = False


class MechanicsConfig(_Strict):
    """Rotation-invariant particles: ``bodies`` points in R^2 (U(1)) or R^3."""

    bodies: int = Field(default=2, ge=1)
    mass: float = Field(default=1.0, gt=0)
    stiffness: float = 1.0
    quartic: float = 0.0
    pair: float = 0.0
    xi_weight: float = 0.0
    xi: Optional[List[float]] = None
    xi_oscillation: Optional[List[float]] = None
    xi_frequency: float = 1.0
    q0: Optional[List[float]] = None
    p0: Optional[List[float]] = None
    seed: int = 0
    project_constraint: bool = True


class LatticeConfig(_Strict):
    n: int = Field(default=8, ge=2)
    a: float = Field(default=1.0, gt=0)
    mu: float = Field(default=0.5, ge=0)
    v: float = Field(default=1.0, ge=0)
    amplitude: float = Field(default=0.1, ge=0)
    seed: int = 0
    a0: Optional[List[float]] = None
    checkpoint_in: Optional[str] = None


class GravityConfig(_Strict):
    kasner_exponents: List[float] = Field(default_factory=lambda: [2.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0])
    t0: float = Field(default=1.0, gt=0)
    lapse: float = Field(default=1.0, gt=0)
    lapse_rate: float = 0.0


class ScenarioConfig(_Strict):
    backend: Literal["finite", "extended", "ymh", "gr"]
    group: Optional[Literal["u1", "so3", "su2"]] = None
    horizon: float = Field(ge=0, allow_inf_nan=False)
    integrator: IntegratorConfig
    output: OutputConfig = Field(default_factory=OutputConfig)
    mechanics: Optional[MechanicsConfig] = None
    lattice: Optional[LatticeConfig] = None
    gravity: Optional[GravityConfig] = None

    @model_validator(mode="after")
    def _consistency(self):
        allowed = BACKEND_GROUPS[self.backend]
        if allowed and self.group not in allowed:
            raise ValueError(f"group: backend {self.backend!r} needs a group in {list(allowed)}, got {self.group!r}")
        if not allowed and self.group is not None:
            raise ValueError(f"group: backend {self.backend!r} takes no group, got {self.group!r}")
        own = _SECTIONS[self.backend]
        for section in ("mechanics", "lattice", "gravity"):
            if section != own and getattr(self, section) is not None:
                raise ValueError(f"{section}: section not used by backend {self.backend!r}")
        if getattr(self, own) is None:
            defaults = {"mechanics": MechanicsConfig, "lattice": LatticeConfig, "gravity": GravityConfig}
            setattr(self, own, defaults[own]())
        steps = self.horizon / self.integrator.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"horizon: {self.horizon} is not an integer multiple of integrator.dt {self.integrator.dt}")
        if own == "mechanics":
            self._check_mechanics()
        elif own == "lattice":
            self._check_lattice()
        else:
            self._check_gravity()
        return self

    def algebra_dim(self):
        return 1 if self.group == "u1" else 3

    def _check_mechanics(self):
        m = self.mechanics
        dim = m.bodies * (2 if self.group == "u1" else 3)
        for name, want in (("q0", dim), ("p0", dim), ("xi", self.algebra_dim()), ("xi_oscillation", self.algebra_dim())):
            value = getattr(m, name)
            if value is not None and len(value) != want:
                raise ValueError(f"mechanics.{name}: expected {want} entries, got {len(value)}")
            if value is not None and not all(math.isfinite(v) for v in value):
                raise ValueError(f"mechanics.{name}: entries must be finite")

    def _check_lattice(self):
        lat = self.lattice
        if lat.a0 is not None and len(lat.a0) != self.algebra_dim():
            raise ValueError(f"lattice.a0: expected {self.algebra_dim()} entries, got {len(lat.a0)}")

    def _check_gravity(self):
        grav = self.gravity
        p = grav.kasner_exponents
        if len(p) != 3:
            raise ValueError("gravity.kasner_exponents: expected 3 entries")
        if abs(sum(p) - 1.0) > 1e-10 or abs(sum(x * x for x in p) - 1.0) > 1e-10:
            raise ValueError("gravity.kasner_exponents: need sum p = 1 and sum p^2 = 1")
        end = grav.lapse + grav.lapse_rate * self.horizon
        if end <= 0:
            raise ValueError(f"gravity.lapse_rate: lapse reaches {end} <= 0 within the horizon")


class ConfigError(Exception):
    """Configuration could not be read or validated."""


def _describe(err):
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def validate_config(data):
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_describe(err)) from None


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}") from None
    return validate_config(data)


def normalized(config):
    """JSON-ready dict that re-validates to an identical config."""
    return config.model_dump(mode="json")
