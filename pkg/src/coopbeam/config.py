"""Experiment configuration (JSON only).

A minimal document is ``{"seed": 1, "L": 4, "K": 4, "N_l": 2, "M_k": 2}``;
the top-level ``L``, ``K``, ``N_l`` and ``M_k`` are shorthand for the
same keys inside ``topology``.  Everything else has a default and
unknown keys are rejected.
"""

import json
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as _PydValidationError

from .errors import ParseError, ValidationError

__all__ = ["ExperimentConfig", "TopologyConfig", "ChannelConfig", "AlgorithmConfig",
           "MetricConfig", "OutputConfig", "SweepConfig", "EdgeOverride", "parse_config",
           "config_from_dict", "config_to_dict", "CONFIG_SCHEMA_VERSION"]

CONFIG_SCHEMA_VERSION = 1

PosInt = Field(ge=1)
PosFloat = Field(gt=0)
Count = Annotated[int, Field(ge=1)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TopologyConfig(_Strict):
    mode: Literal["full", "nearest_b", "geometric"] = "nearest_b"
    L: int = PosInt
    K: int = PosInt
    N_l: Union[Count, List[Count]] = 1
    M_k: Union[Count, List[Count]] = 1
    b: int = Field(3, ge=1)
    radius: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _check(self):
        for name, n in (("N_l", self.L), ("M_k", self.K)):
            v = getattr(self, name)
            if isinstance(v, list) and len(v) != n:
                raise ValueError(f"{name} lists need {n} entries, got {len(v)}")
        if self.mode == "nearest_b" and self.b > self.L:
            raise ValueError(f"b={self.b} exceeds L={self.L}")
        if self.mode == "geometric" and self.radius is None:
            raise ValueError("geometric mode needs a radius")
        return self


class EdgeOverride(_Strict):
    k: int = Field(ge=0)
    l: int = Field(ge=0)
    rho_R: float = Field(ge=0, lt=1)
    rho_T: float = Field(ge=0, lt=1)
    gain: float = PosFloat


class ChannelConfig(_Strict):
    rho_max: float = Field(0.7, ge=0, lt=1)
    gain_range: Tuple[float, float] = (0.1, 1.0)
    edges: List[EdgeOverride] = []

    @model_validator(mode="after")
    def _check(self):
        lo, hi = self.gain_range
        if not 0 < lo <= hi:
            raise ValueError("gain_range must satisfy 0 < lo <= hi")
        return self


class AlgorithmConfig(_Strict):
    run: List[Literal["bp", "amp", "ccoi", "admm"]] = ["bp", "amp", "ccoi", "admm"]
    T: int = Field(50, ge=1)
    beta: float = Field(1e-2, gt=0)
    beta_k: Optional[List[float]] = None
    damping: float = Field(0.0, ge=0, lt=1)
    admm_rho: float = Field(1.0, gt=0)
    onsager_order: Literal["derived", "printed"] = "derived"
    amp_first_round_onsager: bool = False
    ccoi_first_round_onsager: bool = False
    tau: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if self.beta_k is not None and any(b <= 0 for b in self.beta_k):
            raise ValueError("beta_k entries must be positive")
        if len(set(self.run)) != len(self.run):
            raise ValueError("algorithms listed more than once")
        return self


class MetricConfig(_Strict):
    sigma2: float = Field(1e-2, gt=0)
    symbols: Literal["gaussian", "qpsk"] = "gaussian"


class OutputConfig(_Strict):
    dir: str = "out"
    prefix: str = ""


class SweepConfig(_Strict):
    seeds: List[int] = []
    workers: int = Field(1, ge=1)


class ExperimentConfig(_Strict):
    schema_version: Literal[1] = CONFIG_SCHEMA_VERSION
    seed: int = Field(0, ge=0, lt=2**64)
    topology: TopologyConfig
    channel: ChannelConfig = ChannelConfig()
    algorithms: AlgorithmConfig = AlgorithmConfig()
    metric: MetricConfig = MetricConfig()
    output: OutputConfig = OutputConfig()
    sweep: SweepConfig = SweepConfig()

    @model_validator(mode="before")
    @classmethod
    def _shorthand(cls, data):
        if not isinstance(data, dict):
            return data
        short = {k: data[k] for k in ("L", "K", "N_l", "M_k") if k in data}
        if not short:
            return data
        data = {k: v for k, v in data.items() if k not in short}
        top = dict(data.get("topology") or {})
        for key, val in short.items():
            if key in top and top[key] != val:
                raise ValueError(f"{key} given both at top level and in topology")
            top[key] = val
        data["topology"] = top
        return data

    @model_validator(mode="after")
    def _check(self):
        bk = self.algorithms.beta_k
        if bk is not None and len(bk) != self.topology.K:
            raise ValueError(f"beta_k needs K={self.topology.K} entries, got {len(bk)}")
        for e in self.channel.edges:
            if e.k >= self.topology.K or e.l >= self.topology.L:
                raise ValueError(f"edge override ({e.k}, {e.l}) out of range")
        return self

    @property
    def beta(self):
        """Scalar or per-UE regularization as used by the algorithms."""
        a = self.algorithms
        return tuple(a.beta_k) if a.beta_k is not None else a.beta


def _error_path(err):
    # union members add their type name to the location; drop those
    return ".".join(str(p) for p in err["loc"]
                    if not (isinstance(p, str) and ("[" in p or p.startswith("constrained-")
                                            or p in ("int", "list"))))


def parse_config(text):
    """Parse and validate a JSON configuration document.

    Raises
    ------
    ParseError
        Malformed JSON or a top-level value that is not an object.
    ValidationError
        Unknown key or out-of-range value; ``.path`` names the key.
    """
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError("configuration must be a JSON object")
    return config_from_dict(data)


def config_from_dict(data):
    try:
        return ExperimentConfig.model_validate(data)
    except _PydValidationError as exc:
        err = exc.errors()[0]
        path = _error_path(err)
        msg = err["msg"]
        if err["type"] == "extra_forbidden":
            msg = f"unknown key {err['loc'][-1]!r}"
        raise ValidationError(path, msg) from None


def config_to_dict(cfg):
    """Plain JSON-compatible dict that re-parses to an equal config."""
    return cfg.model_dump(mode="json")
