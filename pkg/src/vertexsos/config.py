"""Run configuration schema.

Configs are JSON objects.  Every section has complete defaults, so a config
may be as small as ``{"command": "YBE_CHECK"}``; the parsed config records
every applied default.  Unknown keys are rejected at any depth.
"""

from __future__ import annotations

import hashlib
import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import SchemaError, UnknownKey

COMMANDS = ("YBE_CHECK", "PARTITION", "INTERTWINE", "QR_COMPOSE", "TRANSFER", "PLOT_DATA")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class OutputSpec(_Section):
    report: str = "report.json"
    matrix_csv: str = "matrix.csv"
    sweep_csv: str = "sweep.csv"


class YBESection(_Section):
    builder: Literal["identity", "symmetric", "field"] = "symmetric"
    eta: float = 0.7
    H: float = 0.3
    V: float = 0.1
    n_draws: int = Field(20, ge=0, le=10_000)
    u_low: float = -1.0
    u_high: float = 1.0


class FieldSection(_Section):
    a: float = Field(1.0, ge=0)
    b: float = Field(1.0, ge=0)
    c: float = Field(1.0, ge=0)
    H: float = 0.0
    V: float = 0.0
    lam: float = Field(1.0, ge=1)


class PartitionSection(_Section):
    model: Literal["6V", "20V"] = "6V"
    kind: Literal["square-torus", "square-open", "triangular-torus", "triangular-open"] = "square-torus"
    M: int = Field(2, ge=1)
    N: int = Field(2, ge=1)
    weights: tuple[float, float, float, float, float, float] = (1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    fields: Optional[FieldSection] = None
    a20: tuple[float, float, float] = (1.0, 1.0, 1.0)
    b20: tuple[float, float, float] = (1.0, 1.0, 1.0)
    c20: tuple[float, float, float] = (1.0, 1.0, 1.0)
    # 20V pattern -> weight class 0..6, e.g. {"++|++|++": 0, ...}; None keeps the built-in table
    class_table: Optional[dict[str, int]] = None

    @field_validator("weights", "a20", "b20", "c20")
    @classmethod
    def _nonneg(cls, v):
        if min(v) < 0:
            raise ValueError("weights must be nonnegative")
        return v

    @field_validator("class_table")
    @classmethod
    def _classes(cls, v):
        if v is not None and any(not 0 <= c <= 6 for c in v.values()):
            raise ValueError("weight classes run 0..6")
        return v


class TheoremSection(_Section):
    l: list[float] = [1.0]
    u: float = 0.3
    v: float = 0.1
    w_aux: list[float] = [0.5]
    reduction: Literal["first", "sum", "mean"] = "first"
    r11: Literal["universal", "zero", "linear"] = "universal"


class QRSection(_Section):
    rep: Literal["fundamental2", "sl3"] = "fundamental2"
    z: float = 1.0
    q: float = 0.6
    hbar: float = 0.3
    n_max: int = Field(20, ge=0, le=64)
    m_max: int = Field(1, ge=-1)
    r: int = Field(1, ge=1)


class IntertwineSection(_Section):
    method: Literal["numeric", "theorem"] = "numeric"
    r_matrix: Literal["identity", "symmetric6v", "explicit"] = "symmetric6v"
    scale: float = 1.0
    d: Literal[2, 3] = 2
    eta: float = 0.7
    x: float = 0.3
    entries: Optional[list[list[tuple[float, float]]]] = None
    tol: float = Field(1e-12, gt=0)
    max_iter: int = Field(500, ge=1)
    base_height: int = 0
    theorem: TheoremSection = TheoremSection()
    qr: QRSection = QRSection()


class TransferSection(_Section):
    M: int = Field(1, ge=0)
    N: int = Field(1, ge=0)
    n_max: int = Field(1, ge=1, le=16)
    q: float = 0.5
    H: float = 0.0
    alpha: float = 0.0
    xi: float = 0.4
    s: float = 1.0
    s_i: float = 0.3
    s_j: float = 0.2
    probe_sizes: list[int] = [0, 1, 2]


class PlotSection(_Section):
    sweep: Literal["disorder_vs_H", "c_vs_u"] = "disorder_vs_H"
    start: float = -1.0
    stop: float = 1.0
    count: int = Field(21, ge=0, le=100_000)
    fields: FieldSection = FieldSection(a=1.0, b=1.0, c=1.0)
    theorem: TheoremSection = TheoremSection()
    qr: QRSection = QRSection()


class RunConfig(_Section):
    command: Literal[COMMANDS]
    seed: int = Field(0, ge=0)
    output: OutputSpec = OutputSpec()
    ybe: YBESection = YBESection()
    partition: PartitionSection = PartitionSection()
    intertwine: IntertwineSection = IntertwineSection()
    qr: QRSection = QRSection()
    transfer: TransferSection = TransferSection()
    plot: PlotSection = PlotSection()


def _raise_schema(exc: ValidationError):
    err = exc.errors()[0]
    loc = tuple(err["loc"])
    if err["type"] == "extra_forbidden":
        raise UnknownKey(loc[-1], loc[:-1]) from None
    raise SchemaError(err["msg"], loc) from None


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("config must be a JSON object")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        _raise_schema(exc)


def config_to_dict(cfg: RunConfig) -> dict:
    return cfg.model_dump(mode="json")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def serialize_config(cfg: RunConfig) -> str:
    return canonical_json(config_to_dict(cfg))


def config_digest(cfg_or_dict) -> str:
    data = config_to_dict(cfg_or_dict) if isinstance(cfg_or_dict, RunConfig) else cfg_or_dict
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()

