import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Union

import tomli
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from app.utils.exceptions import ConfigError

Command = Literal["moments", "tail", "bell", "net-certify", "gap-scan", "crossover", "weyl", "typical-bound"]

GRID_FIELDS = ("k", "n", "l", "epsilon", "seeds")
INT_GRID_FIELDS = ("k", "n", "l", "seeds")
SEED_BOUND = 2**64


def parse_grid(value: Union[str, int, float, List], integer: bool = True) -> List:
    """
    Expand grid syntax into a list.

    Accepts a scalar, a list, a comma list "2,4,8", or a range "start:step:stop"
    that includes stop when it is hit exactly ("2:2:8" gives 2, 4, 6, 8).
    """
    cast = int if integer else float
    if isinstance(value, (list, tuple)):
        return [cast(v) for v in value]
    if isinstance(value, (int, float)):
        return [cast(value)]
    text = str(value).strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range {text!r} must read start:step:stop")
        start, step, stop = (cast(part) for part in parts)
        if step <= 0:
            raise ValueError(f"range {text!r} needs a positive step")
        if stop < start:
            return []
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [cast(round(start + i * step, 12)) for i in range(count)]
    return [cast(part) for part in text.split(",") if part.strip()]


class ExperimentConfig(BaseModel):
    """Fully resolved settings of one CLI run; echoed into every report header."""
    command: Command
    seed: int = Field(..., ge=0, lt=SEED_BOUND, description="Master seed; there is no wall-clock seeding")
    k: List[int] = Field(default_factory=lambda: [2], description="Output dimensions")
    n: List[int] = Field(default_factory=lambda: [2], description="Environment dimensions")
    l: List[int] = Field(default_factory=lambda: [2], description="Input dimensions")
    theta: float = Field(0.25, gt=0.0, le=0.25)
    epsilon: List[float] = Field(default_factory=lambda: [0.1, 0.2, 0.3])
    trials: int = Field(20_000, ge=1)
    restarts: int = Field(8, ge=1)
    channels: int = Field(20, ge=1, description="Random channels drawn by bell and net-certify")
    samples: int = Field(10_000, ge=1, description="Sphere samples for covering and soundness checks")
    seeds: Optional[List[int]] = Field(None, description="Per-row seeds of gap-scan; the master seed when unset")
    a: float = Field(1.0, gt=0.0, description="Ratio l / n for the crossover solver")
    beta: Optional[float] = Field(None, gt=0.0, description="Ratio k^2 / n for the crossover solver")
    beta_zero: bool = False
    phi_copies: int = Field(1, ge=0, le=1)
    omega_copies: int = Field(0, ge=0, le=1)
    phase_quotient: Optional[bool] = None
    workers: Optional[int] = Field(None, ge=1)
    output_path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"

    @field_validator(*GRID_FIELDS, mode="before")
    @classmethod
    def expand_grid(cls, value, info):
        if value is None:
            return value
        return parse_grid(value, integer=info.field_name in INT_GRID_FIELDS)

    @field_validator("k", "n", "l")
    @classmethod
    def check_positive(cls, value):
        if any(d < 1 for d in value):
            raise ValueError("dimensions must be positive")
        return value

    @model_validator(mode="after")
    def check_dims(self):
        if self.command in ("bell", "gap-scan", "net-certify", "weyl"):
            bad = [(l, k, n) for l in self.l for k in self.k for n in self.n if l > k * n]
            if bad:
                raise ValueError(f"input dimension exceeds k*n for (l, k, n) in {bad}")
        if self.command == "crossover" and not self.beta_zero and self.beta is None:
            raise ValueError("crossover needs --beta unless --beta-zero is given")
        return self


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        if path.suffix == ".toml":
            with path.open("rb") as fh:
                return tomli.load(fh)
        if path.suffix == ".json":
            return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError, tomli.TOMLDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    raise ConfigError(f"config files must be .toml or .json, got {path.name}")


def config_parse(overrides: Mapping[str, Any], config_file: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    """Merge a config file with command-line values; flags that were given win."""
    data: Dict[str, Any] = load_config_file(config_file) if config_file else {}
    data = {key.replace("-", "_"): value for key, value in data.items()}
    data.update({key: value for key, value in overrides.items() if value is not None})
    if data.get("seed") is None:
        raise ConfigError("a seed is required")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
