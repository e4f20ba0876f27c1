# checks/models.py

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, computed_field, field_validator

from utils.config import get_output_dir, get_seed, get_threads

COMMANDS = (
    "verify", "ascent", "noncomm", "wave", "wave2d", "wave3d",
    "kg", "damped", "oscillator", "grushin", "fixture", "rule",
)


class RunConfig(BaseModel):
    """Merged configuration for one run: config.yaml, then env, then flags."""

    command: Literal[COMMANDS]
    t: float = 0.3
    tol: float = 1e-5
    level: int = 32
    m0: int = 8
    m_cap: int = 1024
    grid: int = 64
    length: float = 8.0
    sigma: float = 0.4
    a: float = 1.0
    dim: int = 2
    seed: int = Field(default_factory=get_seed)
    threads: int = Field(default_factory=get_threads)
    fixture: Optional[str] = None
    output_dir: str = Field(default_factory=get_output_dir)
    out: Literal["csv", "json"] = "json"
    checks: Optional[List[str]] = None
    quick: bool = False
    richardson: bool = False
    values: List[float] = Field(default_factory=lambda: [1.0, 1.0])
    kind: Literal["pair", "diagonal", "commuting"] = "pair"
    count: int = 2
    size: int = 4
    samples: Optional[int] = None
    rule_kind: Literal["ball", "sphere"] = "ball"
    parity: Optional[Literal["even", "odd"]] = None
    q: Optional[int] = None

    @field_validator("tol")
    @classmethod
    def _positive_tol(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("tolerance must be positive")
        return v

    @field_validator("level")
    @classmethod
    def _level(cls, v: int) -> int:
        if v < 1:
            raise ValueError("level must be >= 1")
        return v

    @field_validator("grid")
    @classmethod
    def _grid(cls, v: int) -> int:
        if v < 4:
            raise ValueError("grid must have at least 4 points per axis")
        return v

    @field_validator("seed", "threads")
    @classmethod
    def _non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must be >= 0")
        return v

    @field_validator("m0", "m_cap", "count", "size")
    @classmethod
    def _at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("q")
    @classmethod
    def _operator_count(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 2:
            raise ValueError("need at least two operators")
        return v

    @field_validator("length", "sigma")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("must be positive")
        return v


class CheckResult(BaseModel):
    """One measured quantity against its tolerance.

    ``at_least`` flips the comparison for quantities that must reach a floor
    (fitted decay exponents).
    """

    name: str
    formula: str
    value: float
    tolerance: float
    at_least: bool = False
    detail: Dict[str, Any] = Field(default_factory=dict)

    @computed_field
    @property
    def passed(self) -> bool:
        if self.value != self.value:
            return False
        return self.value >= self.tolerance if self.at_least else self.value <= self.tolerance


class Report(BaseModel):
    command: str
    formula: str
    seed: int
    inputs: Dict[str, Any] = Field(default_factory=dict)
    checks: List[CheckResult] = Field(default_factory=list)
    results: Dict[str, Any] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)
    # wall-clock seconds per check; kept out of dumps so artifacts stay byte-identical
    timings: Dict[str, float] = Field(default_factory=dict, exclude=True)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]
