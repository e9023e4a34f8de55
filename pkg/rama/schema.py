from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from typing import Any, Dict, List, Optional

from rama.core.errors import ParameterError
from rama.core.gf import prime_power

CHECK_NAMES = ("spectra", "mixing", "color", "radius", "diameter")

# Slack for comparisons against bounds that involve irrational constants.
BOUND_SLACK = 1e-12


def _odd_q(q: int) -> int:
    p, _ = prime_power(q)
    if p == 2:
        raise ValueError(f"q = {q} is even; only odd q is supported")
    return q


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


class CheckLine(BaseModel):
    """
    One verified claim: a measured value against a bound or expected value.
    `anchor` names the bound the claim comes from.
    """
    name: str
    passed: bool
    measured: Any
    bound: Any = None
    anchor: str = ""

    def render(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name} {_fmt(self.measured)} {_fmt(self.bound)}"
        return f"{text} [{self.anchor}]" if self.anchor else text


class CheckReport(BaseModel):
    """
    A list of PASS/FAIL lines plus free-form key/value notes and an optional
    CSV appendix (header row first).
    """
    title: str
    lines: List[CheckLine] = Field(default_factory=list)
    notes: Dict[str, str] = Field(default_factory=dict)
    csv_rows: List[List[Any]] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(line.passed for line in self.lines)

    def check(self, name: str, passed: bool, measured: Any, bound: Any = None, anchor: str = "") -> bool:
        self.lines.append(CheckLine(name=name, passed=bool(passed), measured=measured, bound=bound, anchor=anchor))
        return bool(passed)

    def note(self, key: str, value: Any) -> None:
        self.notes[key] = _fmt(value)

    def extend(self, other: "CheckReport") -> None:
        for line in other.lines:
            self.lines.append(line.model_copy(update={"name": f"{other.title}.{line.name}"}))
        for key, value in other.notes.items():
            self.notes[f"{other.title}.{key}"] = value

    def render(self) -> str:
        out = [f"# {self.title}"]
        out += [f"{k} = {v}" for k, v in self.notes.items()]
        out += [line.render() for line in self.lines]
        out.append(f"RESULT {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(out) + "\n"

    def render_csv(self) -> str:
        return "".join(",".join(_fmt(x) for x in row) + "\n" for row in self.csv_rows)


class DiscrepancyReport(BaseModel):
    """Outcome of a hypergraph mixing run over many subset families."""
    mode: str
    seed: Optional[int] = None
    families: int
    failures: int
    max_disc: float
    max_disc_exact: str
    worst_sizes: List[int]
    hypergraph_bound_at_worst: float
    colorful_bound: Optional[float] = None
    samples: List[List[Any]] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0


class RadiusReport(BaseModel):
    """
    Injectivity radius measured by comparing quotient and building ball sizes.
    `displacement_from_radius` = 2r + 1 is the displacement lower bound implied
    by the measured radius r, not a measured displacement.
    """
    measured_radius: int
    building_sizes: List[int]
    quotient_sizes: List[int]
    order: int
    radius_lower_bound: Optional[float] = None
    displacement_lower_bound: Optional[float] = None
    displacement_from_radius: int


class CommandConfig(BaseModel):
    """
    Fully resolved flags of one CLI run. Validated before any computation;
    the whole model is logged at the start of the run.
    """
    subcommand: str
    q: Optional[int] = None
    d: Optional[int] = None
    e: Optional[int] = None
    target_r: Optional[int] = None
    radius: int = 2
    seed: int = 7
    samples: int = 10_000
    checks: List[str] = Field(default_factory=lambda: ["all"])
    max_elements: int = 5_000_000
    max_vertices: int = 2_000_000
    maxiter: int = 5000
    dense_threshold: int = 4096
    threads: int = 1
    force: bool = False
    cover: bool = False
    qs: List[int] = Field(default_factory=list)
    ds: List[int] = Field(default_factory=list)
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    group_path: Optional[str] = None
    report_path: Optional[str] = None
    csv_path: Optional[str] = None
    log_level: str = "INFO"

    @field_validator("q")
    @classmethod
    def _odd_prime_power(cls, v: Optional[int]) -> Optional[int]:
        return v if v is None else _odd_q(v)

    @field_validator("qs")
    @classmethod
    def _all_odd_prime_powers(cls, v: List[int]) -> List[int]:
        return [_odd_q(q) for q in v]

    @field_validator("d")
    @classmethod
    def _dimension(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 2:
            raise ValueError("d must be >= 2")
        return v

    @field_validator("e")
    @classmethod
    def _degree(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 2:
            raise ValueError("e must be >= 2")
        return v

    @field_validator("radius", "samples", "seed")
    @classmethod
    def _non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @field_validator("max_elements", "max_vertices", "maxiter", "dense_threshold", "threads")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be positive")
        return v

    @field_validator("checks")
    @classmethod
    def _known_checks(cls, v: List[str]) -> List[str]:
        for name in v:
            if name != "all" and name not in CHECK_NAMES:
                raise ValueError(f"unknown check {name!r}")
        return v

    @model_validator(mode="after")
    def _partite_index_divides_d(self) -> "CommandConfig":
        if self.target_r is not None:
            if self.target_r < 1:
                raise ValueError("r must be >= 1")
            if self.d is not None and self.d % self.target_r:
                raise ValueError(f"r = {self.target_r} does not divide d = {self.d}")
        return self

    @property
    def selected_checks(self) -> List[str]:
        if "all" in self.checks:
            return list(CHECK_NAMES)
        return [c for c in CHECK_NAMES if c in self.checks]

    @classmethod
    def resolve(cls, **values: Any) -> "CommandConfig":
        """Builds a config, turning validation failures into ParameterError."""
        try:
            return cls(**values)
        except ValidationError as exc:
            raise ParameterError(str(exc)) from exc
