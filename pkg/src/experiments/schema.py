"""Experiment configuration: YAML documents validated with pydantic."""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..branching import BranchingConfig, OffspringLaw, extinction_probability
from ..errors import ConfigError, InvalidSpecError
from ..kpp import FrontFunction, HardIndicator, Ramp, ZeroFunction
from ..levy_motion import (
    BrownianComponent,
    CompositeSum,
    MotionSpec,
    NonSymmetricOneStable,
    StrictlyStable,
    tail_scale,
)
from ..normalization import ConstantOne, LogType, TailScale
from ..tree import TestFunction, as_test_functions

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class OffspringSection(_Section):
    probabilities: List[float] = Field(min_length=1)
    beta: float = Field(gt=0)
    population_cap: int = Field(default=10**8, gt=0)


class MotionSection(_Section):
    kind: Literal["stable", "composite", "one-stable-asym", "brownian"]
    alpha: Optional[float] = Field(default=None, gt=0, lt=2)
    c1: float = Field(default=0.0, ge=0)
    c2: float = Field(default=0.0, ge=0)
    a: float = 0.0
    b: float = Field(default=0.0, ge=0)
    components: List["MotionSection"] = Field(default_factory=list)

    def build(self, nested: bool = False) -> MotionSpec:
        if self.kind == "stable":
            if self.alpha is None:
                raise InvalidSpecError("A stable motion needs alpha")
            return StrictlyStable(self.alpha, self.c1, self.c2, self.a)
        if self.kind == "one-stable-asym":
            return NonSymmetricOneStable(self.c1, self.c2, self.a)
        if self.kind == "brownian":
            if not nested:
                raise InvalidSpecError("A Brownian motion is only allowed as a composite component")
            return BrownianComponent(self.b)
        return CompositeSum(tuple(component.build(nested=True) for component in self.components))


MotionSection.model_rebuild()


class NormalizationSection(_Section):
    slowly_varying: Literal["one", "log"] = "one"
    power: float = Field(default=1.0, gt=0)


class TestFunctionSection(_Section):
    kind: Literal["ramp", "plateau", "tent", "zero"]
    start: Optional[float] = None
    width: Optional[float] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    height: float = Field(default=1.0, ge=0)
    edge: Optional[float] = None

    __test__ = False

    def as_record(self) -> Dict[str, Any]:
        fields = {"ramp": ("start", "width", "height"), "plateau": ("lo", "hi", "height", "edge"), "tent": ("lo", "hi", "height")}
        record = {"kind": self.kind}
        for name in fields.get(self.kind, ()):
            value = getattr(self, name)
            if value is not None:
                record[name] = value
        return record


class FrontFunctionSection(_Section):
    kind: Literal["ramp", "indicator", "zero"] = "ramp"
    start: float = 0.0
    width: float = Field(default=1.0, gt=0)
    height: float = Field(default=1.0, ge=0)
    threshold: float = 0.0

    def build(self) -> FrontFunction:
        if self.kind == "ramp":
            return Ramp(self.start, self.width, self.height)
        if self.kind == "indicator":
            return HardIndicator(self.threshold)
        return ZeroFunction()


def _default_test_functions() -> List[TestFunctionSection]:
    return [
        TestFunctionSection(kind="plateau", lo=1.0, hi=3.0),
        TestFunctionSection(kind="ramp", start=0.5, width=1.0, height=2.0),
    ]


class ExperimentSection(_Section):
    replications: int = Field(default=5000, gt=0)
    t_grid: List[float] = Field(default_factory=lambda: [4.0, 6.0, 8.0], min_length=1)
    truncation: Optional[float] = Field(default=None, gt=0)
    test_functions: List[TestFunctionSection] = Field(default_factory=_default_test_functions)
    cdf_points: List[float] = Field(default_factory=lambda: [1.0])
    order_statistics: int = Field(default=2, ge=1)

    ks_tolerance: float = Field(default=0.08, gt=0)
    second_ks_tolerance: float = Field(default=0.10, gt=0)
    limit_ks_tolerance: float = Field(default=0.02, gt=0)
    spot_standard_errors: float = Field(default=4.0, gt=0)

    limit_draws: int = Field(default=100_000, gt=0)
    limit_chunk: int = Field(default=1_000, gt=0)
    laplace_mode: Literal["yule-quadrature", "nested-mc"] = "yule-quadrature"
    laplace_outer: int = Field(default=10_000, gt=0)
    laplace_inner: int = Field(default=100_000, gt=0)
    laplace_tolerance: float = Field(default=0.01, gt=0)

    cluster_draws: int = Field(default=100_000, gt=0)
    cluster_chunk: int = Field(default=10_000, gt=0)
    cluster_k_max: int = Field(default=20, ge=1)
    cluster_mode: Literal["auto", "yule", "conditional-time"] = "auto"
    theta_mode: Literal["auto", "analytic", "ode", "monte-carlo"] = "auto"

    w_horizon: Optional[float] = Field(default=None, gt=0)
    singleton_draws: int = Field(default=1_000_000, gt=0)
    survival_w_draws: int = Field(default=10_000, gt=0)
    w_check_draws: int = Field(default=400, ge=0)

    front_function: FrontFunctionSection = Field(default_factory=FrontFunctionSection)
    front_level: float = Field(default=0.5, gt=0, lt=1)
    front_trees: int = Field(default=2000, ge=1000)
    speed_tolerance: float = Field(default=0.2, gt=0)
    gamma_fast: float = Field(default=1.0, gt=0)
    gamma_slow: float = Field(default=0.3, gt=0)
    band_tolerance: float = Field(default=0.1, gt=0)

    jump_t_grid: List[float] = Field(default_factory=lambda: [3.0, 5.0, 7.0], min_length=3)
    jump_theta: float = Field(default=1.0, gt=0)
    jump_tolerance: Optional[float] = Field(default=None, gt=0)
    rho: Optional[float] = Field(default=None, gt=0)
    many_to_one_t: float = Field(default=2.0, ge=0)
    many_to_one_s: float = Field(default=1.0, ge=0)
    tail_draws: int = Field(default=10_000_000, gt=0)
    tail_quantile: float = Field(default=1e-4, gt=0, lt=1)
    tail_band: float = Field(default=0.15, gt=0)

    @field_validator("t_grid", "jump_t_grid")
    @classmethod
    def _nonnegative_times(cls, values: List[float]) -> List[float]:
        if any(t < 0 or not math.isfinite(t) for t in values):
            raise ValueError("times must be finite and nonnegative")
        return sorted(set(values))


class ExperimentConfig(_Section):
    offspring: OffspringSection
    motion: MotionSection
    normalization: NormalizationSection = Field(default_factory=NormalizationSection)
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)

    def branching(self) -> BranchingConfig:
        return BranchingConfig(
            OffspringLaw(tuple(self.offspring.probabilities)), self.offspring.beta, self.offspring.population_cap
        )

    def motion_spec(self) -> MotionSpec:
        return self.motion.build()

    def tail_scale(self) -> TailScale:
        scale = tail_scale(self.motion_spec())
        factor = ConstantOne() if self.normalization.slowly_varying == "one" else LogType(self.normalization.power)
        return TailScale(scale.alpha, scale.q1, scale.q2, factor)

    def normalization_matches_motion(self) -> bool:
        """Every motion kind has tails c x^-alpha, so only L = 1 gives the right h_t."""
        return self.normalization.slowly_varying == "one"

    def test_functions(self) -> List[TestFunction]:
        return list(as_test_functions([section.as_record() for section in self.experiment.test_functions]))

    def with_overrides(self, replications: Optional[int] = None, t_grid: Optional[List[float]] = None) -> "ExperimentConfig":
        updates: Dict[str, Any] = {}
        if replications is not None:
            updates["replications"] = replications
        if t_grid is not None:
            updates["t_grid"] = t_grid
        if not updates:
            return self
        data = self.model_dump()
        data["experiment"].update(updates)
        return validate_config(data)

    def echo(self) -> List[str]:
        """The resolved config as sorted dotted key = JSON value lines."""
        lines: List[str] = []
        _flatten("", self.model_dump(mode="json"), lines)
        return lines

    def derived(self) -> Dict[str, float]:
        branching = self.branching()
        scale = self.tail_scale()
        return {
            "lambda": branching.lam,
            "extinction_probability": extinction_probability(branching.offspring),
            "alpha": scale.alpha,
            "q1": scale.q1,
            "q2": scale.q2,
        }


def _flatten(prefix: str, value: Any, out: List[str]) -> None:
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else key, value[key], out)
    else:
        out.append(f"{prefix} = {json.dumps(value, sort_keys=True)}")


def _field_path(error: Mapping[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "<root>"


def validate_config(data: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a config document, then every model invariant it implies."""
    if not isinstance(data, Mapping):
        raise ConfigError("<root>", "config must be a mapping with offspring, motion, normalization, experiment")
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(_field_path(first), first.get("msg", str(e))) from e
    checks = (("offspring", config.branching), ("motion", config.motion_spec), ("normalization", config.tail_scale))
    for section, build in checks:
        try:
            build()
        except InvalidSpecError as e:
            raise ConfigError(section, str(e)) from e
    try:
        config.test_functions()
    except InvalidSpecError as e:
        raise ConfigError("experiment.test_functions", str(e)) from e
    return config


def load_config(source: Union[str, Path, Mapping[str, Any]]) -> ExperimentConfig:
    if isinstance(source, Mapping):
        return validate_config(source)
    path = Path(source)
    try:
        with path.open("r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError("<file>", f"config file {path} does not exist") from e
    except yaml.YAMLError as e:
        raise ConfigError("<file>", f"config file {path} is not valid YAML: {e}") from e
    logger.info(f"Loaded experiment config from {path}")
    return validate_config(data or {})
