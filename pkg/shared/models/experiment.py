"""
Experiment-Konfiguration und Zusammenfassungen

Pydantic-Modelle für die Abschnitte einer Konfigurationsdatei. Abgeleitete
Werte (z.B. Standard-δ oder c₉) bleiben `None` und werden beim Serialisieren
als `auto` geschrieben.
"""

import os
from enum import Enum
from typing import Any, ClassVar, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from shared.models.trace import RunTrace, format_float
from shared.utils.drift.environments import DriftSchedule, ScheduleKind
from shared.utils.drift.window_erm import ConfidenceSchedule
from shared.utils.errors import ConfigValidationError

OUTPUT_DIR_ENV = "DRIFTSIM_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"

SUMMARY_HEADER = ["config_digest", "seed", "mistakes", "queries", "final_rate", "mean_error"]


class EnvironmentKind(str, Enum):
    """Verfügbare Drift-Umgebungen"""
    ROTATING = "rotating"
    RANDOM_WALK = "random_walk"
    THRESHOLD = "threshold"


class LearnerKind(str, Enum):
    """Verfügbare Lernverfahren"""
    ADAPTIVE = "adaptive"
    NONADAPTIVE = "nonadaptive"
    DRIFTING_HALFSPACES = "drifting_halfspaces"
    DRIFTING_ACTIVE = "drifting_active"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ExperimentSection(_Section):
    """[experiment]"""
    horizon: int = Field(..., ge=1, description="Anzahl Runden T")
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    output_dir: Optional[str] = Field(None, description=f"Standard: ${OUTPUT_DIR_ENV} oder ./results")
    workers: int = Field(1, ge=1)
    final_fraction: float = Field(0.1, gt=0, le=1)

    @field_validator("seeds", mode="before")
    @classmethod
    def split_seeds(cls, v: Any) -> Any:
        if isinstance(v, str):
            return [part.strip() for part in v.split(",") if part.strip()]
        if isinstance(v, int):
            return [v]
        return v

    @field_validator("seeds")
    @classmethod
    def non_negative_seeds(cls, v: List[int]) -> List[int]:
        if any(seed < 0 for seed in v):
            raise ValueError("Seeds müssen >= 0 sein")
        return v

    @model_validator(mode="after")
    def default_output_dir(self) -> "ExperimentSection":
        if self.output_dir is None:
            self.output_dir = os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR
        return self


class EnvironmentSection(_Section):
    """[environment]"""
    kind: EnvironmentKind = EnvironmentKind.ROTATING
    dimension: Optional[int] = Field(None, ge=1, description="Standard: 2 bzw. 1 für threshold")
    schedule: ScheduleKind = ScheduleKind.CONSTANT
    delta: float = Field(0.0, ge=0, le=1, description="Driftrate Δ")
    decay_c: float = Field(1.0, ge=0)
    decay_p: float = Field(1.0, ge=0)
    jump_period: int = Field(1000, ge=1)
    walk_support: str = "-1,1"
    fixed_direction: bool = False

    @field_validator("walk_support", mode="before")
    @classmethod
    def normalize_support(cls, v: Any) -> str:
        if isinstance(v, (list, tuple)):
            v = ",".join(str(b) for b in v)
        parts = sorted(int(p) for p in str(v).replace(" ", "").split(",") if p)
        if tuple(parts) not in {(-1, 1), (0, 1)}:
            raise ValueError("walk_support muss '-1,1' oder '0,1' sein")
        return ",".join(str(p) for p in parts)

    def resolved_dimension(self) -> int:
        if self.dimension is not None:
            return self.dimension
        return 1 if self.kind == EnvironmentKind.THRESHOLD else 2

    def support(self) -> Tuple[int, ...]:
        return tuple(int(p) for p in self.walk_support.split(","))

    def build_schedule(self) -> DriftSchedule:
        return DriftSchedule(
            kind=self.schedule,
            delta=self.delta,
            c=self.decay_c,
            p=self.decay_p,
            jump_period=self.jump_period,
        )


class LearnerSection(_Section):
    """[learner]"""
    kind: LearnerKind = LearnerKind.ADAPTIVE


class WindowSection(_Section):
    """[window]: adaptiver und nicht-adaptiver Fensterlerner"""
    K: float = Field(8.0, gt=0)
    confidence: float = Field(0.1, gt=0, le=1)
    vc_dim: Optional[int] = Field(None, ge=1, description="Standard: Dimension der Klasse")
    confidence_schedule: ConfidenceSchedule = ConfidenceSchedule.FIXED
    max_window: Optional[int] = Field(None, ge=1)


class HalfspacesSection(_Section):
    """[halfspaces]: ModPerceptron + ABL"""
    kappa: float = Field(0.1, gt=0, lt=1)
    c5: float = Field(1.0, gt=0)
    c7: float = Field(1.0, gt=0)
    c8: Optional[float] = Field(None, gt=0)
    c9: Optional[float] = Field(None, gt=0)
    c10: Optional[float] = Field(None, gt=0)
    m0: int = Field(2000, ge=1)
    alpha_static: float = Field(1.0 / 16.0, gt=0, le=1, description="α bei Δ = 0")
    confidence: Optional[float] = Field(None, gt=0, lt=1)
    budget: int = Field(2000, ge=1)
    theoretical: bool = False
    last_index: bool = False


class ActiveSection(_Section):
    """[active]"""
    c1: float = Field(32.0, gt=0)
    grid_size: int = Field(1024, ge=1)


class ExperimentConfig(_Section):
    """Vollständige Konfiguration eines Experiments"""
    experiment: ExperimentSection
    environment: EnvironmentSection = Field(default_factory=EnvironmentSection)
    learner: LearnerSection = Field(default_factory=LearnerSection)
    window: WindowSection = Field(default_factory=WindowSection)
    halfspaces: HalfspacesSection = Field(default_factory=HalfspacesSection)
    active: ActiveSection = Field(default_factory=ActiveSection)

    SECTION_ORDER: ClassVar[Tuple[str, ...]] = (
        "experiment", "environment", "learner", "window", "halfspaces", "active"
    )

    def check_compatibility(self) -> None:
        """
        Prüft die Kombination aus Umgebung und Lerner

        Raises:
            ConfigValidationError: Mit dem Schlüssel, der die Kombination ungültig macht
        """
        env = self.environment
        d = env.resolved_dimension()
        if env.kind == EnvironmentKind.THRESHOLD and d != 1:
            raise ConfigValidationError("dimension", "threshold-Umgebung hat d=1", "environment")
        if env.kind == EnvironmentKind.RANDOM_WALK and d != 2:
            raise ConfigValidationError("dimension", "random_walk hat d=2", "environment")
        if env.kind == EnvironmentKind.ROTATING and d < 2:
            raise ConfigValidationError("dimension", "rotating braucht d >= 2", "environment")
        if env.fixed_direction and (env.kind != EnvironmentKind.ROTATING or d != 2):
            raise ConfigValidationError(
                "fixed_direction", "nur für rotating mit d=2", "environment"
            )

        kind = self.learner.kind
        if kind in (LearnerKind.ADAPTIVE, LearnerKind.NONADAPTIVE, LearnerKind.DRIFTING_ACTIVE):
            if env.kind != EnvironmentKind.THRESHOLD and d != 2:
                raise ConfigValidationError(
                    "kind", f"{kind.value} braucht Schwellen oder 2D-Halbräume", "learner"
                )
        if kind == LearnerKind.DRIFTING_HALFSPACES and env.kind == EnvironmentKind.THRESHOLD:
            raise ConfigValidationError("kind", "drifting_halfspaces braucht Halbräume", "learner")
        if kind == LearnerKind.DRIFTING_ACTIVE:
            if env.delta <= 0.0 or env.delta * d > 1.0:
                raise ConfigValidationError(
                    "delta", "aktiver Lerner braucht 0 < dΔ <= 1", "environment"
                )

    def section_items(self) -> List[Tuple[str, Dict[str, Any]]]:
        return [(name, getattr(self, name).model_dump()) for name in self.SECTION_ORDER]


class SummaryRow(BaseModel):
    """Eine Zeile der Zusammenfassung pro Seed"""
    config_digest: str
    seed: int
    mistakes: int
    queries: int
    final_rate: float
    mean_error: float

    @classmethod
    def from_trace(
        cls, digest: str, seed: int, trace: RunTrace, final_fraction: float = 0.1
    ) -> "SummaryRow":
        return cls(
            config_digest=digest,
            seed=seed,
            mistakes=trace.total_mistakes,
            queries=trace.total_queries,
            final_rate=trace.final_rate(final_fraction),
            mean_error=trace.mean_error(),
        )

    def to_row(self) -> List[str]:
        return [
            self.config_digest,
            str(self.seed),
            str(self.mistakes),
            str(self.queries),
            format_float(self.final_rate),
            format_float(self.mean_error),
        ]
