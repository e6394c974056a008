"""
Drift-Umgebungen

Geseedete Generatoren für Ströme (X_t, Y_t, h*_t), deren Zielkonzept sich pro
Runde um höchstens Δ_{t+1} Disagreement-Masse verschiebt. Der Drift wird nach
der Ausgabe von Runde t angewendet.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import structlog

from shared.models.hypotheses import (
    HalfspaceHypothesis,
    Hypothesis,
    Point,
    ThresholdHypothesis,
    UnitVector,
)
from shared.utils.drift.geometry import disagreement, sample_unit_sphere
from shared.utils.errors import InvalidParameterError

logger = structlog.get_logger()

ErrorOracle = Callable[[Hypothesis], float]


class ScheduleKind(str, Enum):
    """Form der Driftfolge Δ_t"""
    CONSTANT = "constant"
    POWER_DECAY = "power_decay"
    CONSTANT_WITH_JUMPS = "constant_with_jumps"


@dataclass(frozen=True)
class DriftSchedule:
    """Driftraten Δ_t für t >= 2"""
    kind: ScheduleKind = ScheduleKind.CONSTANT
    delta: float = 0.0
    c: float = 1.0
    p: float = 1.0
    jump_period: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if not 0.0 <= self.delta <= 1.0:
            raise InvalidParameterError(f"Δ muss in [0,1] liegen: {self.delta}")
        if self.c < 0 or self.p < 0:
            raise InvalidParameterError(f"Zerfallsparameter negativ: c={self.c}, p={self.p}")
        if self.jump_period < 1:
            raise InvalidParameterError(f"Sprungperiode muss >= 1 sein: {self.jump_period}")

    @classmethod
    def constant(cls, delta: float) -> "DriftSchedule":
        return cls(ScheduleKind.CONSTANT, delta=delta)

    @classmethod
    def power_decay(cls, c: float, p: float) -> "DriftSchedule":
        return cls(ScheduleKind.POWER_DECAY, c=c, p=p)

    @classmethod
    def with_jumps(cls, delta: float, jump_period: int) -> "DriftSchedule":
        return cls(ScheduleKind.CONSTANT_WITH_JUMPS, delta=delta, jump_period=jump_period)

    def is_jump(self, t: int) -> bool:
        return self.kind == ScheduleKind.CONSTANT_WITH_JUMPS and t % self.jump_period == 0

    def delta_at(self, t: int) -> float:
        if t < 2:
            raise InvalidParameterError(f"Δ_t ist erst ab t=2 definiert: {t}")
        if self.kind == ScheduleKind.POWER_DECAY:
            return float(min(self.c * t ** (-self.p), 1.0))
        if self.is_jump(t):
            return 1.0
        return self.delta

    def deltas(self, t_max: int) -> np.ndarray:
        """Array mit Eintrag j = Δ_j für j in 0..t_max (Einträge 0 und 1 sind 0)."""
        out = np.zeros(t_max + 1)
        if t_max < 2:
            return out
        ts = np.arange(2, t_max + 1)
        if self.kind == ScheduleKind.POWER_DECAY:
            out[2:] = np.minimum(self.c * ts.astype(float) ** (-self.p), 1.0)
        else:
            out[2:] = self.delta
            if self.kind == ScheduleKind.CONSTANT_WITH_JUMPS:
                out[2:][ts % self.jump_period == 0] = 1.0
        return out


@dataclass(frozen=True)
class Observation:
    """Ausgabe einer Runde: Punkt, Label, Zielkonzept und exaktes Fehlerorakel"""
    t: int
    x: Point
    y: int
    target: Hypothesis
    error_oracle: ErrorOracle


class DriftEnvironment(ABC):
    """Basisklasse aller Umgebungen: ein Zielkonzept, ein Rundenzähler, ein RNG"""

    KIND = "abstract"

    def __init__(self, dimension: int, schedule: DriftSchedule, seed: int):
        self.dimension = dimension
        self.schedule = schedule
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.t = 1
        self.logger = logger.bind(env=self.KIND, seed=seed)

    @property
    @abstractmethod
    def target(self) -> Hypothesis:
        """Aktuelles Zielkonzept h*_t."""

    @abstractmethod
    def _sample_point(self) -> Point:
        ...

    @abstractmethod
    def _drift(self, delta: float) -> None:
        """Verschiebt das Ziel um höchstens delta Disagreement-Masse."""

    @abstractmethod
    def _redraw(self) -> None:
        """Sprung: Ziel gleichverteilt neu ziehen."""

    def error_of(self, h: Hypothesis) -> float:
        """er_t(h) gegenüber dem aktuellen Ziel."""
        return disagreement(h, self.target)

    def advance(self) -> Observation:
        x = self._sample_point()
        target = self.target
        obs = Observation(
            t=self.t,
            x=x,
            y=target.predict(x),
            target=target,
            error_oracle=lambda h: disagreement(h, target),
        )
        next_t = self.t + 1
        if self.schedule.is_jump(next_t):
            self._redraw()
            self.logger.debug("target_redrawn", t=next_t)
        else:
            self._drift(self.schedule.delta_at(next_t))
        self.t = next_t
        return obs


class RotatingHalfspaceEnvironment(DriftEnvironment):
    """
    Homogener Halbraum auf S^{d−1}, der pro Runde um den Winkel π·Δ dreht

    Die Drehebene wird in jeder Runde neu aus aktuellem Gewicht und einer
    zufälligen orthogonalen Richtung gebildet. Mit `fixed_direction` dreht
    das Ziel in d=2 stets gegen den Uhrzeigersinn.
    """

    KIND = "rotating"

    def __init__(
        self,
        dimension: int,
        schedule: DriftSchedule,
        seed: int,
        fixed_direction: bool = False,
    ):
        if dimension < 2:
            raise InvalidParameterError(f"Rotierende Umgebung braucht d >= 2: {dimension}")
        if fixed_direction and dimension != 2:
            raise InvalidParameterError("Feste Drehrichtung nur für d=2")
        super().__init__(dimension, schedule, seed)
        self.fixed_direction = fixed_direction
        self._weight = sample_unit_sphere(dimension, self.rng)

    @property
    def target(self) -> HalfspaceHypothesis:
        return HalfspaceHypothesis(self._weight)

    def _sample_point(self) -> np.ndarray:
        return sample_unit_sphere(self.dimension, self.rng).coords

    def _orthogonal_direction(self) -> np.ndarray:
        w = self._weight.coords
        if self.fixed_direction:
            return np.array([-w[1], w[0]])
        while True:
            g = self.rng.standard_normal(self.dimension)
            u = g - np.dot(g, w) * w
            norm = np.linalg.norm(u)
            if norm > 1e-12:
                return u / norm

    def _drift(self, delta: float) -> None:
        if delta <= 0.0:
            return
        angle = np.pi * min(delta, 1.0)
        u = self._orthogonal_direction()
        self._weight = UnitVector(np.cos(angle) * self._weight.coords + np.sin(angle) * u)

    def _redraw(self) -> None:
        self._weight = sample_unit_sphere(self.dimension, self.rng)


class RandomWalk2DEnvironment(DriftEnvironment):
    """Polarwinkel-Irrfahrt φ_t = φ_{t−1} + min{Δ_t, 1/2}·π·B_t auf dem Kreis"""

    KIND = "random_walk"
    SUPPORTS = {(-1, 1), (0, 1)}

    def __init__(
        self,
        schedule: DriftSchedule,
        seed: int,
        walk_support: Sequence[int] = (-1, 1),
    ):
        support = tuple(sorted(int(b) for b in walk_support))
        if support not in self.SUPPORTS:
            raise InvalidParameterError(f"Ungültiger Träger für B_t: {walk_support}")
        super().__init__(2, schedule, seed)
        self.walk_support = np.array(support, dtype=int)
        self.phi0 = float(self.rng.uniform(0.0, 2 * np.pi))
        self.phi = self.phi0

    @property
    def target(self) -> HalfspaceHypothesis:
        return HalfspaceHypothesis.from_angle(self.phi)

    def _sample_point(self) -> np.ndarray:
        return sample_unit_sphere(2, self.rng).coords

    def _drift(self, delta: float) -> None:
        step = int(self.rng.choice(self.walk_support))
        self.phi += min(delta, 0.5) * np.pi * step

    def _redraw(self) -> None:
        self.phi = float(self.rng.uniform(0.0, 2 * np.pi))


class DriftingThresholdEnvironment(DriftEnvironment):
    """Schwelle auf [0,1] unter X ~ Uniform[0,1); Δ >= 1 zieht das Ziel neu"""

    KIND = "threshold"

    def __init__(self, schedule: DriftSchedule, seed: int):
        super().__init__(1, schedule, seed)
        self.cut = float(self.rng.uniform())
        self.polarity = 1

    @property
    def target(self) -> ThresholdHypothesis:
        return ThresholdHypothesis(self.cut, self.polarity)

    def _sample_point(self) -> float:
        return float(self.rng.random())

    def _drift(self, delta: float) -> None:
        direction = 1 if self.rng.random() < 0.5 else -1
        if delta >= 1.0:
            self._redraw()
            return
        if delta <= 0.0:
            return
        for sign in (direction, -direction):
            moved = self.cut + sign * delta
            if 0.0 <= moved <= 1.0:
                self.cut = moved
                return
        self.cut = 0.0 if self.cut > 0.5 else 1.0

    def _redraw(self) -> None:
        self.cut = float(self.rng.uniform())
        self.polarity = 1 if self.rng.random() < 0.5 else -1


def make_rotating_halfspace_env(
    d: int, schedule: DriftSchedule, seed: int, fixed_direction: bool = False
) -> RotatingHalfspaceEnvironment:
    return RotatingHalfspaceEnvironment(d, schedule, seed, fixed_direction=fixed_direction)


def make_random_walk_2d_env(
    schedule: DriftSchedule, walk_support: Sequence[int] = (-1, 1), seed: int = 0
) -> RandomWalk2DEnvironment:
    return RandomWalk2DEnvironment(schedule, seed, walk_support=walk_support)


def make_threshold_env(schedule: DriftSchedule, seed: int) -> DriftingThresholdEnvironment:
    return DriftingThresholdEnvironment(schedule, seed)


def env_advance(env: DriftEnvironment) -> Tuple[Point, int, ErrorOracle]:
    """Zieht X_t, labelt mit h*_t und driftet das Ziel für Runde t+1."""
    obs = env.advance()
    return obs.x, obs.y, obs.error_oracle
