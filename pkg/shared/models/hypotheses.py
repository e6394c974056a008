"""
Hypothesen-Modelle für den Drift-Simulator

Homogene Halbräume auf der Einheitssphäre und Schwellwert-Klassifikatoren
auf [0,1]. Für sign(0) gilt überall +1.
"""

from dataclasses import dataclass
from typing import Protocol, Sequence, Union

import numpy as np

from shared.utils.errors import InvalidParameterError

Point = Union[float, np.ndarray]


class Hypothesis(Protocol):
    """Gemeinsame Schnittstelle aller Klassifikatoren"""

    def predict(self, x: Point) -> int:
        ...

    def predict_many(self, points: np.ndarray) -> np.ndarray:
        ...


@dataclass(frozen=True, eq=False)
class UnitVector:
    """Vektor mit euklidischer Norm 1 (wird bei Konstruktion normiert)"""
    coords: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.coords, dtype=float).reshape(-1)
        if arr.size == 0:
            raise InvalidParameterError("UnitVector braucht Dimension >= 1")
        norm = float(np.linalg.norm(arr))
        if not np.isfinite(norm) or norm == 0.0:
            raise InvalidParameterError("Nullvektor kann nicht normiert werden")
        arr = arr / norm
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @classmethod
    def from_angle(cls, phi: float) -> "UnitVector":
        """Polardarstellung (cos φ, sin φ) für d=2."""
        return cls(np.array([np.cos(phi), np.sin(phi)]))

    @classmethod
    def basis(cls, d: int, index: int = 0) -> "UnitVector":
        if d < 1 or not 0 <= index < d:
            raise InvalidParameterError(f"Ungültiger Basisvektor e_{index} in d={d}")
        e = np.zeros(d)
        e[index] = 1.0
        return cls(e)

    @property
    def dimension(self) -> int:
        return int(self.coords.shape[0])

    def dot(self, x: np.ndarray) -> float:
        return float(np.dot(self.coords, x))

    def angle(self) -> float:
        """Polarwinkel in [0, 2π), nur für d=2."""
        if self.dimension != 2:
            raise InvalidParameterError("Polarwinkel nur für d=2 definiert")
        return float(np.arctan2(self.coords[1], self.coords[0]) % (2 * np.pi))

    def __neg__(self) -> "UnitVector":
        return UnitVector(-self.coords)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UnitVector):
            return NotImplemented
        return bool(np.array_equal(self.coords, other.coords))

    def __hash__(self) -> int:
        return hash(self.coords.tobytes())

    def __repr__(self) -> str:
        return f"UnitVector({np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True)
class HalfspaceHypothesis:
    """h_w(x) = sign(w·x) mit sign(0) = +1"""
    weight: UnitVector

    @classmethod
    def from_angle(cls, phi: float) -> "HalfspaceHypothesis":
        return cls(UnitVector.from_angle(phi))

    @property
    def dimension(self) -> int:
        return self.weight.dimension

    def predict(self, x: Point) -> int:
        return 1 if self.weight.dot(np.asarray(x, dtype=float)) >= 0.0 else -1

    def predict_many(self, points: np.ndarray) -> np.ndarray:
        margins = np.asarray(points, dtype=float) @ self.weight.coords
        return np.where(margins >= 0.0, 1, -1)

    def complement(self) -> "HalfspaceHypothesis":
        return HalfspaceHypothesis(-self.weight)


@dataclass(frozen=True)
class ThresholdHypothesis:
    """h(x) = polarity · sign(x − cut) mit sign(0) = +1"""
    cut: float
    polarity: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.cut <= 1.0:
            raise InvalidParameterError(f"Schwelle außerhalb [0,1]: {self.cut}")
        if self.polarity not in (1, -1):
            raise InvalidParameterError(f"Polarität muss ±1 sein: {self.polarity}")

    @property
    def dimension(self) -> int:
        return 1

    def predict(self, x: Point) -> int:
        return self.polarity if float(x) >= self.cut else -self.polarity

    def predict_many(self, points: np.ndarray) -> np.ndarray:
        above = np.asarray(points, dtype=float).reshape(-1) >= self.cut
        return np.where(above, self.polarity, -self.polarity)

    def complement(self) -> "ThresholdHypothesis":
        return ThresholdHypothesis(self.cut, -self.polarity)


def as_points(points: Sequence[Point], dimension: int) -> np.ndarray:
    """Stapelt Punkte zu (n,) für d=1 bzw. (n, d) sonst."""
    arr = np.asarray(points, dtype=float)
    if dimension == 1:
        return arr.reshape(-1)
    return arr.reshape(-1, dimension)
