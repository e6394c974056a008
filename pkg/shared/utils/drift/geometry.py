"""
Geometrie der Gleichverteilung auf der Einheitssphäre

Log-Konvention, Hinge-Verlust, Sphären-Sampling, exakte Disagreement-Maße
und die endliche Hypothesenklasse für Verfahren mit Aufzählung.
"""

from typing import Callable, Iterator, List, Optional, Sequence, Union

import numpy as np
from scipy.special import betainc

from shared.models.hypotheses import (
    HalfspaceHypothesis,
    Hypothesis,
    ThresholdHypothesis,
    UnitVector,
)
from shared.utils.errors import InvalidParameterError

Metric = Callable[[Hypothesis, Hypothesis], float]


def log_cap(x: float) -> float:
    """Log(x) = ln(max{x, e}); stets >= 1."""
    return float(np.log(max(x, np.e)))


def log_cap_array(x: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(x, np.e))


def hinge(x: Union[float, np.ndarray], tau: float) -> Union[float, np.ndarray]:
    """ℓ_τ(x) = max{0, 1 − x/τ}"""
    if tau <= 0:
        raise InvalidParameterError(f"Hinge-Margin τ muss positiv sein: {tau}")
    loss = np.maximum(0.0, 1.0 - np.asarray(x, dtype=float) / tau)
    return float(loss) if np.ndim(loss) == 0 else loss


def sample_unit_sphere(d: int, rng: np.random.Generator) -> UnitVector:
    """Normalverteilter Vektor, renormiert; für d=1 gleichverteilt auf {−1,+1}."""
    if d < 1:
        raise InvalidParameterError(f"Dimension muss >= 1 sein: {d}")
    while True:
        g = rng.standard_normal(d)
        if np.any(g != 0.0):
            return UnitVector(g)


def sample_sphere_points(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n Punkte gleichverteilt auf der Sphäre als (n, d)-Matrix."""
    if d < 1:
        raise InvalidParameterError(f"Dimension muss >= 1 sein: {d}")
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return g / norms


def halfspace_disagreement(u: UnitVector, v: UnitVector) -> float:
    """P(h_u ≠ h_v) = arccos(u·v)/π unter der Gleichverteilung."""
    if u.dimension != v.dimension:
        raise InvalidParameterError(
            f"Dimensionen passen nicht: {u.dimension} != {v.dimension}"
        )
    dot = float(np.clip(np.dot(u.coords, v.coords), -1.0, 1.0))
    return float(np.arccos(dot) / np.pi)


def threshold_disagreement(h: ThresholdHypothesis, g: ThresholdHypothesis) -> float:
    """Exaktes Disagreement zweier Schwellen unter Uniform[0,1]."""
    gap = abs(h.cut - g.cut)
    return gap if h.polarity == g.polarity else 1.0 - gap


def disagreement(h: Hypothesis, g: Hypothesis) -> float:
    """Exakte Disagreement-Masse für gleichartige Hypothesen."""
    if isinstance(h, HalfspaceHypothesis) and isinstance(g, HalfspaceHypothesis):
        return halfspace_disagreement(h.weight, g.weight)
    if isinstance(h, ThresholdHypothesis) and isinstance(g, ThresholdHypothesis):
        return threshold_disagreement(h, g)
    raise InvalidParameterError(
        f"Kein exaktes Maß für {type(h).__name__} / {type(g).__name__}"
    )


def band_probability(d: int, gamma: float) -> float:
    """
    Exakte Wahrscheinlichkeit P(|w·X| <= γ) für X gleichverteilt auf S^{d−1}

    Regularisierte unvollständige Betafunktion I_{min(γ²,1)}(1/2, (d−1)/2).

    Args:
        d: Dimension (>= 2)
        gamma: Bandbreite (>= 0)

    Returns:
        Bandmasse in [0, 1]

    Raises:
        InvalidParameterError: Bei d < 2 oder negativem γ
    """
    if d < 2:
        raise InvalidParameterError(f"Bandwahrscheinlichkeit erst ab d=2: {d}")
    if gamma < 0:
        raise InvalidParameterError(f"Bandbreite muss >= 0 sein: {gamma}")
    if gamma >= 1.0:
        return 1.0
    return float(betainc(0.5, (d - 1) / 2.0, gamma * gamma))


def empirical_disagreement(h: Hypothesis, g: Hypothesis, sample: np.ndarray) -> float:
    """Anteil der Stichprobenpunkte, auf denen h und g verschieden klassifizieren."""
    points = np.asarray(sample, dtype=float)
    if points.shape[0] == 0:
        raise InvalidParameterError("Leere Stichprobe")
    return float(np.mean(h.predict_many(points) != g.predict_many(points)))


class FiniteClass:
    """
    Endliche, geordnete Hypothesenklasse

    Halbraum- und Schwellenklassen werden intern als Arrays gehalten, damit
    Vorhersagen für viele Hypothesen vektorisiert laufen. Die Reihenfolge ist
    die kanonische Ordnung für alle argmin-Tiebreaks.
    """

    KIND_HALFSPACE = "halfspace"
    KIND_THRESHOLD = "threshold"
    KIND_GENERIC = "generic"

    def __init__(
        self,
        hypotheses: Sequence[Hypothesis],
        metric: Optional[Metric] = None,
    ):
        if len(hypotheses) == 0:
            raise InvalidParameterError("Hypothesenklasse darf nicht leer sein")
        self._hypotheses: Optional[List[Hypothesis]] = list(hypotheses)
        self.metric: Metric = metric or disagreement
        self._weights: Optional[np.ndarray] = None
        self._cuts: Optional[np.ndarray] = None
        self._polarities: Optional[np.ndarray] = None

        if all(isinstance(h, HalfspaceHypothesis) for h in hypotheses):
            self.kind = self.KIND_HALFSPACE
            self._weights = np.vstack([h.weight.coords for h in hypotheses])
        elif all(isinstance(h, ThresholdHypothesis) for h in hypotheses):
            self.kind = self.KIND_THRESHOLD
            self._cuts = np.array([h.cut for h in hypotheses], dtype=float)
            self._polarities = np.array([h.polarity for h in hypotheses], dtype=int)
        else:
            self.kind = self.KIND_GENERIC

    @classmethod
    def from_weights(cls, weights: np.ndarray) -> "FiniteClass":
        """Halbraumklasse direkt aus einer (n, d)-Gewichtsmatrix (Zeilen normiert)."""
        weights = np.atleast_2d(np.asarray(weights, dtype=float))
        if weights.shape[0] == 0:
            raise InvalidParameterError("Hypothesenklasse darf nicht leer sein")
        obj = cls.__new__(cls)
        obj._hypotheses = None
        obj.metric = disagreement
        obj.kind = cls.KIND_HALFSPACE
        obj._weights = weights / np.linalg.norm(weights, axis=1, keepdims=True)
        obj._cuts = None
        obj._polarities = None
        return obj

    @classmethod
    def from_thresholds(cls, cuts: np.ndarray, polarities: np.ndarray) -> "FiniteClass":
        cuts = np.asarray(cuts, dtype=float).reshape(-1)
        polarities = np.asarray(polarities, dtype=int).reshape(-1)
        if cuts.size == 0 or cuts.shape != polarities.shape:
            raise InvalidParameterError("Schwellen und Polaritäten inkonsistent")
        obj = cls.__new__(cls)
        obj._hypotheses = None
        obj.metric = disagreement
        obj.kind = cls.KIND_THRESHOLD
        obj._weights = None
        obj._cuts = cuts
        obj._polarities = polarities
        return obj

    @classmethod
    def angle_grid(cls, n: int) -> "FiniteClass":
        """2D-Halbräume in den Winkeln 2πi/n, i = 0..n−1."""
        if n < 1:
            raise InvalidParameterError(f"Gittergröße muss >= 1 sein: {n}")
        angles = 2 * np.pi * np.arange(n) / n
        return cls.from_weights(np.column_stack([np.cos(angles), np.sin(angles)]))

    @classmethod
    def threshold_grid(cls, n: int) -> "FiniteClass":
        """n äquidistante Schwellen in [0,1], je Polarität +1 vor −1."""
        if n < 1:
            raise InvalidParameterError(f"Gittergröße muss >= 1 sein: {n}")
        cuts = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
        return cls.from_thresholds(np.repeat(cuts, 2), np.tile([1, -1], n))

    def __len__(self) -> int:
        if self._weights is not None:
            return int(self._weights.shape[0])
        if self._cuts is not None:
            return int(self._cuts.shape[0])
        return len(self._hypotheses or [])

    def __getitem__(self, index: int) -> Hypothesis:
        if self._hypotheses is not None:
            return self._hypotheses[index]
        if self._weights is not None:
            return HalfspaceHypothesis(UnitVector(self._weights[index]))
        assert self._cuts is not None and self._polarities is not None
        return ThresholdHypothesis(
            float(self._cuts[index]), int(self._polarities[index])
        )

    def __iter__(self) -> Iterator[Hypothesis]:
        for i in range(len(self)):
            yield self[i]

    @property
    def weights(self) -> Optional[np.ndarray]:
        """(n, d)-Gewichtsmatrix einer Halbraumklasse, sonst None."""
        return self._weights

    @property
    def cuts(self) -> Optional[np.ndarray]:
        return self._cuts

    @property
    def polarities(self) -> Optional[np.ndarray]:
        return self._polarities

    @property
    def dimension(self) -> int:
        if self._weights is not None:
            return int(self._weights.shape[1])
        if self._cuts is not None:
            return 1
        return int(getattr(self[0], "dimension", 1))

    def predict_matrix(
        self, points: np.ndarray, rows: Optional[np.ndarray] = None
    ) -> np.ndarray:
        """
        Vorhersagen aller (bzw. der gewählten) Hypothesen

        Args:
            points: (n,) für Schwellen, (n, d) für Halbräume
            rows: Optionale Indexmenge der Hypothesen

        Returns:
            int8-Matrix der Form (len(rows), n) mit Einträgen ±1
        """
        if self._weights is not None:
            weights = self._weights if rows is None else self._weights[rows]
            margins = weights @ np.atleast_2d(np.asarray(points, dtype=float)).T
            return np.where(margins >= 0.0, 1, -1).astype(np.int8)
        if self._cuts is not None and self._polarities is not None:
            cuts = self._cuts if rows is None else self._cuts[rows]
            pols = self._polarities if rows is None else self._polarities[rows]
            xs = np.asarray(points, dtype=float).reshape(-1)
            above = xs[None, :] >= cuts[:, None]
            return np.where(above, pols[:, None], -pols[:, None]).astype(np.int8)
        indices = range(len(self)) if rows is None else rows
        return np.vstack(
            [self[int(i)].predict_many(points) for i in indices]
        ).astype(np.int8)

    def distances_from(self, h: Hypothesis) -> np.ndarray:
        """Metrik-Abstand von h zu jeder Hypothese der Klasse."""
        if self._weights is not None and isinstance(h, HalfspaceHypothesis):
            if h.dimension != self._weights.shape[1]:
                raise InvalidParameterError("Dimension der Hypothese passt nicht")
            dots = np.clip(self._weights @ h.weight.coords, -1.0, 1.0)
            return np.arccos(dots) / np.pi
        if self._cuts is not None and isinstance(h, ThresholdHypothesis):
            assert self._polarities is not None
            gap = np.abs(self._cuts - h.cut)
            return np.where(self._polarities == h.polarity, gap, 1.0 - gap)
        return np.array([self.metric(h, g) for g in self])

    def nearest_index(self, h: Hypothesis) -> int:
        return int(np.argmin(self.distances_from(h)))

    def first(self) -> Hypothesis:
        return self[0]
