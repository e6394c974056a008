"""
Fenster-ERM unter Konzeptdrift

Exakte ERM-Orakel für Schwellen und 2D-Halbräume, der adaptive
Fensterlerner (größtes Fenster, dessen Fehlerquoten unter K bleiben) und
der nicht-adaptive Vergleichslerner mit bekannter Driftfolge.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from shared.models.hypotheses import (
    HalfspaceHypothesis,
    Hypothesis,
    Point,
    ThresholdHypothesis,
    UnitVector,
)
from shared.models.trace import RunTrace
from shared.utils.drift.environments import DriftEnvironment, DriftSchedule
from shared.utils.drift.geometry import FiniteClass, log_cap, log_cap_array
from shared.utils.errors import InvalidParameterError, InvalidStateError

logger = structlog.get_logger()


class History:
    """Chronologische Beobachtungen (X_i, Y_i), i < T, mit Suffix-Fenstern"""

    INITIAL_CAPACITY = 256

    def __init__(self, dimension: int):
        if dimension < 1:
            raise InvalidParameterError(f"Dimension muss >= 1 sein: {dimension}")
        self.dimension = dimension
        shape = (self.INITIAL_CAPACITY,) if dimension == 1 else (self.INITIAL_CAPACITY, dimension)
        self._points = np.empty(shape)
        self._labels = np.empty(self.INITIAL_CAPACITY, dtype=np.int8)
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def append(self, x: Point, y: int) -> None:
        if self._size == self._labels.shape[0]:
            self._points = np.concatenate([self._points, np.empty_like(self._points)])
            self._labels = np.concatenate([self._labels, np.empty_like(self._labels)])
        self._points[self._size] = x
        self._labels[self._size] = y
        self._size += 1

    def _check(self, m: int) -> None:
        if not 1 <= m <= self._size:
            raise InvalidParameterError(f"Fensterlänge {m} außerhalb 1..{self._size}")

    def window(self, m: int) -> Tuple[np.ndarray, np.ndarray]:
        """Die letzten m Beobachtungen in chronologischer Reihenfolge."""
        self._check(m)
        start = self._size - m
        return self._points[start : self._size], self._labels[start : self._size]

    def recent(self, m: int) -> Tuple[np.ndarray, np.ndarray]:
        """Die letzten m Beobachtungen, jüngste zuerst."""
        points, labels = self.window(m)
        return points[::-1], labels[::-1]


class ErmOracle(ABC):
    """
    Exaktes ERM-Orakel einer Klasse

    `candidates` liefert zu einer Stichprobe eine kanonisch geordnete endliche
    Klasse, die jedes auf der Stichprobe erreichbare Fehlermuster realisiert.
    """

    dimension: int = 1
    CHUNK_ELEMENTS = 2_000_000

    @abstractmethod
    def candidates(self, points: np.ndarray) -> FiniteClass:
        ...

    @abstractmethod
    def canonical_first(self) -> Hypothesis:
        ...

    def count_mistakes(
        self, cands: FiniteClass, points: np.ndarray, labels: np.ndarray
    ) -> np.ndarray:
        n = len(cands)
        step = max(1, self.CHUNK_ELEMENTS // max(1, len(labels)))
        counts = np.empty(n, dtype=np.int64)
        for start in range(0, n, step):
            rows = np.arange(start, min(n, start + step))
            preds = cands.predict_matrix(points, rows=rows)
            counts[rows] = (preds != labels[None, :]).sum(axis=1)
        return counts

    def fit(self, points: np.ndarray, labels: np.ndarray) -> Tuple[Hypothesis, int]:
        """Minimiert die Stichprobenfehler; Tiebreak über die kanonische Ordnung."""
        labels = np.asarray(labels).reshape(-1)
        if labels.size == 0:
            raise InvalidParameterError("ERM auf leerem Fenster")
        cands = self.candidates(points)
        counts = self.count_mistakes(cands, points, labels)
        best = int(np.argmin(counts))
        return cands[best], int(counts[best])


class ThresholdErm(ErmOracle):
    """Schwellen: Kandidaten {0} ∪ Stichprobenpunkte, je Polarität +1 vor −1"""

    dimension = 1

    def candidates(self, points: np.ndarray) -> FiniteClass:
        xs = np.asarray(points, dtype=float).reshape(-1)
        cuts = np.unique(np.clip(np.concatenate([[0.0], xs]), 0.0, 1.0))
        return FiniteClass.from_thresholds(np.repeat(cuts, 2), np.tile([1, -1], cuts.size))

    def canonical_first(self) -> ThresholdHypothesis:
        return ThresholdHypothesis(0.0, 1)

    def count_mistakes(
        self, cands: FiniteClass, points: np.ndarray, labels: np.ndarray
    ) -> np.ndarray:
        """Fehlerzahlen aller Schwellen über sortierte Punkte in O((n + |C|) log n)."""
        if cands.cuts is None or cands.polarities is None:
            return super().count_mistakes(cands, points, labels)
        xs = np.asarray(points, dtype=float).reshape(-1)
        labels = np.asarray(labels).reshape(-1)
        positive = np.sort(xs[labels == 1])
        negative = np.sort(xs[labels != 1])
        # Polarität +1 sagt +1 genau für x >= c
        plus = np.searchsorted(positive, cands.cuts, side="left") + (
            negative.size - np.searchsorted(negative, cands.cuts, side="left")
        )
        return np.where(cands.polarities == 1, plus, labels.size - plus).astype(np.int64)


class Halfspace2DErm(ErmOracle):
    """2D-Halbräume: ein Kandidat pro Bogen zwischen benachbarten Grenzwinkeln"""

    dimension = 2

    def candidates(self, points: np.ndarray) -> FiniteClass:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        bounds = np.unique(np.mod(np.concatenate([theta + np.pi / 2, theta - np.pi / 2]), 2 * np.pi))
        following = np.roll(bounds, -1)
        following[-1] += 2 * np.pi
        mids = np.unique(np.mod((bounds + following) / 2.0, 2 * np.pi))
        return FiniteClass.from_weights(np.column_stack([np.cos(mids), np.sin(mids)]))

    def canonical_first(self) -> HalfspaceHypothesis:
        return HalfspaceHypothesis(UnitVector.basis(2, 0))

    def count_mistakes(
        self, cands: FiniteClass, points: np.ndarray, labels: np.ndarray
    ) -> np.ndarray:
        """
        Fehlerzahlen aller 2D-Halbräume über sortierte Polarwinkel

        w sagt +1 genau auf dem abgeschlossenen Halbkreis [φ − π/2, φ + π/2].
        Die Kandidaten aus `candidates` liegen in Bogenmitten, also nie auf
        einer Grenze.
        """
        weights = cands.weights
        if weights is None or weights.shape[1] != 2:
            return super().count_mistakes(cands, points, labels)
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        labels = np.asarray(labels).reshape(-1)
        theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
        positive = np.sort(theta[labels == 1])
        negative = np.sort(theta[labels != 1])
        lower = np.mod(np.arctan2(weights[:, 1], weights[:, 0]) - np.pi / 2, 2 * np.pi)
        inside_pos = _half_circle_counts(positive, lower)
        inside_neg = _half_circle_counts(negative, lower)
        return (positive.size - inside_pos + inside_neg).astype(np.int64)


def _half_circle_counts(angles: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """Anzahl sortierter Winkel aus [0, 2π) im Bogen [lower, lower + π] (modulo 2π)."""
    upper = lower + np.pi
    counts = np.searchsorted(angles, np.minimum(upper, 2 * np.pi), side="right")
    counts -= np.searchsorted(angles, lower, side="left")
    wrapped = upper > 2 * np.pi
    counts[wrapped] += np.searchsorted(angles, upper[wrapped] - 2 * np.pi, side="right")
    return counts


def erm_threshold(points: np.ndarray, labels: np.ndarray) -> ThresholdHypothesis:
    hypothesis, _ = ThresholdErm().fit(np.asarray(points, dtype=float), np.asarray(labels))
    assert isinstance(hypothesis, ThresholdHypothesis)
    return hypothesis


def erm_halfspace_2d(points: np.ndarray, labels: np.ndarray) -> HalfspaceHypothesis:
    hypothesis, _ = Halfspace2DErm().fit(np.asarray(points, dtype=float), np.asarray(labels))
    assert isinstance(hypothesis, HalfspaceHypothesis)
    return hypothesis


class ConfidenceSchedule(str, Enum):
    """Konfidenz δ fest oder δ_T = 1/T"""
    FIXED = "fixed"
    PER_ROUND = "per_round"


class AdaptiveConfig(BaseModel):
    """Parameter des adaptiven Fensterlerners"""
    model_config = ConfigDict(frozen=True)

    K: float = Field(8.0, gt=0, description="Schranke für die Fehlerquote")
    confidence: float = Field(0.1, gt=0, le=1, description="Konfidenz δ")
    d: int = Field(1, ge=1, description="VC-Dimension der Klasse")
    confidence_schedule: ConfidenceSchedule = ConfidenceSchedule.FIXED
    max_window: Optional[int] = Field(None, ge=1, description="Obergrenze für m")

    @staticmethod
    def theoretical_K(c: float) -> float:
        """K = 145·c² mit der universellen Konstante c der Uniform-Konvergenz."""
        return 145.0 * c * c

    def confidence_at(self, T: int) -> float:
        if self.confidence_schedule == ConfidenceSchedule.PER_ROUND:
            return 1.0 / T
        return self.confidence

    def denominators(self, n: int, T: int) -> np.ndarray:
        """d·Log(m′/d) + Log(1/δ) für m′ = 1..n."""
        m = np.arange(1, n + 1, dtype=float)
        return self.d * log_cap_array(m / self.d) + log_cap(1.0 / self.confidence_at(T))


def window_score(
    history: History, h: Hypothesis, m: int, cfg: AdaptiveConfig
) -> float:
    """max über m′ <= m der Fehlerquote von h auf den letzten m′ Beobachtungen."""
    if not 1 <= m <= len(history):
        raise InvalidParameterError(f"Fensterlänge {m} außerhalb 1..{len(history)}")
    points, labels = history.recent(m)
    wrong = np.cumsum(h.predict_many(points) != labels)
    ratios = wrong / cfg.denominators(m, len(history) + 1)
    return float(ratios.max())


@dataclass(frozen=True)
class WindowFit:
    """Ergebnis von adaptive_fit"""
    window: int
    hypothesis: Hypothesis
    score: float


class _WindowSearch:
    """Vorwärtsläufe über m′ für ausgewählte Kandidaten einer Klasse"""

    INITIAL_BLOCK = 64
    MAX_BLOCK = 4096
    INITIAL_BATCH = 4

    def __init__(self, points: np.ndarray, labels: np.ndarray, denom: np.ndarray, K: float):
        self.points = points
        self.labels = labels
        self.denom = denom
        self.K = K

    def spans(self, cands: FiniteClass, rows: np.ndarray, limit: int) -> np.ndarray:
        """Größtes m <= limit je Kandidat, bis zu dem alle Quoten m′ <= m unter K liegen."""
        spans = np.full(rows.size, limit, dtype=np.int64)
        active = np.arange(rows.size)
        counts = np.zeros(rows.size, dtype=np.int64)
        pos = 0
        block = self.INITIAL_BLOCK
        while pos < limit and active.size > 0:
            width = max(1, min(block, ErmOracle.CHUNK_ELEMENTS // active.size))
            end = min(limit, pos + width)
            preds = cands.predict_matrix(self.points[pos:end], rows=rows[active])
            cum = counts[active][:, None] + np.cumsum(
                preds != self.labels[pos:end][None, :], axis=1
            )
            ok = cum / self.denom[pos:end][None, :] < self.K
            lead = np.logical_and.accumulate(ok, axis=1).sum(axis=1)
            full = lead == end - pos
            spans[active[~full]] = pos + lead[~full]
            counts[active[full]] = cum[full, -1]
            active = active[full]
            pos = end
            block = min(2 * block, self.MAX_BLOCK)
        return spans

    def scores(self, cands: FiniteClass, rows: np.ndarray, length: int) -> np.ndarray:
        """max über m′ <= length der Fehlerquoten je Kandidat."""
        step = max(1, ErmOracle.CHUNK_ELEMENTS // length)
        out = np.empty(rows.size)
        for start in range(0, rows.size, step):
            chunk = rows[start : start + step]
            preds = cands.predict_matrix(self.points[:length], rows=chunk)
            wrong = np.cumsum(preds != self.labels[:length][None, :], axis=1)
            out[start : start + chunk.size] = (wrong / self.denom[:length][None, :]).max(axis=1)
        return out


def adaptive_fit(
    history: History,
    cfg: AdaptiveConfig,
    erm: ErmOracle,
    warm_start: Optional[Hypothesis] = None,
) -> WindowFit:
    """
    Wählt das größte Fenster m̂, auf dem eine Hypothese alle Quoten < K hält

    Der Warmstart liefert eine untere Schranke für m̂. Jeder Kandidat, der sie
    übertrifft, muss schon bei Länge m̂+1 unter K liegen; nur diese Kandidaten
    werden vollständig nachgerechnet, bis sich m̂ nicht mehr verbessert.

    Args:
        history: Bisherige Beobachtungen (T−1 Stück)
        cfg: Parameter K, δ, d
        erm: Exaktes ERM-Orakel der Klasse
        warm_start: Hypothese der Vorrunde; ändert nur die Laufzeit

    Returns:
        WindowFit mit m̂, ĥ und dem Quotenmaximum von ĥ

    Raises:
        InvalidParameterError: Bei leerer Historie
        InvalidStateError: Wenn ĥ die Schranke K auf m̂ verletzt
    """
    n = len(history)
    if n == 0:
        raise InvalidParameterError("adaptive_fit braucht mindestens eine Beobachtung")
    available = n if cfg.max_window is None else min(n, cfg.max_window)
    points, labels = history.recent(available)
    denom = cfg.denominators(available, n + 1)
    search = _WindowSearch(points, labels, denom, cfg.K)

    m_hat = 0
    if warm_start is not None:
        warm = FiniteClass([warm_start])
        m_hat = int(search.spans(warm, np.zeros(1, dtype=np.int64), available)[0])
    # Kandidaten realisieren alle Muster auf points[:limit]; Spannen >= limit verdoppeln limit
    limit = min(available, max(_WindowSearch.INITIAL_BLOCK, 2 * (m_hat + 1)))
    cands = erm.candidates(points[:limit])
    while m_hat < available:
        if m_hat >= limit:
            limit = min(available, max(2 * limit, 2 * (m_hat + 1)))
            cands = erm.candidates(points[:limit])
        m = m_hat + 1
        counts = erm.count_mistakes(cands, points[:m], labels[:m])
        passing = np.flatnonzero(counts / denom[m - 1] < cfg.K)
        if passing.size == 0:
            break
        longest = int(search.spans(cands, passing, limit).max())
        if longest <= m_hat:
            break
        m_hat = longest

    if m_hat == 0:
        hypothesis, _ = erm.fit(points[:1], labels[:1])
        return WindowFit(1, hypothesis, float("inf"))

    # ĥ in kanonischer Ordnung der vom Fenster m̂ induzierten Kandidaten
    cands = erm.candidates(points[:m_hat])
    bounds = erm.count_mistakes(cands, points[:m_hat], labels[:m_hat]) / denom[m_hat - 1]
    order = np.argsort(bounds, kind="stable")
    seen = np.empty(0, dtype=np.int64)
    seen_scores = np.empty(0)
    batch = _WindowSearch.INITIAL_BATCH
    pos = 0
    while pos < order.size and (seen.size == 0 or bounds[order[pos]] <= seen_scores.min()):
        rows = order[pos : pos + batch]
        seen = np.concatenate([seen, rows])
        seen_scores = np.concatenate([seen_scores, search.scores(cands, rows, m_hat)])
        pos += rows.size
        batch *= 2
    best = int(np.lexsort((seen, seen_scores))[0])
    score = float(seen_scores[best])
    if not score < cfg.K:
        raise InvalidStateError(f"Quote {score} >= K auf Fenster {m_hat}")
    return WindowFit(m_hat, cands[int(seen[best])], score)


def nonadaptive_window(schedule: DriftSchedule, t: int, d: int) -> int:
    """
    argmin über m in 1..t−1 von (1/m)·Σ_{i=t−m}^{t−1} Σ_{j=i+1}^{t} Δ_j + d·Log(m/d)/m

    Ties gehen an das kleinere m.
    """
    if t < 2:
        raise InvalidParameterError(f"Fenster erst ab Runde 2 definiert: {t}")
    if d < 1:
        raise InvalidParameterError(f"VC-Dimension muss >= 1 sein: {d}")
    prefix = np.cumsum(schedule.deltas(t))
    prefix_of_prefix = np.cumsum(prefix)
    m = np.arange(1, t)
    lower = t - m - 1
    window_sum = prefix_of_prefix[t - 1] - prefix_of_prefix[lower]
    drift = (m * prefix[t] - window_sum) / m
    objective = drift + d * log_cap_array(m / d) / m
    return int(np.argmin(objective)) + 1


class WindowLearner(ABC):
    """Passiver Lerner, der pro Runde auf einem Suffix der Historie ERM betreibt"""

    KIND = "window"

    def __init__(self, erm: ErmOracle):
        self.erm = erm
        self.logger = logger.bind(learner=self.KIND)

    def initial_hypothesis(self) -> Hypothesis:
        return self.erm.canonical_first()

    @abstractmethod
    def fit(self, history: History) -> Hypothesis:
        ...


class AdaptiveWindowLearner(WindowLearner):
    KIND = "adaptive"

    def __init__(self, cfg: AdaptiveConfig, erm: ErmOracle):
        super().__init__(erm)
        self.cfg = cfg
        self.last_window: Optional[int] = None
        self.last_hypothesis: Hypothesis = erm.canonical_first()

    def fit(self, history: History) -> Hypothesis:
        result = adaptive_fit(history, self.cfg, self.erm, warm_start=self.last_hypothesis)
        self.last_window = result.window
        self.last_hypothesis = result.hypothesis
        return result.hypothesis


class NonadaptiveWindowLearner(WindowLearner):
    KIND = "nonadaptive"

    def __init__(self, schedule: DriftSchedule, erm: ErmOracle, d: int):
        super().__init__(erm)
        self.schedule = schedule
        self.d = d

    def fit(self, history: History) -> Hypothesis:
        m = nonadaptive_window(self.schedule, len(history) + 1, self.d)
        points, labels = history.window(m)
        hypothesis, _ = self.erm.fit(points, labels)
        return hypothesis


def run_passive_learner(env: DriftEnvironment, T: int, learner: WindowLearner) -> RunTrace:
    """Vorhersage mit ĥ_t = fit(Historie), danach Aufnahme von (X_t, Y_t); alle Labels sichtbar."""
    if T < 1:
        raise InvalidParameterError(f"Horizont muss >= 1 sein: {T}")
    if env.dimension != learner.erm.dimension:
        raise InvalidParameterError(
            f"Umgebung (d={env.dimension}) passt nicht zum ERM-Orakel (d={learner.erm.dimension})"
        )
    history = History(env.dimension)
    trace = RunTrace(horizon=T)
    hypothesis = learner.initial_hypothesis()
    for t in range(1, T + 1):
        if t > 1:
            hypothesis = learner.fit(history)
        obs = env.advance()
        trace.record(hypothesis.predict(obs.x) != obs.y, True, obs.error_oracle(hypothesis))
        history.append(obs.x, obs.y)
    learner.logger.info(
        "passive_run_finished",
        horizon=T,
        mistakes=trace.total_mistakes,
        mean_error=round(trace.mean_error(), 6),
    )
    return trace
