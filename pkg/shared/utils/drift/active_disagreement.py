"""
Disagreement-basiertes aktives Lernen unter Drift

Batches der Länge M mit verdoppelnden Epochen; Labels werden nur im
Disagreement-Bereich des Versionsraums angefragt, am Epochenende werden
Hypothesen mit zu vielen Zusatzfehlern entfernt. Dazu ein Monte-Carlo-
Schätzer für den Disagreement-Koeffizienten.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator

from shared.models.hypotheses import Hypothesis, Point
from shared.models.trace import RunTrace
from shared.utils.drift.environments import DriftEnvironment
from shared.utils.drift.geometry import FiniteClass, log_cap, sample_sphere_points
from shared.utils.errors import InvalidParameterError, InvalidStateError

logger = structlog.get_logger()

PointSampler = Callable[[int, np.random.Generator], np.ndarray]
EpochHook = Callable[[int, int, "VersionSpace"], None]


def ceil_pow2(x: float) -> int:
    """⌈x⌉₂ = 2^⌈log₂ x⌉"""
    if x <= 1.0:
        return 1
    return 2 ** math.ceil(math.log2(x))


def threshold_tk(k: int, d: int, drift: float) -> float:
    """T̂_k = log₂(1/√(dΔ)) + 2^{2k+2}·e·Δ"""
    if k < 0:
        raise InvalidParameterError(f"Epochenindex muss >= 0 sein: {k}")
    product = d * drift
    if not 0.0 < product <= 1.0:
        raise InvalidParameterError(f"dΔ muss in (0,1] liegen: {product}")
    return math.log2(1.0 / math.sqrt(product)) + 2.0 ** (2 * k + 2) * math.e * drift


def drift_error_scale(d: int, drift: float) -> float:
    """ε_Δ = √(dΔ)·Log(1/(dΔ))"""
    product = d * drift
    if not 0.0 < product <= 1.0:
        raise InvalidParameterError(f"dΔ muss in (0,1] liegen: {product}")
    return math.sqrt(product) * log_cap(1.0 / product)


class ActiveConfig(BaseModel):
    """Parameter des aktiven Lerners"""
    model_config = ConfigDict(frozen=True)

    d: int = Field(2, ge=1)
    drift: float = Field(..., gt=0, le=1, description="Driftrate Δ")
    c1: float = Field(32.0, gt=0, description="Batch-Konstante")
    grid_size: int = Field(1024, ge=1, description="Winkelgitter für d=2")

    @model_validator(mode="after")
    def _check_product(self) -> "ActiveConfig":
        if self.d * self.drift > 1.0:
            raise ValueError(f"dΔ muss <= 1 sein: {self.d * self.drift}")
        return self

    @property
    def M(self) -> int:
        return max(4, ceil_pow2(self.c1 * math.sqrt(self.d / self.drift)))

    @property
    def epochs(self) -> int:
        return int(math.log2(self.M))

    def threshold(self, k: int) -> float:
        return threshold_tk(k, self.d, self.drift)


class VersionSpace:
    """Indexmenge überlebender Hypothesen einer FiniteClass"""

    CHUNK = 4096

    def __init__(self, hclass: FiniteClass, alive: Optional[np.ndarray] = None):
        self.hclass = hclass
        self.alive = np.arange(len(hclass)) if alive is None else np.asarray(alive, dtype=int)

    def __len__(self) -> int:
        return int(self.alive.size)

    def __contains__(self, index: object) -> bool:
        return bool(np.any(self.alive == index))

    def hypotheses(self) -> List[Hypothesis]:
        return [self.hclass[int(i)] for i in self.alive]


def dis_membership(V: VersionSpace, x: Point) -> bool:
    """Wahr genau dann, wenn zwei lebende Hypothesen x verschieden klassifizieren."""
    if len(V) == 0:
        raise InvalidStateError("Leerer Versionsraum")
    point = np.asarray(x, dtype=float)
    reference: Optional[int] = None
    for start in range(0, len(V), VersionSpace.CHUNK):
        rows = V.alive[start : start + VersionSpace.CHUNK]
        preds = V.hclass.predict_matrix(point, rows=rows)[:, 0]
        if reference is None:
            reference = int(preds[0])
        if np.any(preds != reference):
            return True
    return False


def prune_version_space(
    V: VersionSpace, points: np.ndarray, labels: np.ndarray, threshold: float
) -> Tuple[VersionSpace, int]:
    """
    Behält Hypothesen mit höchstens `threshold` Zusatzfehlern gegenüber dem Besten

    Returns:
        (neuer Versionsraum, Klassenindex der empirisch besten Hypothese)
    """
    if len(V) == 0:
        raise InvalidStateError("Leerer Versionsraum")
    labels = np.asarray(labels).reshape(-1)
    if labels.size == 0:
        return V, int(V.alive[0])
    preds = V.hclass.predict_matrix(points, rows=V.alive)
    counts = (preds != labels[None, :]).sum(axis=1)
    best = int(np.argmin(counts))
    keep = counts - counts[best] <= threshold
    return VersionSpace(V.hclass, V.alive[keep]), int(V.alive[best])


def run_drifting_active(
    env: DriftEnvironment,
    T: int,
    cfg: ActiveConfig,
    hclass: FiniteClass,
    on_epoch: Optional[EpochHook] = None,
) -> RunTrace:
    """
    Aktiver Lerner: pro Batch V₀ = C, Runde 1 mit ĥ₀ = C[0], Epoche k mit 2^k Runden

    `on_epoch(batch, k, V_{k+1})` wird nach jedem Pruning aufgerufen.

    Raises:
        InvalidParameterError: Bei T < 1 oder unpassender Klassendimension
    """
    if T < 1:
        raise InvalidParameterError(f"Horizont muss >= 1 sein: {T}")
    if hclass.dimension != env.dimension:
        raise InvalidParameterError(
            f"Klasse (d={hclass.dimension}) passt nicht zur Umgebung (d={env.dimension})"
        )
    run_logger = logger.bind(learner="drifting_active", seed=env.seed, M=cfg.M)
    trace = RunTrace(horizon=T)
    batches = 0
    while not trace.is_full:
        space = VersionSpace(hclass)
        hypothesis = hclass[0]
        obs = env.advance()
        trace.record(hypothesis.predict(obs.x) != obs.y, False, obs.error_oracle(hypothesis))
        for k in range(cfg.epochs):
            q_points: List[Point] = []
            q_labels: List[int] = []
            for _ in range(2 ** k):
                if trace.is_full:
                    break
                obs = env.advance()
                queried = dis_membership(space, obs.x)
                trace.record(
                    hypothesis.predict(obs.x) != obs.y, queried, obs.error_oracle(hypothesis)
                )
                if queried:
                    q_points.append(obs.x)
                    q_labels.append(obs.y)
            if trace.is_full:
                break
            space, best = prune_version_space(
                space, np.asarray(q_points, dtype=float), np.asarray(q_labels), cfg.threshold(k)
            )
            hypothesis = hclass[best]
            if on_epoch is not None:
                on_epoch(batches, k, space)
            run_logger.debug("epoch_finished", epoch=k, queried=len(q_labels), alive=len(space))
        batches += 1
    run_logger.info(
        "drifting_active_finished",
        horizon=T,
        batches=batches,
        mistakes=trace.total_mistakes,
        queries=trace.total_queries,
    )
    return trace


@dataclass
class CoefficientEstimate:
    """θ̂ mit Monte-Carlo-Halbbreite und den Einzelquoten je Radius"""
    theta: float
    half_width: float
    ratios: Dict[float, float] = field(default_factory=dict)
    ball_sizes: Dict[float, int] = field(default_factory=dict)


def default_sampler(hclass: FiniteClass) -> PointSampler:
    if hclass.kind == FiniteClass.KIND_THRESHOLD:
        return lambda n, rng: rng.random(n)
    d = hclass.dimension
    return lambda n, rng: sample_sphere_points(n, d, rng)


def dis_mass(hclass: FiniteClass, rows: np.ndarray, points: np.ndarray) -> float:
    """Anteil der Punkte im Disagreement-Bereich der Hypothesen `rows`."""
    if rows.size <= 1:
        return 0.0
    n = points.shape[0]
    step = max(1, 4_000_000 // rows.size)
    hits = 0
    for start in range(0, n, step):
        preds = hclass.predict_matrix(points[start : start + step], rows=rows)
        hits += int(np.count_nonzero(preds.min(axis=0) != preds.max(axis=0)))
    return hits / n


def estimate_disagreement_coefficient(
    hclass: FiniteClass,
    h: Hypothesis,
    r0: float,
    r_grid: Sequence[float],
    n: int,
    rng: np.random.Generator,
    sampler: Optional[PointSampler] = None,
) -> CoefficientEstimate:
    """
    Schätzt θ_h(r₀) = sup_{r > r₀} P(DIS(B(h,r)))/r über ein Radiengitter

    Args:
        hclass: Endliche Klasse C
        h: Zentrum der Kugeln B(h, r)
        r0: Untere Radiusschranke
        r_grid: Radien r > r0
        n: Anzahl Monte-Carlo-Punkte
        rng: Zufallsgenerator

    Returns:
        CoefficientEstimate mit Maximum und Halbbreite 1.96·√(p(1−p)/n)/r
    """
    if len(r_grid) == 0:
        raise InvalidParameterError("Leeres Radiengitter")
    if r0 <= 0:
        raise InvalidParameterError(f"r₀ muss positiv sein: {r0}")
    if any(r <= r0 for r in r_grid):
        raise InvalidParameterError(f"Alle Radien müssen > r₀ = {r0} sein")
    if n < 1:
        raise InvalidParameterError(f"Stichprobengröße muss >= 1 sein: {n}")
    sampler = sampler or default_sampler(hclass)
    points = sampler(n, rng)
    distances = hclass.distances_from(h)

    estimate = CoefficientEstimate(theta=0.0, half_width=0.0)
    for r in r_grid:
        ball = np.flatnonzero(distances <= r)
        p = dis_mass(hclass, ball, points)
        ratio = p / r
        estimate.ratios[float(r)] = ratio
        estimate.ball_sizes[float(r)] = int(ball.size)
        if ratio >= estimate.theta:
            estimate.theta = ratio
            estimate.half_width = 1.96 * math.sqrt(p * (1.0 - p) / n) / r
    return estimate


def estimate_class_disagreement_coefficient(
    hclass: FiniteClass,
    r0: float,
    r_grid: Sequence[float],
    n: int,
    rng: np.random.Generator,
    centers: Optional[Sequence[int]] = None,
) -> CoefficientEstimate:
    """θ_C(r₀) = max über die gewählten Zentren (Standard: 8 gleichverteilte Indizes)."""
    if centers is None:
        centers = sorted({int(i) for i in np.linspace(0, len(hclass) - 1, min(8, len(hclass)))})
    best: Optional[CoefficientEstimate] = None
    for index in centers:
        est = estimate_disagreement_coefficient(hclass, hclass[index], r0, r_grid, n, rng)
        if best is None or est.theta > best.theta:
            best = est
    assert best is not None
    return best
