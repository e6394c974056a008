"""
Driftende Halbräume in Polynomialzeit

Batches der Länge M: ModPerceptron-Initialisierung (m₀ Runden, alle Labels),
danach margin-basiertes Anfragen im Band |w·x| <= b_{k−1} mit Hinge-Minimierung
in einer Kugel um w_{k−1}. Vorhersagen eines Batches nutzen stets die
Hypothese des vorherigen Batches.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from shared.models.hypotheses import HalfspaceHypothesis, Hypothesis, UnitVector
from shared.models.trace import RunTrace
from shared.utils.drift.environments import DriftEnvironment
from shared.utils.drift.geometry import hinge, log_cap
from shared.utils.errors import InvalidParameterError

logger = structlog.get_logger()

C10_DEFAULT = math.pi * math.sqrt(2.0) / 8.0


class AblParameters(BaseModel):
    """Eingabeparameter des Batch-Lerners; abgeleitete Größen stehen in AblSchedule"""
    model_config = ConfigDict(frozen=True)

    d: int = Field(2, ge=1, description="Dimension")
    drift: float = Field(0.0, ge=0, le=1, description="Driftrate Δ")
    confidence: Optional[float] = Field(None, gt=0, lt=1, description="δ; Standard √(Δd) ∧ 1/e")
    kappa: float = Field(0.1, gt=0, lt=1)
    c5: float = Field(1.0, gt=0)
    c7: float = Field(1.0, gt=0)
    c8: Optional[float] = Field(None, gt=0, description="Standard κ")
    c9: Optional[float] = Field(None, gt=0, description="Standard 1 bzw. 1/κ³ (theoretisch)")
    c10: Optional[float] = Field(None, gt=0, description="Standard π√2/8")
    m0: int = Field(2000, ge=1, description="ModPerceptron-Runden (praktisch)")
    alpha_static: float = Field(1.0 / 16.0, gt=0, le=1, description="α bei Δ = 0")
    budget: int = Field(2000, ge=1, description="Iterationen des Hinge-Lösers")
    theoretical: bool = False
    last_index: bool = False

    def resolved_confidence(self) -> float:
        if self.confidence is not None:
            return self.confidence
        if self.drift <= 0.0:
            return 1.0 / math.e
        return min(math.sqrt(self.drift * self.d), 1.0 / math.e)


def theoretical_m0(d: int, confidence: float) -> int:
    """m₀ = max{⌈128 c₁⁻¹ ln 32⌉, ⌈512 ln(4/δ)⌉} mit c₁ = π²/(d·400·2¹⁵)."""
    c1 = math.pi ** 2 / (d * 400 * 2 ** 15)
    return max(math.ceil(128.0 / c1 * math.log(32.0)), math.ceil(512.0 * math.log(4.0 / confidence)))


@dataclass(frozen=True)
class AblSchedule:
    """Vollständig aufgelöster Parameterplan; Listenindex k−1 gehört zu Runde k"""
    d: int
    drift: float
    confidence: float
    kappa: float
    c5: float
    c7: float
    c8: float
    c9: float
    c10: float
    alpha: float
    m0: int
    k_max: int
    m: Tuple[int, ...]
    tau: Tuple[float, ...]
    band: Tuple[float, ...]
    radius: Tuple[float, ...]
    delta_k: Tuple[float, ...]
    budget: int = 2000
    last_index: bool = False

    @property
    def M1(self) -> int:
        return int(sum(self.m))

    @property
    def M(self) -> int:
        return self.m0 + self.M1

    @classmethod
    def from_parameters(cls, params: AblParameters) -> "AblSchedule":
        d = params.d
        kappa = params.kappa
        confidence = params.resolved_confidence()
        c8 = params.c8 if params.c8 is not None else kappa
        if params.c9 is not None:
            c9 = params.c9
        else:
            c9 = 1.0 / kappa ** 3 if params.theoretical else 1.0
        c10 = params.c10 if params.c10 is not None else C10_DEFAULT

        raw_alpha = c9 * math.sqrt(params.drift * d * log_cap(1.0 / (kappa * confidence)))
        # ohne Drift wäre α = 0 und K_max unendlich
        alpha = min(raw_alpha, 1.0) if raw_alpha > 0.0 else params.alpha_static
        k_max = max(0, math.ceil(math.log2(1.0 / alpha)))
        outer = math.ceil(math.log2(4.0 / alpha))

        ks = range(1, k_max + 1)
        delta_k = tuple(confidence / (outer - k) ** 2 for k in ks)
        m = tuple(
            math.ceil(params.c5 * (2 ** k / kappa ** 2) * d * log_cap(1.0 / (kappa * dk)))
            for k, dk in zip(ks, delta_k)
        )
        m0 = theoretical_m0(d, confidence) if params.theoretical else params.m0
        if raw_alpha >= 1.0:
            logger.warning("abl_skipped", raw_alpha=round(raw_alpha, 4), drift=params.drift, d=d)
        return cls(
            d=d,
            drift=params.drift,
            confidence=confidence,
            kappa=kappa,
            c5=params.c5,
            c7=params.c7,
            c8=c8,
            c9=c9,
            c10=c10,
            alpha=alpha,
            m0=m0,
            k_max=k_max,
            m=m,
            tau=tuple(c8 * 2.0 ** (-k) / math.sqrt(d) for k in ks),
            band=tuple(params.c7 * 2.0 ** (1 - k) / math.sqrt(d) for k in ks),
            radius=tuple(c10 * 2.0 ** (-k) for k in ks),
            delta_k=delta_k,
            budget=params.budget,
            last_index=params.last_index,
        )

    def to_dict(self) -> Dict[str, Union[int, float, bool, str]]:
        out: Dict[str, Union[int, float, bool, str]] = {
            "d": self.d,
            "drift": self.drift,
            "confidence": self.confidence,
            "kappa": self.kappa,
            "c5": self.c5,
            "c7": self.c7,
            "c8": self.c8,
            "c9": self.c9,
            "c10": self.c10,
            "alpha": self.alpha,
            "k_max": self.k_max,
            "m0": self.m0,
            "M1": self.M1,
            "M": self.M,
            "budget": self.budget,
            "last_index": self.last_index,
        }
        for i in range(self.k_max):
            k = i + 1
            out[f"m_{k}"] = self.m[i]
            out[f"tau_{k}"] = self.tau[i]
            out[f"b_{k - 1}"] = self.band[i]
            out[f"r_{k}"] = self.radius[i]
            out[f"delta_{k}"] = self.delta_k[i]
        return out

    def to_text(self) -> str:
        return "".join(f"{key} = {value}\n" for key, value in self.to_dict().items())


@dataclass
class QueryBatch:
    """Im Band |w·x| <= b angefragte Beispiele einer ABL-Runde"""
    center: UnitVector
    band: float
    points: List[np.ndarray] = field(default_factory=list)
    labels: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.labels)

    def in_band(self, x: np.ndarray) -> bool:
        return abs(self.center.dot(x)) <= self.band

    def add(self, x: np.ndarray, y: int) -> None:
        if not self.in_band(x):
            raise InvalidParameterError("Punkt liegt außerhalb des Anfragebands")
        self.points.append(np.asarray(x, dtype=float))
        self.labels.append(int(y))

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        d = self.center.dimension
        if not self.labels:
            return np.empty((0, d)), np.empty(0, dtype=int)
        return np.vstack(self.points), np.asarray(self.labels, dtype=int)


def mod_perceptron_update(w: UnitVector, x: np.ndarray, y: int) -> UnitVector:
    """Spiegelung w − 2(w·x)x, nur bei Fehlklassifikation von (x, y)."""
    x = np.asarray(x, dtype=float)
    margin = w.dot(x)
    predicted = 1 if margin >= 0.0 else -1
    if predicted == y:
        return w
    return UnitVector(w.coords - 2.0 * margin * x)


def mod_perceptron_init(
    env: DriftEnvironment,
    m0: int,
    predictor: Hypothesis,
    trace: Optional[RunTrace] = None,
    w_init: Optional[UnitVector] = None,
) -> UnitVector:
    """
    Modifizierter Perceptron über m₀ Runden

    Vorhersagen laufen mit dem übernommenen Prädiktor, jedes Label wird
    angefragt, das interne w wird bei eigenen Fehlern gespiegelt.

    Args:
        env: Halbraum-Umgebung
        m0: Anzahl Runden
        predictor: Hypothese des vorherigen Batches
        trace: Rundenprotokoll (endet früher, wenn dessen Horizont erreicht ist)
        w_init: Startvektor, Standard e₁

    Returns:
        Letzter Gewichtsvektor
    """
    if m0 < 1:
        raise InvalidParameterError(f"m₀ muss >= 1 sein: {m0}")
    trace = trace if trace is not None else RunTrace()
    w = w_init if w_init is not None else UnitVector.basis(env.dimension, 0)
    for _ in range(m0):
        if trace.is_full:
            break
        obs = env.advance()
        trace.record(predictor.predict(obs.x) != obs.y, True, obs.error_oracle(predictor))
        w = mod_perceptron_update(w, obs.x, obs.y)
    return w


def _hinge_total(v: np.ndarray, points: np.ndarray, labels: np.ndarray, tau: float) -> float:
    return float(np.sum(hinge(labels * (points @ v), tau)))


def project_two_balls(
    v: np.ndarray, center: np.ndarray, r: float, iterations: int = 50
) -> np.ndarray:
    """Projektion auf {‖v − center‖ <= r} ∩ {‖v‖ <= 1}; center muss zulässig sein."""
    tol = 1e-12
    for _ in range(iterations):
        offset = v - center
        dist = np.linalg.norm(offset)
        if dist > r:
            v = center + offset * (r / dist)
        norm = np.linalg.norm(v)
        if norm > 1.0:
            v = v / norm
        if np.linalg.norm(v - center) <= r + tol and np.linalg.norm(v) <= 1.0 + tol:
            return v
    u = v - center
    uu = float(np.dot(u, u))
    if uu == 0.0:
        return center.copy()
    lam = min(1.0, r / math.sqrt(uu))
    cu = float(np.dot(center, u))
    cc = float(np.dot(center, center))
    disc = cu * cu - uu * (cc - 1.0)
    if disc >= 0.0:
        lam = min(lam, max(0.0, (-cu + math.sqrt(disc)) / uu))
    return center + lam * u


def hinge_minimize_ball(
    batch: Union[QueryBatch, Tuple[np.ndarray, np.ndarray]],
    w_prev: UnitVector,
    r: float,
    tau: float,
    kappa: float,
    budget: int = 2000,
) -> np.ndarray:
    """
    Projizierter Subgradientenabstieg für Σ ℓ_τ(y·v·x) unter ‖v − w_prev‖ <= r, ‖v‖ <= 1

    Schrittweite r/√j entlang des normierten Subgradienten, bestes Iterat
    wird gehalten. Abbruch, sobald der Verlust <= κ|W| ist.

    Returns:
        Vektor v (nicht normiert)
    """
    if r <= 0 or tau <= 0 or kappa <= 0:
        raise InvalidParameterError(f"r, τ, κ müssen positiv sein: {r}, {tau}, {kappa}")
    if budget < 1:
        raise InvalidParameterError(f"Iterationsbudget muss >= 1 sein: {budget}")
    points, labels = batch.as_arrays() if isinstance(batch, QueryBatch) else batch
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels, dtype=float)
    center = w_prev.coords.astype(float)
    if labels.size == 0:
        return center.copy()

    tolerance = kappa * labels.size
    v = center.copy()
    best_v, best_loss = v, _hinge_total(v, points, labels, tau)
    for j in range(1, budget + 1):
        if best_loss <= tolerance:
            break
        margins = labels * (points @ v)
        active = margins < tau
        grad = -(labels[active, None] * points[active]).sum(axis=0) / tau
        grad_norm = np.linalg.norm(grad)
        if grad_norm == 0.0:
            break
        v = project_two_balls(v - (r / math.sqrt(j)) * grad / grad_norm, center, r)
        if np.linalg.norm(v) < 1e-12:
            continue
        loss = _hinge_total(v, points, labels, tau)
        if loss < best_loss:
            best_v, best_loss = v, loss
    else:
        logger.debug("hinge_budget_exhausted", budget=budget, loss=round(best_loss, 4), tolerance=tolerance)
    return best_v


@dataclass
class AblResult:
    """Ergebnis eines ABL-Durchlaufs"""
    hypothesis: HalfspaceHypothesis
    queries: int
    weights: List[UnitVector] = field(default_factory=list)
    batches: List[QueryBatch] = field(default_factory=list)
    rounds: List[int] = field(default_factory=list)


def abl_batch(
    env: DriftEnvironment,
    predictor: Hypothesis,
    schedule: AblSchedule,
    w0: UnitVector,
    trace: Optional[RunTrace] = None,
) -> AblResult:
    """
    Margin-basierter Batch-Lerner für k = 1..K_max

    Fragt genau die Labels mit |w_{k−1}·X| <= b_{k−1} an, minimiert den
    Hinge-Verlust in der Kugel vom Radius r_k und normiert. Zurückgegeben
    wird w mit Index K_max − 1 (bzw. K_max bei `last_index`).
    """
    trace = trace if trace is not None else RunTrace()
    weights = [w0]
    batches: List[QueryBatch] = []
    rounds: List[int] = []
    queries = 0
    for i in range(schedule.k_max):
        w_prev = weights[-1]
        batch = QueryBatch(center=w_prev, band=schedule.band[i])
        consumed = 0
        for _ in range(schedule.m[i]):
            if trace.is_full:
                break
            obs = env.advance()
            x = np.asarray(obs.x, dtype=float)
            queried = batch.in_band(x)
            trace.record(predictor.predict(x) != obs.y, queried, obs.error_oracle(predictor))
            if queried:
                batch.add(x, obs.y)
            consumed += 1
        queries += len(batch)
        v = hinge_minimize_ball(
            batch, w_prev, schedule.radius[i], schedule.tau[i], schedule.kappa, schedule.budget
        )
        weights.append(UnitVector(v))
        batches.append(batch)
        rounds.append(consumed)
        logger.debug("abl_round", k=i + 1, rounds=consumed, queried=len(batch))
        if trace.is_full:
            break

    if schedule.k_max == 0:
        index = 0
    else:
        index = schedule.k_max if schedule.last_index else schedule.k_max - 1
    index = min(index, len(weights) - 1)
    return AblResult(
        hypothesis=HalfspaceHypothesis(weights[index]),
        queries=queries,
        weights=weights,
        batches=batches,
        rounds=rounds,
    )


def run_drifting_halfspaces(env: DriftEnvironment, T: int, schedule: AblSchedule) -> RunTrace:
    """Batches aus ModPerceptron und ABL; Batch i sagt mit h̃_{i−1} vorher."""
    if T < 1:
        raise InvalidParameterError(f"Horizont muss >= 1 sein: {T}")
    if not isinstance(env.target, HalfspaceHypothesis):
        raise InvalidParameterError(f"Halbraum-Umgebung erwartet, nicht {env.KIND}")
    if env.dimension != schedule.d:
        raise InvalidParameterError(f"Plan für d={schedule.d}, Umgebung hat d={env.dimension}")
    run_logger = logger.bind(learner="drifting_halfspaces", seed=env.seed)
    trace = RunTrace(horizon=T)
    hypothesis = HalfspaceHypothesis(UnitVector.basis(env.dimension, 0))
    batch_index = 0
    while not trace.is_full:
        w0 = mod_perceptron_init(env, schedule.m0, hypothesis, trace, w_init=hypothesis.weight)
        if trace.is_full:
            break
        result = abl_batch(env, hypothesis, schedule, w0, trace)
        hypothesis = result.hypothesis
        batch_index += 1
        run_logger.debug(
            "batch_finished", batch=batch_index, queries=result.queries, error=env.error_of(hypothesis)
        )
    run_logger.info(
        "drifting_halfspaces_finished",
        horizon=T,
        batches=batch_index,
        mistakes=trace.total_mistakes,
        queries=trace.total_queries,
    )
    return trace
