"""
Orakel-Abgleich

Vergleicht die Lernverfahren mit unabhängigen Referenzrechnungen:
erschöpfende Fenstersuche, Gittersuche für den Hinge-Löser, Monte-Carlo
für Bandmassen und den Disagreement-Koeffizienten.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Tuple

import numpy as np
import structlog

from shared.models.hypotheses import UnitVector
from shared.utils.drift.active_disagreement import estimate_disagreement_coefficient
from shared.utils.drift.geometry import (
    FiniteClass,
    band_probability,
    hinge,
    sample_sphere_points,
    sample_unit_sphere,
)
from shared.utils.drift.halfspace_drift import hinge_minimize_ball
from shared.utils.drift.window_erm import AdaptiveConfig, History, ThresholdErm, adaptive_fit
from shared.utils.errors import InvalidParameterError

logger = structlog.get_logger()

THRESHOLD_DOMAIN = np.linspace(0.0, 1.0, 9)
WINDOW_K_VALUES = (0.4, 0.9, 1.6)
FULL_PRODUCT_LENGTH = 3
SEQUENCE_DRAWS = 18
MAX_HISTORY_LENGTH = 8


@dataclass
class OracleCheck:
    """Ein Vergleich: beobachteter Wert gegen Orakelwert mit Toleranz"""
    suite: str
    name: str
    observed: float
    expected: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.observed - self.expected) <= self.tolerance

    def to_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.suite}/{self.name}: observed={self.observed:.6g} "
            f"oracle={self.expected:.6g} tol={self.tolerance:.3g}"
        )


@dataclass
class OracleReport:
    """Sammlung von Vergleichen einer oder mehrerer Suites"""
    checks: List[OracleCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[OracleCheck]:
        return [check for check in self.checks if not check.passed]

    def to_text(self) -> str:
        lines = [check.to_line() for check in self.checks]
        lines.append(f"{len(self.checks) - len(self.failures)}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"


def _threshold_grid_predictions(points: np.ndarray) -> np.ndarray:
    """Vorhersagen aller Gitterschwellen (beide Polaritäten) auf `points`."""
    grid = FiniteClass.threshold_grid(THRESHOLD_DOMAIN.size)
    return grid.predict_matrix(points)


def point_sequences(n: int, rng: np.random.Generator) -> List[np.ndarray]:
    """
    Feste Familie von Punktfolgen der Länge n über dem 9-Punkte-Gitter

    Für n <= 3 alle 9ⁿ Folgen. Darüber: aufsteigend, absteigend, von außen
    nach innen, von innen nach außen, alle gleich, Doppelpaare und
    SEQUENCE_DRAWS gezogene Folgen; `rng` bestimmt nur die gezogenen.
    """
    if n <= FULL_PRODUCT_LENGTH:
        return [np.array(pts) for pts in itertools.product(THRESHOLD_DOMAIN, repeat=n)]
    ascending = THRESHOLD_DOMAIN[np.round(np.linspace(0, THRESHOLD_DOMAIN.size - 1, n)).astype(int)]
    outside_in = np.empty(n)
    outside_in[0::2] = ascending[: (n + 1) // 2]
    outside_in[1::2] = ascending[::-1][: n // 2]
    sequences = [
        ascending,
        ascending[::-1].copy(),
        outside_in,
        outside_in[::-1].copy(),
        np.full(n, THRESHOLD_DOMAIN[THRESHOLD_DOMAIN.size // 2]),
        np.repeat(ascending[: (n + 1) // 2], 2)[:n],
    ]
    sequences.extend(rng.choice(THRESHOLD_DOMAIN, size=n) for _ in range(SEQUENCE_DRAWS))
    return sequences


def window_histories(rng: np.random.Generator) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Jede Punktfolge der Familie mit allen 2ⁿ Labelfolgen, n = 1..8."""
    for n in range(1, MAX_HISTORY_LENGTH + 1):
        label_sets = [np.array(labels) for labels in itertools.product((-1, 1), repeat=n)]
        for pts in point_sequences(n, rng):
            for labels in label_sets:
                yield pts, labels


def brute_force_window(
    points: np.ndarray, labels: np.ndarray, cfg: AdaptiveConfig
) -> Tuple[int, float, List[int]]:
    """
    Erschöpfende Suche über alle Gitterschwellen und alle Fensterlängen

    Returns:
        (m̂, minimale Quote auf m̂, Fehlerzahlen aller Minimierer auf m̂); m̂ = 0 falls nichts zulässig
    """
    n = labels.size
    recent_points, recent_labels = points[::-1], labels[::-1]
    preds = _threshold_grid_predictions(recent_points)
    wrong = np.cumsum(preds != recent_labels[None, :], axis=1)
    ratios = wrong / cfg.denominators(n, n + 1)[None, :]
    prefix_max = np.maximum.accumulate(ratios, axis=1)
    m_hat = 0
    for m in range(1, n + 1):
        if np.any(prefix_max[:, m - 1] < cfg.K):
            m_hat = m
    if m_hat == 0:
        return 0, float("inf"), []
    scores = prefix_max[:, m_hat - 1]
    best = float(scores.min())
    minimizers = np.flatnonzero(np.isclose(scores, best, rtol=0.0, atol=1e-12))
    return m_hat, best, sorted({int(wrong[i, m_hat - 1]) for i in minimizers})


def check_window(seed: int = 0) -> OracleReport:
    """adaptive_fit und ThresholdErm gegen erschöpfende Suche."""
    rng = np.random.default_rng(seed)
    erm = ThresholdErm()
    erm_mismatches = 0
    window_mismatches = 0
    histories = 0
    for points, labels in window_histories(rng):
        histories += 1
        grid_best = int((_threshold_grid_predictions(points) != labels[None, :]).sum(axis=1).min())
        _, mistakes = erm.fit(points, labels)
        if mistakes != grid_best:
            erm_mismatches += 1
        history = History(1)
        for x, y in zip(points, labels):
            history.append(float(x), int(y))
        for K in WINDOW_K_VALUES:
            cfg = AdaptiveConfig(K=K, confidence=1.0, d=1)
            fit = adaptive_fit(history, cfg, erm)
            m_hat, score, counts = brute_force_window(points, labels, cfg)
            if m_hat == 0:
                ok = fit.window == 1 and math.isinf(fit.score)
            else:
                window_points, window_labels = history.recent(m_hat)
                fit_mistakes = int(np.sum(fit.hypothesis.predict_many(window_points) != window_labels))
                ok = (
                    fit.window == m_hat
                    and abs(fit.score - score) <= 1e-9
                    and fit_mistakes in counts
                )
            if not ok:
                window_mismatches += 1
    logger.debug("window_oracle_done", histories=histories)
    return OracleReport(
        [
            OracleCheck("window", f"erm_exact({histories} histories)", erm_mismatches, 0, 0),
            OracleCheck("window", "adaptive_fit_equivalence", window_mismatches, 0, 0),
        ]
    )


def _grid_hinge_optimum(
    points: np.ndarray, labels: np.ndarray, center: np.ndarray, r: float, tau: float, n: int
) -> float:
    axis0 = np.linspace(center[0] - r, center[0] + r, n)
    axis1 = np.linspace(center[1] - r, center[1] + r, n)
    grid = np.stack(np.meshgrid(axis0, axis1), axis=-1).reshape(-1, 2)
    feasible = (np.linalg.norm(grid - center, axis=1) <= r) & (np.linalg.norm(grid, axis=1) <= 1.0)
    grid = grid[feasible]
    margins = labels[None, :] * (grid @ points.T)
    return float(hinge(margins, tau).sum(axis=1).min())


def check_hinge(
    seed: int = 0,
    instances: int = 50,
    size: int = 20,
    r: float = 0.3,
    tau: float = 0.2,
    kappa: float = 0.05,
    grid: int = 400,
) -> OracleReport:
    """Hinge-Löser gegen Gittersuche über zulässige v in 2D."""
    rng = np.random.default_rng(seed)
    report = OracleReport()
    worst = -np.inf
    for _ in range(instances):
        w_prev = sample_unit_sphere(2, rng)
        target = UnitVector(w_prev.coords + 0.3 * rng.standard_normal(2))
        candidates = sample_sphere_points(50 * size, 2, rng)
        band = candidates[np.abs(candidates @ w_prev.coords) <= 0.5][:size]
        labels = np.where(band @ target.coords >= 0.0, 1.0, -1.0)
        flip = rng.random(band.shape[0]) < 0.1
        labels[flip] *= -1.0

        v = hinge_minimize_ball((band, labels), w_prev, r, tau, kappa)
        loss = float(hinge(labels * (band @ v), tau).sum())
        optimum = _grid_hinge_optimum(band, labels, w_prev.coords, r, tau, grid)
        lipschitz = np.linalg.norm(band, axis=1).sum() / tau
        resolution = lipschitz * (2 * r / (grid - 1)) / math.sqrt(2)
        # slack = Verlust − (Gitteroptimum + κ|W| + Auflösung); erlaubt ist <= 0
        worst = max(worst, loss - (optimum + kappa * labels.size + resolution))
    report.checks.append(OracleCheck("hinge", f"max_slack({instances} instances)", max(worst, 0.0), 0.0, 0.0))
    return report


def check_geometry(seed: int = 0, samples: int = 1_000_000) -> OracleReport:
    """band_probability gegen Monte-Carlo sowie zwei geschlossene Werte."""
    rng = np.random.default_rng(seed)
    report = OracleReport()
    for d in (2, 3, 5, 10):
        margins = np.abs(sample_sphere_points(samples, d, rng)[:, 0])
        for gamma in (0.05, 0.1, 0.3, 0.7):
            report.checks.append(
                OracleCheck(
                    "geometry",
                    f"band(d={d},gamma={gamma})",
                    band_probability(d, gamma),
                    float(np.mean(margins <= gamma)),
                    3e-3,
                )
            )
    report.checks.append(OracleCheck("geometry", "band(d=3,gamma=0.25)", band_probability(3, 0.25), 0.25, 1e-9))
    report.checks.append(
        OracleCheck("geometry", "band(d=2,gamma=sqrt2/2)", band_probability(2, math.sqrt(2) / 2), 0.5, 1e-9)
    )
    return report


def check_theta(seed: int = 0, samples: int = 1_000_000, grid_size: int = 1024) -> OracleReport:
    """Disagreement-Koeffizient des Winkelgitters gegen die analytische Masse 2r."""
    rng = np.random.default_rng(seed)
    hclass = FiniteClass.angle_grid(grid_size)
    estimate = estimate_disagreement_coefficient(hclass, hclass[0], 0.01, (0.05, 0.1, 0.2), samples, rng)
    return OracleReport([OracleCheck("theta", "angle_grid", estimate.theta, 2.0, 0.05)])


SUITES: Dict[str, Callable[..., OracleReport]] = {
    "window": check_window,
    "hinge": check_hinge,
    "geometry": check_geometry,
    "theta": check_theta,
}


def oracle_check(suite: str, seed: int = 0) -> OracleReport:
    """
    Führt eine Suite (oder `all`) aus

    Raises:
        InvalidParameterError: Bei unbekanntem Suite-Namen
    """
    if suite == "all":
        names = list(SUITES)
    elif suite in SUITES:
        names = [suite]
    else:
        raise InvalidParameterError(f"Unbekannte Suite: {suite} (erlaubt: {', '.join(SUITES)}, all)")
    report = OracleReport()
    for name in names:
        part = SUITES[name](seed=seed)
        report.checks.extend(part.checks)
        logger.info("oracle_suite_finished", suite=name, passed=part.passed, checks=len(part.checks))
    return report
