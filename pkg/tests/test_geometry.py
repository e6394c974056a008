#!/usr/bin/env python3
"""
Tests für die Sphären-Geometrie: Log-Konvention, Hinge, Sampling, Disagreement
"""

import math

import numpy as np
import pytest
from scipy import stats

from shared.models.hypotheses import HalfspaceHypothesis, ThresholdHypothesis, UnitVector
from shared.utils.drift.geometry import (
    FiniteClass,
    band_probability,
    disagreement,
    empirical_disagreement,
    halfspace_disagreement,
    hinge,
    log_cap,
    sample_sphere_points,
    sample_unit_sphere,
    threshold_disagreement,
)
from shared.utils.errors import InvalidParameterError


def test_log_cap_values():
    """Test: Log ist unterhalb von e konstant 1"""
    assert log_cap(1.0) == 1.0
    assert log_cap(math.e) == pytest.approx(1.0)
    assert log_cap(0.001) == 1.0
    assert log_cap(math.e ** 3) == pytest.approx(3.0)


def test_log_cap_monotone():
    """Test: Log ist monoton und >= 1"""
    xs = np.linspace(0.01, 100.0, 500)
    values = [log_cap(x) for x in xs]
    assert min(values) >= 1.0
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_hinge_values():
    """Test: ℓ_τ an Beispielwerten"""
    assert hinge(0.5, 1.0) == pytest.approx(0.5)
    assert hinge(2.0, 1.0) == 0.0
    assert hinge(-1.0, 0.5) == pytest.approx(3.0)
    assert hinge(0.2, 0.2) == 0.0


def test_hinge_rejects_non_positive_tau():
    """Test: τ <= 0 ist ungültig"""
    with pytest.raises(InvalidParameterError):
        hinge(0.5, 0.0)
    with pytest.raises(InvalidParameterError):
        hinge(0.5, -1.0)


def test_hinge_convex(rng):
    """Test: Konvexität von ℓ_τ auf zufälligen Tripeln"""
    a = rng.uniform(-3, 3, 1000)
    b = rng.uniform(-3, 3, 1000)
    lam = rng.uniform(0, 1, 1000)
    tau = 0.3
    lhs = hinge(lam * a + (1 - lam) * b, tau)
    rhs = lam * hinge(a, tau) + (1 - lam) * hinge(b, tau)
    assert np.all(lhs <= rhs + 1e-12)


def test_sample_unit_sphere_norm(rng):
    """Test: Stichproben haben Norm 1"""
    for d in (1, 2, 3, 7):
        v = sample_unit_sphere(d, rng)
        assert v.dimension == d
        assert np.linalg.norm(v.coords) == pytest.approx(1.0)


def test_sample_unit_sphere_rejects_zero_dimension(rng):
    """Test: d=0 ist ungültig"""
    with pytest.raises(InvalidParameterError):
        sample_unit_sphere(0, rng)


def test_sample_unit_sphere_d1_balanced(rng):
    """Test: d=1 liefert ±1 mit gleicher Häufigkeit"""
    values = np.array([sample_unit_sphere(1, rng).coords[0] for _ in range(20000)])
    assert set(np.unique(values)) == {-1.0, 1.0}
    assert np.mean(values == 1.0) == pytest.approx(0.5, abs=0.02)


def test_sample_sphere_points_d3_mean(rng):
    """Test: Mittelwert der Sphärenpunkte verschwindet in d=3"""
    points = sample_sphere_points(100_000, 3, rng)
    assert np.allclose(points.mean(axis=0), 0.0, atol=0.01)


def test_sample_sphere_points_d2_uniform_angle(rng):
    """Test: Polarwinkel in d=2 sind gleichverteilt (KS-Test)"""
    points = sample_sphere_points(100_000, 2, rng)
    angles = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * np.pi) / (2 * np.pi)
    statistic, _ = stats.kstest(angles, "uniform")
    assert statistic < 0.01


def test_halfspace_disagreement_exact_values():
    """Test: exakte Werte für gleiche, orthogonale und entgegengesetzte Gewichte"""
    e1 = UnitVector.basis(3, 0)
    e2 = UnitVector.basis(3, 1)
    assert halfspace_disagreement(e1, e1) == 0.0
    assert halfspace_disagreement(e1, e2) == pytest.approx(0.5)
    assert halfspace_disagreement(e1, -e1) == pytest.approx(1.0)


def test_halfspace_disagreement_dimension_mismatch():
    """Test: unterschiedliche Dimensionen werden abgelehnt"""
    with pytest.raises(InvalidParameterError):
        halfspace_disagreement(UnitVector.basis(2, 0), UnitVector.basis(3, 0))


def test_halfspace_disagreement_triangle_inequality(rng):
    """Test: Dreiecksungleichung auf zufälligen Tripeln"""
    for _ in range(200):
        u, v, w = (sample_unit_sphere(4, rng) for _ in range(3))
        assert halfspace_disagreement(u, w) <= (
            halfspace_disagreement(u, v) + halfspace_disagreement(v, w) + 1e-12
        )


def test_threshold_disagreement():
    """Test: Disagreement zweier Schwellen"""
    a = ThresholdHypothesis(0.2, 1)
    b = ThresholdHypothesis(0.5, 1)
    assert threshold_disagreement(a, b) == pytest.approx(0.3)
    assert threshold_disagreement(a, ThresholdHypothesis(0.5, -1)) == pytest.approx(0.7)
    assert disagreement(a, a.complement()) == pytest.approx(1.0)


def test_disagreement_mixed_kinds_rejected():
    """Test: kein Maß zwischen Schwelle und Halbraum"""
    with pytest.raises(InvalidParameterError):
        disagreement(ThresholdHypothesis(0.5), HalfspaceHypothesis.from_angle(0.0))


def test_band_probability_closed_forms():
    """Test: geschlossene Werte der Bandmasse"""
    assert band_probability(5, 1.0) == 1.0
    assert band_probability(3, 0.25) == pytest.approx(0.25, abs=1e-9)
    assert band_probability(2, math.sqrt(2) / 2) == pytest.approx(0.5, abs=1e-9)
    assert band_probability(4, 0.0) == 0.0


def test_band_probability_monotone():
    """Test: Bandmasse wächst in γ und bei festem γ mit d"""
    gammas = np.linspace(0.0, 1.0, 50)
    values = [band_probability(3, g) for g in gammas]
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert band_probability(10, 0.2) > band_probability(3, 0.2)


@pytest.mark.parametrize("d", [2, 3, 5, 10, 50])
def test_band_probability_linear_envelope(d):
    """Test: P(|w·X| <= γ) / (γ√d) bleibt für γ <= 1/√d in [0.4, 0.85]"""
    for gamma in np.linspace(0.01, 1.0, 25) / math.sqrt(d):
        ratio = band_probability(d, gamma) / (gamma * math.sqrt(d))
        assert 0.4 <= ratio <= 0.85


def test_band_probability_invalid():
    """Test: d < 2 und negatives γ sind ungültig"""
    with pytest.raises(InvalidParameterError):
        band_probability(1, 0.5)
    with pytest.raises(InvalidParameterError):
        band_probability(3, -0.1)


def test_band_probability_matches_monte_carlo(rng):
    """Test: Bandmasse gegen Monte-Carlo in d=5"""
    points = sample_sphere_points(200_000, 5, rng)
    empirical = np.mean(np.abs(points[:, 0]) <= 0.3)
    assert band_probability(5, 0.3) == pytest.approx(empirical, abs=0.005)


def test_empirical_disagreement(rng):
    """Test: empirisches Disagreement gegen exakte Werte"""
    h = HalfspaceHypothesis.from_angle(0.0)
    g = HalfspaceHypothesis.from_angle(math.pi / 2)
    sample = sample_sphere_points(50_000, 2, rng)
    assert empirical_disagreement(h, h, sample) == 0.0
    assert empirical_disagreement(h, h.complement(), sample) == 1.0
    assert empirical_disagreement(h, g, sample) == pytest.approx(0.5, abs=0.01)


def test_empirical_disagreement_empty_sample():
    """Test: leere Stichprobe ist ungültig"""
    h = HalfspaceHypothesis.from_angle(0.0)
    with pytest.raises(InvalidParameterError):
        empirical_disagreement(h, h, np.empty((0, 2)))


def test_angle_grid_class():
    """Test: Winkelgitter mit Vorhersagematrix und nächstem Nachbarn"""
    hclass = FiniteClass.angle_grid(8)
    assert len(hclass) == 8
    assert hclass.dimension == 2
    assert hclass.kind == FiniteClass.KIND_HALFSPACE
    points = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    preds = hclass.predict_matrix(points)
    assert preds.shape == (8, 3)
    assert list(preds[0]) == [1, -1, 1]
    assert hclass.nearest_index(HalfspaceHypothesis.from_angle(math.pi / 4 + 0.01)) == 1
    distances = hclass.distances_from(hclass[0])
    assert distances[4] == pytest.approx(1.0)
    assert distances[2] == pytest.approx(0.5)


def test_threshold_grid_class():
    """Test: Schwellengitter in kanonischer Reihenfolge"""
    hclass = FiniteClass.threshold_grid(3)
    assert len(hclass) == 6
    assert hclass[0] == ThresholdHypothesis(0.0, 1)
    assert hclass[1] == ThresholdHypothesis(0.0, -1)
    assert hclass[4] == ThresholdHypothesis(1.0, 1)
    preds = hclass.predict_matrix(np.array([0.25, 0.75]))
    assert list(preds[2]) == [-1, 1]


def test_empty_class_rejected():
    """Test: leere Klassen sind ungültig"""
    with pytest.raises(InvalidParameterError):
        FiniteClass([])
    with pytest.raises(InvalidParameterError):
        FiniteClass.angle_grid(0)
