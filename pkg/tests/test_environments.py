#!/usr/bin/env python3
"""
Tests für Driftfolgen und die drei Umgebungen
"""

import math

import numpy as np
import pytest

from shared.models.hypotheses import HalfspaceHypothesis
from shared.utils.drift.environments import (
    DriftSchedule,
    ScheduleKind,
    env_advance,
    make_random_walk_2d_env,
    make_rotating_halfspace_env,
    make_threshold_env,
)
from shared.utils.drift.geometry import disagreement, sample_sphere_points
from shared.utils.errors import InvalidParameterError


def test_constant_schedule():
    """Test: konstante Driftfolge"""
    schedule = DriftSchedule.constant(0.01)
    assert schedule.delta_at(2) == 0.01
    assert schedule.delta_at(1000) == 0.01
    deltas = schedule.deltas(5)
    assert list(deltas[:2]) == [0.0, 0.0]
    assert np.allclose(deltas[2:], 0.01)


def test_power_decay_schedule():
    """Test: Δ_t = min(c·t^(−p), 1)"""
    schedule = DriftSchedule.power_decay(1.0, 1.0)
    assert schedule.kind == ScheduleKind.POWER_DECAY
    assert schedule.delta_at(2) == pytest.approx(0.5)
    assert schedule.delta_at(10) == pytest.approx(0.1)
    assert DriftSchedule.power_decay(5.0, 0.5).delta_at(4) == 1.0
    assert schedule.deltas(10)[10] == pytest.approx(0.1)


def test_schedule_with_jumps():
    """Test: Sprünge an Vielfachen der Periode"""
    schedule = DriftSchedule.with_jumps(0.01, 5)
    assert schedule.delta_at(5) == 1.0
    assert schedule.delta_at(6) == 0.01
    assert schedule.is_jump(10)
    deltas = schedule.deltas(10)
    assert deltas[5] == 1.0 and deltas[10] == 1.0 and deltas[7] == 0.01


def test_schedule_invalid():
    """Test: ungültige Driftparameter"""
    with pytest.raises(InvalidParameterError):
        DriftSchedule.constant(1.5)
    with pytest.raises(InvalidParameterError):
        DriftSchedule.power_decay(-1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        DriftSchedule.constant(0.1).delta_at(1)


def test_rotating_static_without_drift():
    """Test: Δ=0 lässt das Ziel unverändert"""
    env = make_rotating_halfspace_env(3, DriftSchedule.constant(0.0), seed=1)
    start = env.target
    for _ in range(100):
        env.advance()
    assert disagreement(start, env.target) == 0.0


def test_rotating_fixed_direction_quarter_turn():
    """Test: fünf Schritte mit Δ=0.1 drehen um π/2"""
    env = make_rotating_halfspace_env(
        2, DriftSchedule.constant(0.1), seed=3, fixed_direction=True
    )
    first = env.advance().target
    for _ in range(4):
        env.advance()
    assert disagreement(first, env.target) == pytest.approx(0.5, abs=1e-9)


def test_rotating_step_size_exact():
    """Test: jeder Schritt verschiebt um genau Δ Disagreement-Masse (d=5)"""
    env = make_rotating_halfspace_env(5, DriftSchedule.constant(0.01), seed=7)
    previous = env.target
    for _ in range(1000):
        env.advance()
        assert disagreement(previous, env.target) == pytest.approx(0.01, abs=1e-9)
        previous = env.target


def test_rotating_frozen_hypothesis_error():
    """Test: eingefrorene Hypothese hat nach 50 Schritten Fehler 50·Δ"""
    env = make_rotating_halfspace_env(
        2, DriftSchedule.constant(0.002), seed=11, fixed_direction=True
    )
    frozen = env.advance().target
    for _ in range(49):
        env.advance()
    assert env.error_of(frozen) == pytest.approx(0.1, abs=1e-9)


def test_rotating_requires_dimension_two():
    """Test: d=1 und feste Richtung in d=3 sind ungültig"""
    with pytest.raises(InvalidParameterError):
        make_rotating_halfspace_env(1, DriftSchedule.constant(0.0), seed=0)
    with pytest.raises(InvalidParameterError):
        make_rotating_halfspace_env(3, DriftSchedule.constant(0.0), seed=0, fixed_direction=True)


def test_random_walk_static_without_drift():
    """Test: Δ=0 hält den Winkel fest"""
    env = make_random_walk_2d_env(DriftSchedule.constant(0.0), seed=5)
    phi = env.phi
    for _ in range(200):
        env.advance()
    assert env.phi == phi


def test_random_walk_increments_centered():
    """Test: Zuwächse der Irrfahrt haben Mittelwert 0 (±3σ/√n)"""
    delta = 0.2
    n = 10_000
    env = make_random_walk_2d_env(DriftSchedule.constant(delta), seed=2)
    phis = [env.phi]
    for _ in range(n):
        env.advance()
        phis.append(env.phi)
    steps = np.diff(phis)
    assert np.allclose(np.abs(steps), delta * math.pi)
    sigma = delta * math.pi
    assert abs(steps.mean()) <= 3 * sigma / math.sqrt(n)


def test_random_walk_one_sided_support():
    """Test: Träger {0,1} dreht nur vorwärts"""
    env = make_random_walk_2d_env(DriftSchedule.constant(0.1), walk_support=(0, 1), seed=4)
    phis = [env.phi]
    for _ in range(500):
        env.advance()
        phis.append(env.phi)
    assert np.all(np.diff(phis) >= 0.0)


def test_random_walk_invalid_support():
    """Test: Träger außerhalb von {−1,0,1}"""
    with pytest.raises(InvalidParameterError):
        make_random_walk_2d_env(DriftSchedule.constant(0.1), walk_support=(2,), seed=0)


@pytest.mark.parametrize("support", [(1,), (-1,), (0,), (-1, 0, 1), (-1, 0), ()])
def test_random_walk_rejects_other_supports(support):
    """Test: nur {−1,1} und {0,1} sind zulässige Träger"""
    with pytest.raises(InvalidParameterError):
        make_random_walk_2d_env(DriftSchedule.constant(0.1), walk_support=support, seed=0)


def test_random_walk_support_order_irrelevant():
    """Test: (1, 0) wird als {0,1} akzeptiert"""
    env = make_random_walk_2d_env(DriftSchedule.constant(0.1), walk_support=(1, 0), seed=0)
    assert list(env.walk_support) == [0, 1]


def test_env_advance_oracle():
    """Test: Fehlerorakel ist 0 für das Ziel und 1 für das Komplement"""
    env = make_rotating_halfspace_env(4, DriftSchedule.constant(0.05), seed=9)
    target = env.target
    x, y, oracle = env_advance(env)
    assert y == target.predict(x)
    assert oracle(target) == 0.0
    assert oracle(target.complement()) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "factory, delta",
    [
        (lambda s: make_rotating_halfspace_env(3, s, seed=21), 0.01),
        (lambda s: make_random_walk_2d_env(s, seed=21), 0.2),
        (lambda s: make_threshold_env(s, seed=21), 0.05),
    ],
)
def test_drift_constraint_and_label_consistency(factory, delta):
    """Test: er(h*_t, h*_{t+1}) <= Δ und Labels stammen vom Ziel"""
    env = factory(DriftSchedule.constant(delta))
    for _ in range(10_000):
        obs = env.advance()
        assert obs.y == obs.target.predict(obs.x)
        assert disagreement(obs.target, env.target) <= delta + 1e-9


def test_threshold_stays_in_unit_interval():
    """Test: Schwelle bleibt in [0,1], Punkte in [0,1)"""
    env = make_threshold_env(DriftSchedule.constant(0.3), seed=8)
    for _ in range(2000):
        obs = env.advance()
        assert 0.0 <= obs.x < 1.0
        assert 0.0 <= env.cut <= 1.0


def test_threshold_full_drift_redraws():
    """Test: Δ=1 zieht das Ziel jede Runde neu"""
    env = make_threshold_env(DriftSchedule.constant(1.0), seed=6)
    cuts = set()
    for _ in range(50):
        env.advance()
        cuts.add(env.cut)
    assert len(cuts) == 50


def test_jump_redraws_target():
    """Test: an Sprungrunden wird das Ziel neu gezogen"""
    env = make_rotating_halfspace_env(3, DriftSchedule.with_jumps(0.0, 10), seed=12)
    before = env.target
    for _ in range(9):
        env.advance()
    assert disagreement(before, env.target) > 0.0
    after_jump = env.target
    for _ in range(5):
        env.advance()
    assert disagreement(after_jump, env.target) == 0.0


def test_reproducible_streams():
    """Test: gleicher Seed erzeugt denselben Strom"""
    def stream(seed):
        env = make_rotating_halfspace_env(3, DriftSchedule.constant(0.01), seed=seed)
        return np.array([env.advance().x for _ in range(2000)])

    assert np.array_equal(stream(42), stream(42))
    assert not np.array_equal(stream(42), stream(43))


def test_exact_error_matches_empirical(rng):
    """Test: exakter Fehler stimmt mit frischer Stichprobe überein"""
    env = make_rotating_halfspace_env(3, DriftSchedule.constant(0.01), seed=13)
    frozen = HalfspaceHypothesis(env.target.weight)
    for _ in range(30):
        env.advance()
    sample = sample_sphere_points(100_000, 3, rng)
    empirical = np.mean(frozen.predict_many(sample) != env.target.predict_many(sample))
    assert env.error_of(frozen) == pytest.approx(empirical, abs=0.01)
