#!/usr/bin/env python3
"""
Tests für den INI-Konfigurationsparser, die kanonische Form und den Digest
"""

from pathlib import Path

import pytest

from shared.models.experiment import EnvironmentKind, ExperimentConfig, LearnerKind
from shared.utils.drift.config_parser import (
    apply_overrides,
    config_digest,
    load_config,
    parse_config,
    resolve_key,
    serialize_config,
)
from shared.utils.drift.environments import ScheduleKind
from shared.utils.errors import ConfigParseError, ConfigValidationError, ExperimentIOError

CONFIG_DIR = Path(__file__).parent.parent / "configs"

MINIMAL = """
[experiment]
horizon = 10000
seeds = 1

[environment]
kind = rotating
delta = 0.001

[learner]
kind = adaptive
"""


def test_parse_minimal_config_with_defaults(output_dir):
    """Test: minimale Konfiguration füllt alle Standardwerte"""
    cfg = parse_config(MINIMAL)
    assert cfg.experiment.horizon == 10000
    assert cfg.experiment.seeds == [1]
    assert cfg.experiment.output_dir == str(output_dir)
    assert cfg.environment.kind == EnvironmentKind.ROTATING
    assert cfg.environment.resolved_dimension() == 2
    assert cfg.environment.schedule == ScheduleKind.CONSTANT
    assert cfg.learner.kind == LearnerKind.ADAPTIVE
    assert cfg.window.K == 8.0
    assert cfg.window.confidence == 0.1
    assert cfg.window.vc_dim is None
    assert cfg.halfspaces.kappa == 0.1
    assert cfg.halfspaces.alpha_static == pytest.approx(1 / 16)
    assert cfg.active.grid_size == 1024


def test_default_output_dir_without_env(monkeypatch):
    """Test: ohne Umgebungsvariable landet alles in ./results"""
    monkeypatch.delenv("DRIFTSIM_OUTPUT_DIR", raising=False)
    assert parse_config(MINIMAL).experiment.output_dir == "results"


def test_seed_list_and_comments():
    """Test: Kommaliste für Seeds, Kommentare werden ignoriert"""
    cfg = parse_config(
        "[experiment]\nhorizon = 50  # kurz\nseeds = 3, 4,5\n; Kommentar\n"
    )
    assert cfg.experiment.horizon == 50
    assert cfg.experiment.seeds == [3, 4, 5]


def test_auto_values():
    """Test: auto und none stehen für abgeleitete Werte"""
    cfg = parse_config("[experiment]\nhorizon = 5\n[halfspaces]\nc9 = auto\nconfidence = none\n")
    assert cfg.halfspaces.c9 is None
    assert cfg.halfspaces.confidence is None


def test_delta_out_of_range():
    """Test: Δ = 1.5 verletzt die Schranke von delta"""
    with pytest.raises(ConfigValidationError) as exc:
        parse_config(MINIMAL.replace("delta = 0.001", "delta = 1.5"))
    assert exc.value.key == "delta"
    assert exc.value.section == "environment"


def test_horizon_must_be_positive():
    """Test: horizon = 0 ist ungültig"""
    with pytest.raises(ConfigValidationError) as exc:
        parse_config(MINIMAL.replace("horizon = 10000", "horizon = 0"))
    assert exc.value.key == "horizon"


def test_unknown_key_is_named():
    """Test: unbekannter Schlüssel wird im Fehler genannt"""
    with pytest.raises(ConfigValidationError) as exc:
        parse_config(MINIMAL + "bogus_key = 3\n")
    assert exc.value.key == "bogus_key"


def test_unknown_section():
    """Test: unbekannter Abschnitt"""
    with pytest.raises(ConfigValidationError) as exc:
        parse_config(MINIMAL + "[extras]\nx = 1\n")
    assert exc.value.key == "extras"


def test_missing_experiment_section():
    """Test: [experiment] ist Pflicht"""
    with pytest.raises(ConfigValidationError) as exc:
        parse_config("[learner]\nkind = adaptive\n")
    assert exc.value.key == "experiment"


def test_syntax_error_reports_line():
    """Test: Syntaxfehler nennt die Zeilennummer"""
    with pytest.raises(ConfigParseError) as exc:
        parse_config("[experiment]\nhorizon = 5\nthis line is broken\n")
    assert exc.value.lineno == 3
    assert "3" in str(exc.value)


def test_missing_section_header():
    """Test: Schlüssel vor dem ersten Abschnitt"""
    with pytest.raises(ConfigParseError) as exc:
        parse_config("horizon = 5\n")
    assert exc.value.lineno == 1


def test_duplicate_key():
    """Test: doppelter Schlüssel ist ein Syntaxfehler"""
    with pytest.raises(ConfigParseError) as exc:
        parse_config("[experiment]\nhorizon = 5\nhorizon = 6\n")
    assert exc.value.lineno == 3


def test_invalid_walk_support():
    """Test: walk_support nur -1,1 oder 0,1"""
    with pytest.raises(ConfigValidationError) as exc:
        parse_config("[experiment]\nhorizon = 5\n[environment]\nkind = random_walk\nwalk_support = 1,2\n")
    assert exc.value.key == "walk_support"


@pytest.mark.parametrize(
    "body, key",
    [
        ("[environment]\nkind = threshold\ndimension = 2\n", "dimension"),
        ("[environment]\nkind = rotating\ndimension = 3\n[learner]\nkind = adaptive\n", "kind"),
        ("[environment]\nkind = threshold\n[learner]\nkind = drifting_halfspaces\n", "kind"),
        ("[environment]\ndelta = 0.0\n[learner]\nkind = drifting_active\n", "delta"),
        ("[environment]\nkind = rotating\ndimension = 3\nfixed_direction = true\n[learner]\nkind = drifting_halfspaces\n", "fixed_direction"),
    ],
)
def test_incompatible_combinations(body, key):
    """Test: unverträgliche Umgebung/Lerner-Kombinationen"""
    with pytest.raises(ConfigValidationError) as exc:
        parse_config("[experiment]\nhorizon = 5\n" + body)
    assert exc.value.key == key


def test_serialize_round_trip():
    """Test: parse(serialize(cfg)) == cfg"""
    text = MINIMAL + "[window]\nK = 2.5\nmax_window = 400\n[halfspaces]\nc9 = 3\ntheoretical = true\n"
    cfg = parse_config(text)
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)


def test_serialize_writes_auto_for_derived_values():
    """Test: abgeleitete Werte erscheinen als auto"""
    text = serialize_config(parse_config(MINIMAL))
    assert "dimension = auto" in text
    assert "c9 = auto" in text
    assert text.index("[experiment]") < text.index("[environment]") < text.index("[active]")


def test_digest_stable_and_sensitive():
    """Test: Digest ist stabil, ändert sich mit Δ und ignoriert den Ausgabeort"""
    cfg = parse_config(MINIMAL)
    digest = config_digest(cfg)
    assert len(digest) == 12
    assert all(c in "0123456789abcdef" for c in digest)
    assert config_digest(parse_config(MINIMAL)) == digest
    other = apply_overrides(cfg, {"environment.delta": 0.002})
    assert config_digest(other) != digest
    moved = apply_overrides(cfg, {"experiment.output_dir": "/tmp/elsewhere", "experiment.workers": 4})
    assert config_digest(moved) == digest


def test_resolve_key():
    """Test: eindeutige Schlüssel, qualifizierte Schlüssel, Mehrdeutigkeit"""
    cfg = parse_config(MINIMAL)
    assert resolve_key(cfg, "delta") == ("environment", "delta")
    assert resolve_key(cfg, "window.confidence") == ("window", "confidence")
    with pytest.raises(ConfigValidationError):
        resolve_key(cfg, "confidence")
    with pytest.raises(ConfigValidationError):
        resolve_key(cfg, "nothing")
    with pytest.raises(ConfigValidationError):
        resolve_key(cfg, "window.nothing")


def test_apply_overrides_validates():
    """Test: Überschreibungen werden validiert, None wird ignoriert"""
    cfg = parse_config(MINIMAL)
    updated = apply_overrides(cfg, {"experiment.seeds": [7, 8], "experiment.workers": None})
    assert updated.experiment.seeds == [7, 8]
    assert cfg.experiment.seeds == [1]
    with pytest.raises(ConfigValidationError):
        apply_overrides(cfg, {"window.K": -1.0})


def test_load_config_missing_file(tmp_path):
    """Test: nicht lesbare Datei ist ein I/O-Fehler"""
    with pytest.raises(ExperimentIOError):
        load_config(tmp_path / "missing.ini")


def test_load_config_from_file(tmp_path):
    """Test: Datei wird gelesen und validiert"""
    path = tmp_path / "run.ini"
    path.write_text(MINIMAL, encoding="utf-8")
    cfg = load_config(path)
    assert isinstance(cfg, ExperimentConfig)
    assert cfg.environment.delta == 0.001


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.ini")), ids=lambda p: p.name)
def test_sample_configs_are_valid(path):
    """Test: alle mitgelieferten Beispielkonfigurationen sind gültig"""
    cfg = load_config(path)
    assert parse_config(serialize_config(cfg)) == cfg
