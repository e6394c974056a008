"""
pytest Konfiguration für die Drift-Simulator Test Suite
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to Python path für pytest
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

# Pytest-Optionen
pytest_plugins = []


def pytest_configure(config):
    """Konfiguration für pytest"""
    config.addinivalue_line(
        "markers",
        "slow: Markiere Tests als langsam (statistische Langläufe)"
    )
    config.addinivalue_line(
        "markers",
        "integration: Markiere Tests als Integration-Tests"
    )


@pytest.fixture
def rng():
    """Geseedeter Zufallsgenerator"""
    return np.random.default_rng(12345)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Ausgabeverzeichnis über die Umgebungsvariable"""
    target = tmp_path / "results"
    monkeypatch.setenv("DRIFTSIM_OUTPUT_DIR", str(target))
    return target
