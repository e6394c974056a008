"""
DriftSim Test Suite

Tests für alle Simulator-Komponenten:
- Geometrie und Hypothesen
- Drift-Pläne und Umgebungen
- Fenster-ERM, driftende Halbräume, aktiver Lerner
- Konfiguration, Harness und CLI
- Orakel-Abgleiche und statistische Akzeptanztests (slow)
"""
