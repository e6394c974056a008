"""
Drift-Simulator Shared Components

Datenmodelle, Lernverfahren und Experiment-Harness für Lernen unter Concept Drift.
"""

__version__ = "0.1.0"
