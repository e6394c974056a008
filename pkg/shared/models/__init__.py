"""
Drift-Simulator Datenmodelle

Hypothesen und Laufprotokolle. Die Experiment-Konfiguration liegt in
`shared.models.experiment` und wird explizit importiert.
"""

from .hypotheses import HalfspaceHypothesis, Hypothesis, ThresholdHypothesis, UnitVector
from .trace import CSV_HEADER, RoundRecord, RunTrace

__all__ = [
    "HalfspaceHypothesis",
    "Hypothesis",
    "ThresholdHypothesis",
    "UnitVector",
    "CSV_HEADER",
    "RoundRecord",
    "RunTrace",
]
