"""
Drift-Simulator Services

Kommandozeilen-Einstiegspunkte.
"""
