"""Simulator-CLI: run, sweep, oracle, schedule"""
