"""Simulation of phase locking for a frequency-modulated qubit in a leaky cavity."""

__version__ = "1.0.0"
