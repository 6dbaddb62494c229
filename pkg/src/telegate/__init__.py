"""Simulation of teleportation-based two-qubit gates in linear optics."""

__version__ = "0.1.0"
