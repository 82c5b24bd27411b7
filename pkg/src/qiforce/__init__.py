"""Simulation and analysis of quantum interference of force with entangled photons."""

__version__ = "0.1.0"
