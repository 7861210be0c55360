"""Coined quantum walks on Z^d: simulation, polynomial-decay loci and bifurcation curves."""

__version__ = "0.1.0"
