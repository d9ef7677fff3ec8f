"""Lattice-Kinetics: harmonic lattice dynamics and kinetic-limit laboratory"""

__version__ = "0.1.0"
