"""Coherence witness toolkit: paradoxes, the XOR coherence game and a simulated photon experiment."""

__version__ = "0.1.0"
