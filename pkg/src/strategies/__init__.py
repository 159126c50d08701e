"""Quantum strategies in the Hilbert-space and tracial pictures."""
