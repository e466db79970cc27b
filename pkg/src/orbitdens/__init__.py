"""Closed-orbit theory of density oscillations in finite fermion systems."""
