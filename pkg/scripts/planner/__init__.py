"""Anytime search over the configuration lattice."""
