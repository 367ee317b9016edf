"""Successor generation with fixed and bur motion primitives."""
