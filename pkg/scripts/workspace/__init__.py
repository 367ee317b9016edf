"""Workspace package: occupancy grid and scenario files."""
