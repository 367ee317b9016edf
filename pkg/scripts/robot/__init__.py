"""Robot package: planar revolute chain, sphere model and clearance queries."""
