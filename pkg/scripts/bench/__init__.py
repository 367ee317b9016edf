# Benchmark harness: sweeps, tables and SVG output.
