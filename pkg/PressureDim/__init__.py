"""Fractal dimensions of IFS attractors and skew-product repellers via pressure roots."""
