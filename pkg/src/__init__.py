"""Exact topological recursion on genus-zero spectral curves."""
