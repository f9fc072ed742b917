"""Synthetic task datasets, brute-force oracles, metrics and evaluation."""
