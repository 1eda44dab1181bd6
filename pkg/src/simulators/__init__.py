"""Stochastic and exact simulators package."""
