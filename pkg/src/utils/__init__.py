"""Utility functions package.""" 