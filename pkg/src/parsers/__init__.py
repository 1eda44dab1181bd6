"""Configuration parsers package."""
