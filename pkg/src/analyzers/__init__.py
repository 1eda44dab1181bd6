"""Closed-form, witness and beamsplitter analyzers package."""
