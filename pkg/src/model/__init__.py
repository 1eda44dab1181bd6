"""Physical model, configuration and shared domain types."""
