"""Run orchestration package."""
