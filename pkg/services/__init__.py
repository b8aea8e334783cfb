"""Config validation, JSON codec and experiment orchestration."""
