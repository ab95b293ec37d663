"""Shared schemas, configuration loading and settings for fggm-lab."""
