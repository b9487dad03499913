"""Utilities: atomic file IO, seeding, synthetic corpora."""
