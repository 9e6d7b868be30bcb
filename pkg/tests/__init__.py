"""Needed for coverage to work in tox if running without --devel."""
