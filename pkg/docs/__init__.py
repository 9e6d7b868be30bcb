"""Documentation for wavelet-runs.

Ruff raised INP001 "implicit namespace package" without this file.
"""
