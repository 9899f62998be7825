"""Exact characteristic cocycles and cocycle-level index checks."""
