"""Bundled data files (synthetic trace)."""
