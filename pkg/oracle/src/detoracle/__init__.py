"""High-precision golden-vector and surface-pack generator."""

__version__ = "0.1.0"
