"""Analysis modules for holomorphic phase portraits."""

__version__ = "0.1.0"
