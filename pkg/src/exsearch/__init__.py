"""Mining software exceptions from web-search logs."""

__version__ = "0.1.0"
