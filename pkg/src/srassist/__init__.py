"""On-demand assistance engine for screen-reader users."""

__version__ = "0.1.0"
