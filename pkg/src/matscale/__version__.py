"""Version information for matscale package."""

__version__ = "0.1.0"
