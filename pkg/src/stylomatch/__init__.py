"""Match accounts across two platforms from post text and timestamps."""

__version__ = "0.1.0"
