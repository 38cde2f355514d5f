"""LP-rounding pivot algorithms and triple-based certificates for correlation clustering variants."""

__version__ = "0.1.0"
