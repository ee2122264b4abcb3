"""Short-time heat kernel bounds, intrinsic metrics and path energies at desk scale."""

__version__ = "0.1.0"
