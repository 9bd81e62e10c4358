"""Numerical verification of extrinsic surface geometry in Sol3."""

__version__ = "0.1.0"
