"""Limit laws for longest monotone subsequences of random (signed) involutions."""

__version__ = "0.1.0"
