"""Homomorphic MACs over GF(q) and delegated audits of network-coded storage."""

__version__ = "0.1.0"
