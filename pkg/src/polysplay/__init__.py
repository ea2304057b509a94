"""Exact combinatorics for splayed bordered Heegaard diagrams and the
polygon multi-modules built from them."""

__version__ = "0.1.0"
