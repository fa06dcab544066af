"""Symbolic group classification of u_t = (E(x,u) u_x)_x + H(x,u)."""

__version__ = "0.1.0"
