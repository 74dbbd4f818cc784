"""Symbolic coding of cyclic algebraic dynamical systems by beta-shifts."""

__version__ = "0.1.0"
