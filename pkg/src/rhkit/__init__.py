"""Toolkit for relatively hyperbolic groups: free-product arithmetic, coned-off
graphs, geometric languages, equation solving and Van Kampen recognition."""

__version__ = "0.1.0"
