"""Spectral stability toolkit for the co-rotational wave-map blow-up profile 2*arctan(r/(T-t))."""

__version__ = "0.1.0"
