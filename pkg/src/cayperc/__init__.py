"""Site percolation laboratory for Cayley graphs."""

__version__ = "0.1.0"
