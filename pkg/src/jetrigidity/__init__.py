"""Exact jet computations for isometry jets, Killing jets and sub-rigidity of geometric structures."""

__version__ = "0.1.0"
