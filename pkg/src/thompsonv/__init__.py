"""Exact computations with Thompson's group V: elements, orbit graphs, transducers,
piecewise-linear maps and semiconjugacy brackets."""

from .cantor import RationalPoint, canonicalize, point, to_dyadic
from .velement import PrefixMap, X0, X1, apply_point, compose, invert

__version__ = "0.1.0"

__all__ = [
    "RationalPoint", "canonicalize", "point", "to_dyadic",
    "PrefixMap", "X0", "X1", "apply_point", "compose", "invert",
]
