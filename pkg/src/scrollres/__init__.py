"""Exact toolkit for relative canonical resolutions of genus-9 curves with a
degree-6 pencil, the K3 surfaces cut out by their linear syzygies, and the
integer-lattice certificates attached to those surfaces.

Everything is computed over a prime field (default p = 10007) with exact
integer arithmetic; no floating point enters any verdict.
"""

__version__ = "0.1.0"

DEFAULT_PRIME = 10007
