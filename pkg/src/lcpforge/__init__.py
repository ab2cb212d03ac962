"""Exact-arithmetic construction and verification of locally conformally
product structure data: number fields, unit groups, commuting integer
matrices, block decompositions, and similarity-equivariant metrics."""

__version__ = "0.1.0"
