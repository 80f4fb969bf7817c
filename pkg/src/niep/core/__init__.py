"""
Core module for niep.

This package contains the solver itself:
- Exact scalars, matrices and the numeric eigenvalue oracle
- Spectrum parsing, classification and necessary conditions
- The staircase, many-positive and complex realizers with their parameter search
- Strategy dispatch, verification, reporting and the fixture corpus
"""

__all__ = [
    "dispatcher",
    "spectrum",
    "staircase",
    "many_positive",
    "complex_realizer",
    "verification",
    "corpus",
]
