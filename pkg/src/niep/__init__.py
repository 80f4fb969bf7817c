"""
niep - Constructive realizations for the Nonnegative Inverse Eigenvalue Problem

Given a prescribed spectrum, builds an upper triangular matrix A carrying the
spectrum on its diagonal and a unit lower triangular L so that C = L·A·L⁻¹ is
entrywise nonnegative. Every realization comes with the inequalities that were
checked and an independent spectrum verification.
"""

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "config",
]

from niep.config import config

__doc__ = """
niep - Nonnegative Inverse Eigenvalue Problem solver

Main Features:
- Exact Gaussian-rational arithmetic, float mode for irrational spectra
- One-, two- and k-positive staircase constructions
- Two-, three- and k-negative parameterised constructions with interval search
- Complex conjugate pair constructions with a modulus-1 diagonal L
- Characteristic polynomial and QR eigenvalue verification

Quick Start:
    >>> from niep.core.spectrum import parse_spectrum, classify
    >>> classify(parse_spectrum("7,3,-5,-5")).k_pos
    2

For CLI usage:
    $ niep realize --spectrum "7,3,-5,-5" --format json
    $ niep check --spectrum "8,2,2,2,1,-5,-5,-5"
    $ niep corpus ./corpus
"""
