"""Operator spreading in spin chains, quantified through continuous
weak-measurement tomography and Krylov-subspace complexity."""

__version__ = "0.1.0"
