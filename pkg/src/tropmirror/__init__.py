"""Integral affine manifolds with singularities, their discrete Legendre
transforms and tropical curves on them."""

__version__ = "0.1.0"
