"""Exact computations for lattice KdV periodic reductions and their Hirota-type bilinear forms.

Submodules:

``exact``     rationals, jets, polynomials, linear algebra
``quiver``    exchange matrices, mutation and the palindromic reduction
``dynamics``  bilinear, U-system, KdV, w- and g-recurrences and projections
``poisson``   bracket families and exact Poisson checks
``lax``       Lax matrices, monodromy and spectral integrals
``cli``       the ``hirota-kdv`` command
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
