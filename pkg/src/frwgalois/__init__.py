"""Integrability analysis of FRW scalar-field Hamiltonians.

Differential Galois solvability criteria (Whittaker, hypergeometric, Lame,
Bessel, Kovacic), higher-order variational obstructions, Darboux-point
classification of the quartic conformal potential, exact Poisson-bracket
verification of the known first integrals, and numerical dynamics with
Weierstrass closed-form oracles.
"""

__version__ = "0.1.0"

from . import exact  # noqa: F401
