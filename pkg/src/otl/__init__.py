"""Numerical laboratory for a degenerate quasilinear interface problem.

Solves the interface-loaded Orlicz energy minimization problem on
interface-conforming disk meshes and measures regularity functionals
(BMO gradient oscillation, Log-Lipschitz moduli, Hoelder exponents) of the
discrete solutions.
"""

__version__ = "0.1.0"
