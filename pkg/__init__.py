"""
cinf-lift

Lift C-infinity structures with a Frobenius pairing to symplectic ones,
order by order, with exact rational arithmetic.
"""

__version__ = "0.3.0"
__author__ = "cinf-lift developers"
__description__ = "Exact symplectic lifting of C-infinity structures and cyclic Harrison cohomology"
