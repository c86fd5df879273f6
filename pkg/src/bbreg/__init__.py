"""Exact finite models of Euler-system derivatives, theta elements and regulators.

Submodules:
    coeffring: Galois rings GR(p^m, d) and linear algebra over them.
    groups: towers of cyclic Galois groups attached to inert primes.
    groupring: group rings, augmentation filtrations and graded classes.
    derivatives: derivative operators and Taylor expansion.
    mockeuler: mock Euler systems and their relations.
    localmodel: local Frobenius models at auxiliary primes.
    thetal: theta elements and the two-variable L-function element.
    regulator: integer lattices, pairings and graded regulators.
    newform: newform coefficients and prime sieves.
    cli: the ``bbreg`` command.
"""

__version__ = "0.1.0"
