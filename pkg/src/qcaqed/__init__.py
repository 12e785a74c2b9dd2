"""Quantum walks and quantum cellular automata for Dirac and Maxwell fields.

Submodules
----------
matrix_core      small dense linear algebra helpers
internal_space   coin spaces and the equal-norm condition
momentum         momentum-block walk unitaries and the 3D bosonic QCA
qca1d            state-vector simulation of the 1D QCAs
toeplitz         negative-energy coupling matrices
highprec         multiprecision arithmetic and eigensolver
fitting          decay-rate and Gaussian-profile fits
acceptance       the acceptance checks
cli              command-line runner (``qcaqed``)
"""

__version__ = "0.1.0"
